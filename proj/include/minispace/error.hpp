#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace minispace {

// Every failure raised by the library derives from Error and carries a short
// machine-readable kind tag ("domain", "parse", "validation", ...).
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& message) : Error("domain", message) {}
};

class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t byte_offset)
        : Error("parse", message + " (at byte " + std::to_string(byte_offset) + ")"),
          byte_offset_(byte_offset) {}

    std::size_t byte_offset() const noexcept { return byte_offset_; }

private:
    std::size_t byte_offset_;
};

// Collects every failed rule rather than stopping at the first one.
class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<std::string> failures)
        : Error("validation", join(failures)), failures_(std::move(failures)) {}

    const std::vector<std::string>& failures() const noexcept { return failures_; }

private:
    static std::string join(const std::vector<std::string>& items) {
        std::string out = "validation failed:";
        for (const auto& item : items) {
            out += "\n  - ";
            out += item;
        }
        return out;
    }

    std::vector<std::string> failures_;
};

class VersionError : public Error {
public:
    explicit VersionError(const std::string& message) : Error("version", message) {}
};

class FormatError : public Error {
public:
    explicit FormatError(const std::string& message) : Error("format", message) {}
};

class StandardizationError : public Error {
public:
    explicit StandardizationError(const std::string& message) : Error("standardization", message) {}
};

class SingularDesignError : public Error {
public:
    SingularDesignError(const std::string& message, std::vector<std::string> dependent)
        : Error("singular_design", message), dependent_(std::move(dependent)) {}

    const std::vector<std::string>& dependent_columns() const noexcept { return dependent_; }

private:
    std::vector<std::string> dependent_;
};

class DegenerateError : public Error {
public:
    explicit DegenerateError(const std::string& message) : Error("degenerate", message) {}
};

class UnbalancedDesignError : public Error {
public:
    explicit UnbalancedDesignError(const std::string& message) : Error("unbalanced_design", message) {}
};

class GeometryError : public Error {
public:
    explicit GeometryError(const std::string& message) : Error("degenerate_geometry", message) {}
};

class AnalysisPlanError : public Error {
public:
    AnalysisPlanError(std::string question, const std::string& message)
        : Error("analysis_plan", question + ": " + message), question_(std::move(question)) {}

    const std::string& question() const noexcept { return question_; }

private:
    std::string question_;
};

}  // namespace minispace
