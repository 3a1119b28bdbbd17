#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace minispace::zip {

// Minimal reader/writer for the standard zip container: stored and deflate
// entries, no zip64, no encryption.

struct Entry {
    std::string name;
    std::string data;
    std::string error;  // non-empty when this entry could not be extracted

    bool ok() const { return error.empty(); }
};

/// Entries in central-directory order; directory entries are skipped.
/// Throws FormatError when `bytes` is not a zip archive. Problems confined to
/// one entry (bad CRC, unsupported method, truncated data) are reported in
/// that entry's `error` instead.
std::vector<Entry> read_archive(std::string_view bytes);

/// Deterministic archive: fixed timestamps, entries in the given order.
std::string write_archive(const std::vector<Entry>& entries, bool deflate = true);

/// True when `bytes` starts with a local-file or end-of-directory signature.
bool looks_like_archive(std::string_view bytes);

}  // namespace minispace::zip
