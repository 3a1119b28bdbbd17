#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "minispace/gateway/export.hpp"

namespace minispace::gateway {

inline constexpr int kDefaultPort = 8787;
inline constexpr std::size_t kDefaultMaxUploadBytes = std::size_t{256} << 20;

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = kDefaultPort;  // 0 picks a free port
    std::chrono::seconds batch_ttl{3600};
    std::size_t max_upload_bytes = kDefaultMaxUploadBytes;
    std::filesystem::path ui_dir;  // static assets served at /; empty uses the built-in page
    unsigned ingest_threads = 0;
};

/// SPACE_PORT when set and valid, otherwise the default port.
int port_from_env();

/// An ingested upload. Immutable once stored.
struct Batch {
    std::string id;
    std::vector<IngestResult> entries;
    std::vector<SessionLog> logs;  // the entries that parsed, in entry order
};

/// In-memory batches that expire `ttl` after their last access.
class BatchStore {
public:
    using Clock = std::function<std::chrono::steady_clock::time_point()>;

    explicit BatchStore(std::chrono::seconds ttl, Clock clock = std::chrono::steady_clock::now);

    std::shared_ptr<const Batch> add(std::vector<IngestResult> entries);
    /// Null when the id is unknown or expired.
    std::shared_ptr<const Batch> get(const std::string& id);
    bool erase(const std::string& id);
    std::size_t size();

private:
    struct Slot {
        std::shared_ptr<const Batch> batch;
        std::chrono::steady_clock::time_point expires;
    };
    void purge(std::chrono::steady_clock::time_point now);

    std::chrono::seconds ttl_;
    Clock clock_;
    std::mutex mutex_;
    std::map<std::string, Slot> slots_;
    std::uint64_t counter_ = 0;
    std::uint64_t salt_;
};

struct HttpReply {
    int status = 200;
    std::string content_type = "application/json";
    std::string body;
    std::map<std::string, std::string> headers;
};

struct UploadFile {
    std::string name;
    std::string bytes;
};

/// Request handlers, independent of the HTTP transport.
class Service {
public:
    explicit Service(ServiceConfig config);

    const ServiceConfig& config() const { return config_; }
    BatchStore& store() { return store_; }

    HttpReply create_batch(const std::vector<UploadFile>& files);
    HttpReply catalog(const std::string& id, const std::string& mode);
    /// Body: {"mode": "...", "columns": [...]}; omitted columns export every catalog column.
    HttpReply export_batch(const std::string& id, const std::string& body);
    HttpReply delete_batch(const std::string& id);
    HttpReply too_large() const;

private:
    ServiceConfig config_;
    BatchStore store_;
};

/// A running HTTP front-end. listen() blocks until stop() is called.
class Server {
public:
    explicit Server(ServiceConfig config);
    ~Server();
    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    /// Binds the socket; returns the bound port. Throws DomainError when busy.
    int bind();
    void listen();
    void stop();
    void wait_until_ready();
    Service& service();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace minispace::gateway
