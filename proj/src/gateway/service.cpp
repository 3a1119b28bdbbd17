#include "minispace/gateway/service.hpp"

#include <cstdlib>
#include <random>

#include <httplib.h>

namespace minispace::gateway {

namespace {

using json = nlohmann::ordered_json;

HttpReply json_reply(int status, const json& doc) {
    return {status, "application/json", doc.dump() + "\n", {}};
}

HttpReply error_reply(int status, const std::string& kind, const std::string& message) {
    return json_reply(status, {{"error", {{"kind", kind}, {"message", message}}}});
}

HttpReply not_found(const std::string& id) {
    return error_reply(404, "not_found", "no batch with id '" + id + "' (unknown or expired)");
}

// Built-in page when no UI assets are configured.
constexpr const char* kFallbackPage = R"(<!doctype html>
<html lang="en">
<head><meta charset="utf-8"><title>SPACE data parser</title></head>
<body>
<h1>SPACE data parser service</h1>
<p>The browser UI assets are not installed. Start the service with <code>--ui DIR</code> to serve them.</p>
<p>API: POST /api/batches, GET /api/batches/{id}/catalog?mode=quick_summary|detailed,
POST /api/batches/{id}/export, DELETE /api/batches/{id}.</p>
</body>
</html>
)";

}  // namespace

int port_from_env() {
    const char* v = std::getenv("SPACE_PORT");
    if (!v || !*v) return kDefaultPort;
    char* end = nullptr;
    const long port = std::strtol(v, &end, 10);
    if (*end != '\0' || port < 1 || port > 65535) return kDefaultPort;
    return static_cast<int>(port);
}

// ---------------------------------------------------------------------------

BatchStore::BatchStore(std::chrono::seconds ttl, Clock clock)
    : ttl_(ttl), clock_(std::move(clock)), salt_(std::random_device{}()) {}

void BatchStore::purge(std::chrono::steady_clock::time_point now) {
    std::erase_if(slots_, [now](const auto& kv) { return kv.second.expires <= now; });
}

std::shared_ptr<const Batch> BatchStore::add(std::vector<IngestResult> entries) {
    auto batch = std::make_shared<Batch>();
    batch->logs = ok_logs(entries);
    batch->entries = std::move(entries);
    const auto now = clock_();
    std::lock_guard lock(mutex_);
    purge(now);
    const std::uint64_t n = ++counter_;
    char id[33];
    std::snprintf(id, sizeof id, "%016llx%08llx", static_cast<unsigned long long>(salt_ ^ (n * 0x9E3779B97F4A7C15ull)),
                  static_cast<unsigned long long>(n));
    batch->id = id;
    slots_[batch->id] = {batch, now + ttl_};
    return batch;
}

std::shared_ptr<const Batch> BatchStore::get(const std::string& id) {
    const auto now = clock_();
    std::lock_guard lock(mutex_);
    purge(now);
    auto it = slots_.find(id);
    if (it == slots_.end()) return nullptr;
    it->second.expires = now + ttl_;
    return it->second.batch;
}

bool BatchStore::erase(const std::string& id) {
    std::lock_guard lock(mutex_);
    return slots_.erase(id) > 0;
}

std::size_t BatchStore::size() {
    const auto now = clock_();
    std::lock_guard lock(mutex_);
    purge(now);
    return slots_.size();
}

// ---------------------------------------------------------------------------

Service::Service(ServiceConfig config) : config_(std::move(config)), store_(config_.batch_ttl) {}

HttpReply Service::create_batch(const std::vector<UploadFile>& files) {
    if (files.empty()) return error_reply(400, "domain", "no file in the upload");
    std::vector<IngestResult> entries;
    std::size_t total = 0;
    for (const auto& f : files) {
        total += f.bytes.size();
        if (total > config_.max_upload_bytes) return too_large();
        try {
            auto part = ingest_upload(f.name, f.bytes, config_.ingest_threads);
            for (auto& e : part) entries.push_back(std::move(e));
        } catch (const Error& e) {
            IngestResult r;
            r.source_name = f.name;
            r.outcome = to_error_record(e);
            entries.push_back(std::move(r));
        }
    }
    const auto batch = store_.add(std::move(entries));
    json doc;
    doc["batch_id"] = batch->id;
    doc["ok"] = batch->logs.size();
    doc["failed"] = batch->entries.size() - batch->logs.size();
    doc["expires_in_s"] = config_.batch_ttl.count();
    doc["entries"] = json::array();
    for (const auto& e : batch->entries) doc["entries"].push_back(entry_status_json(e));
    return json_reply(201, doc);
}

HttpReply Service::catalog(const std::string& id, const std::string& mode) {
    const auto batch = store_.get(id);
    if (!batch) return not_found(id);
    try {
        const auto cat = build_catalog(batch->logs, parse_mode(mode.empty() ? "quick_summary" : mode));
        json doc = catalog_to_json(cat);
        doc["batch_id"] = id;
        return json_reply(200, doc);
    } catch (const Error& e) {
        return json_reply(422, error_json(e));
    }
}

HttpReply Service::export_batch(const std::string& id, const std::string& body) {
    const auto batch = store_.get(id);
    if (!batch) return not_found(id);
    ExportRequest request;
    try {
        const auto doc = body.empty() ? nlohmann::json::object() : nlohmann::json::parse(body);
        if (!doc.is_object()) return error_reply(400, "parse", "export request must be an object");
        request.mode = parse_mode(doc.value("mode", std::string("quick_summary")));
        if (doc.contains("columns")) {
            request.selected_columns = doc.at("columns").get<std::vector<std::string>>();
        } else {
            request.selected_columns = build_catalog(batch->logs, request.mode).columns();
        }
    } catch (const nlohmann::json::exception& e) {
        return error_reply(400, "parse", std::string("malformed export request: ") + e.what());
    } catch (const Error& e) {
        return json_reply(400, error_json(e));
    }
    try {
        HttpReply reply{200, "text/csv; charset=utf-8", export_csv(batch->logs, request), {}};
        reply.headers["Content-Disposition"] =
            "attachment; filename=\"space_" + std::string(to_string(request.mode)) + ".csv\"";
        return reply;
    } catch (const Error& e) {
        return json_reply(400, error_json(e));
    }
}

HttpReply Service::delete_batch(const std::string& id) {
    if (!store_.erase(id)) return not_found(id);
    return {204, "application/json", "", {}};
}

HttpReply Service::too_large() const {
    return error_reply(413, "payload_too_large",
                       "upload exceeds the limit of " + std::to_string(config_.max_upload_bytes) + " bytes");
}

// ---------------------------------------------------------------------------

struct Server::Impl {
    explicit Impl(ServiceConfig c) : service(std::move(c)) {}
    Service service;
    httplib::Server http;
    int port = -1;
};

namespace {

void send(httplib::Response& res, const HttpReply& reply) {
    res.status = reply.status;
    for (const auto& [k, v] : reply.headers) res.set_header(k, v);
    if (!reply.body.empty()) res.set_content(reply.body, reply.content_type);
}

}  // namespace

Server::Server(ServiceConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {
    auto& http = impl_->http;
    auto& svc = impl_->service;
    // Leave room for multipart framing; the service enforces the file cap itself.
    http.set_payload_max_length(svc.config().max_upload_bytes + (std::size_t{1} << 20));

    http.Post("/api/batches", [&svc](const httplib::Request& req, httplib::Response& res) {
        std::vector<UploadFile> files;
        if (req.is_multipart_form_data()) {
            for (const auto& [field, part] : req.files) files.push_back({part.filename.empty() ? field : part.filename, part.content});
        } else if (!req.body.empty()) {
            files.push_back({req.has_param("name") ? req.get_param_value("name") : "upload", req.body});
        }
        send(res, svc.create_batch(files));
    });
    http.Get(R"(/api/batches/([^/]+)/catalog)", [&svc](const httplib::Request& req, httplib::Response& res) {
        send(res, svc.catalog(req.matches[1], req.has_param("mode") ? req.get_param_value("mode") : ""));
    });
    http.Post(R"(/api/batches/([^/]+)/export)", [&svc](const httplib::Request& req, httplib::Response& res) {
        send(res, svc.export_batch(req.matches[1], req.body));
    });
    http.Delete(R"(/api/batches/([^/]+))", [&svc](const httplib::Request& req, httplib::Response& res) {
        send(res, svc.delete_batch(req.matches[1]));
    });
    http.Get("/api/health", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"status":"ok","export_schema":")" + std::string(kExportSchemaVersion) + "\"}\n",
                        "application/json");
    });

    const auto& ui = svc.config().ui_dir;
    if (!ui.empty() && std::filesystem::is_directory(ui)) {
        http.set_mount_point("/", ui.string());
    } else {
        http.Get("/", [](const httplib::Request&, httplib::Response& res) { res.set_content(kFallbackPage, "text/html"); });
    }

    // Fill in bodies for transport-level errors (oversized payloads, unknown routes).
    http.set_error_handler([&svc](const httplib::Request&, httplib::Response& res) {
        if (!res.body.empty()) return;
        HttpReply reply = res.status == 413 ? svc.too_large()
                                            : error_reply(res.status, res.status == 404 ? "not_found" : "http",
                                                          httplib::status_message(res.status));
        res.set_content(reply.body, reply.content_type);
    });
}

Server::~Server() { stop(); }

int Server::bind() {
    const auto& c = impl_->service.config();
    if (c.port == 0) {
        impl_->port = impl_->http.bind_to_any_port(c.host);
    } else {
        impl_->port = impl_->http.bind_to_port(c.host, c.port) ? c.port : -1;
    }
    if (impl_->port < 0) throw DomainError("cannot bind " + c.host + ":" + std::to_string(c.port));
    return impl_->port;
}

void Server::listen() {
    if (impl_->port < 0) bind();
    impl_->http.listen_after_bind();
}

void Server::stop() {
    if (impl_->http.is_running()) impl_->http.stop();
}

void Server::wait_until_ready() { impl_->http.wait_until_ready(); }

Service& Server::service() { return impl_->service; }

}  // namespace minispace::gateway
