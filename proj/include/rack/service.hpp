#pragma once

#include <chrono>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "rack/corpus_search.hpp"
#include "rack/index_store.hpp"
#include "rack/text.hpp"

namespace rack {

/// Service settings. The config file is `key = value` lines; '#' starts a
/// comment. Keys: index, backend (local|remote), corpus_dir, orgs
/// (comma-separated), listen (host:port), reformulate_budget_ms,
/// search_budget_ms, enforce_budgets (true|false), host_weight, stoplist,
/// static_dir, coherence_window, search_files, remote_api_base,
/// remote_replay.
struct ServiceConfig {
    std::string index_path;
    std::string backend = "local";
    std::string corpus_dir;
    std::vector<std::string> orgs = {"apache", "eclipse", "google", "facebook"};
    std::string listen_host = "127.0.0.1";
    int port = 8080;
    std::chrono::milliseconds reformulate_budget{10000};
    std::chrono::milliseconds search_budget{2000};
    bool enforce_budgets = false;
    double host_weight = 0.5;
    std::size_t coherence_window = 10;
    std::size_t search_files = 10;  // files fetched per search, independent of k
    std::string stoplist_path;
    std::string static_dir;
    std::string remote_api_base = "https://api.github.com";
    std::string remote_replay;  // recorded-response fixture instead of the network

    static ServiceConfig from_file(const std::string& path);
    static ServiceConfig parse(std::string_view text);
    /// Throws Error(InvalidArgument) on inconsistent settings.
    void validate() const;
};

struct HttpReply {
    int status = 200;
    std::string body;
    std::chrono::microseconds elapsed{0};
};

/// Request handling, independent of the HTTP transport. All shared state is
/// immutable once published, so handlers may run concurrently.
class Service {
public:
    Service(ServiceConfig config, Stoplist stoplist);

    /// Loads the index and backend named in the config.
    void load();
    void set_index(std::shared_ptr<const KeywordApiIndex> index);
    void set_backend(std::shared_ptr<const CorpusBackend> backend);

    HttpReply reformulate(std::string_view body) const;
    HttpReply search(std::string_view body) const;
    HttpReply health() const;

    const ServiceConfig& config() const { return config_; }

private:
    std::shared_ptr<const KeywordApiIndex> current_index() const;
    std::shared_ptr<const CorpusBackend> current_backend() const;

    ServiceConfig config_;
    Stoplist stoplist_;
    mutable std::mutex mutex_;  // guards the two pointers, not the objects
    std::shared_ptr<const KeywordApiIndex> index_;
    std::shared_ptr<const CorpusBackend> backend_;
};

/// Binds the service's endpoints (under /v1/ and unversioned aliases) to an
/// HTTP server.
class HttpServer {
public:
    explicit HttpServer(std::shared_ptr<Service> service);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds to host:port (port 0 picks a free port) and returns the port.
    int bind(const std::string& host, int port);
    /// Blocks until stop() is called.
    void listen();
    void stop();
    bool running() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace rack
