#include "rack/service.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "rack/error.hpp"
#include "rack/reformulator.hpp"
#include "rack/render.hpp"
#include "rack/snippet_extract.hpp"

namespace rack {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Config

namespace {

std::string trim(std::string_view s)
{
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    std::size_t e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s)
{
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        std::size_t comma = s.find(',', pos);
        auto item = trim(s.substr(pos, comma == std::string_view::npos ? comma : comma - pos));
        if (!item.empty())
            out.push_back(item);
        if (comma == std::string_view::npos)
            break;
        pos = comma + 1;
    }
    return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& value)
{
    T out{};
    auto r = std::from_chars(value.data(), value.data() + value.size(), out);
    if (r.ec != std::errc() || r.ptr != value.data() + value.size())
        throw Error(ErrorCode::InvalidArgument, "config: bad number for " + key + ": " + value);
    return out;
}

bool parse_bool(const std::string& key, const std::string& value)
{
    if (value == "true" || value == "1" || value == "yes")
        return true;
    if (value == "false" || value == "0" || value == "no")
        return false;
    throw Error(ErrorCode::InvalidArgument, "config: bad boolean for " + key + ": " + value);
}

}  // namespace

ServiceConfig ServiceConfig::parse(std::string_view text)
{
    ServiceConfig c;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.resize(hash);
        line = trim(line);
        if (line.empty())
            continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorCode::InvalidArgument,
                        "config line " + std::to_string(line_no) + ": expected key = value");
        std::string key = trim(std::string_view(line).substr(0, eq));
        std::string value = trim(std::string_view(line).substr(eq + 1));
        if (key == "index")
            c.index_path = value;
        else if (key == "backend")
            c.backend = value;
        else if (key == "corpus_dir")
            c.corpus_dir = value;
        else if (key == "orgs")
            c.orgs = split_list(value);
        else if (key == "listen") {
            auto colon = value.rfind(':');
            if (colon == std::string::npos)
                throw Error(ErrorCode::InvalidArgument, "config: listen must be host:port");
            c.listen_host = value.substr(0, colon);
            c.port = parse_number<int>(key, value.substr(colon + 1));
        } else if (key == "reformulate_budget_ms")
            c.reformulate_budget = std::chrono::milliseconds(parse_number<long>(key, value));
        else if (key == "search_budget_ms")
            c.search_budget = std::chrono::milliseconds(parse_number<long>(key, value));
        else if (key == "enforce_budgets")
            c.enforce_budgets = parse_bool(key, value);
        else if (key == "host_weight")
            c.host_weight = std::strtod(value.c_str(), nullptr);
        else if (key == "coherence_window")
            c.coherence_window = parse_number<std::size_t>(key, value);
        else if (key == "search_files")
            c.search_files = parse_number<std::size_t>(key, value);
        else if (key == "stoplist")
            c.stoplist_path = value;
        else if (key == "static_dir")
            c.static_dir = value;
        else if (key == "remote_api_base")
            c.remote_api_base = value;
        else if (key == "remote_replay")
            c.remote_replay = value;
        else
            throw Error(ErrorCode::InvalidArgument, "config: unknown key " + key);
    }
    return c;
}

ServiceConfig ServiceConfig::from_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::Io, "cannot read config: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

void ServiceConfig::validate() const
{
    auto bad = [](const std::string& why) { throw Error(ErrorCode::InvalidArgument, "config: " + why); };
    if (reformulate_budget.count() <= 0 || search_budget.count() <= 0)
        bad("budgets must be positive");
    if (backend != "local" && backend != "remote")
        bad("backend must be local or remote");
    if (backend == "local" && corpus_dir.empty())
        bad("local backend needs corpus_dir");
    if (backend == "remote" && !corpus_dir.empty())
        bad("corpus_dir given with the remote backend; configure exactly one backend");
    if (host_weight < 0.0 || host_weight > 1.0)
        bad("host_weight must lie in [0, 1]");
    if (coherence_window == 0)
        bad("coherence_window must be positive");
    if (search_files == 0)
        bad("search_files must be positive");
}

// ---------------------------------------------------------------------------
// Handlers

namespace {

using Clock = std::chrono::steady_clock;

HttpReply reply(int status, const json& body)
{
    return HttpReply{status, body.dump(), {}};
}

HttpReply error_reply(int status, std::string_view code, std::string_view message)
{
    return reply(status, error_json(code, message));
}

// Wraps a handler with timing and the budget check.
template <typename F>
HttpReply timed(std::chrono::milliseconds budget, bool enforce, F&& body)
{
    auto t0 = Clock::now();
    HttpReply r = body();
    r.elapsed = std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - t0);
    if (enforce && r.elapsed > budget)
        return HttpReply{503,
                         error_json("BUDGET", "request exceeded its " +
                                                  std::to_string(budget.count()) + " ms budget")
                             .dump(),
                         r.elapsed};
    return r;
}

}  // namespace

Service::Service(ServiceConfig config, Stoplist stoplist)
    : config_(std::move(config)), stoplist_(std::move(stoplist))
{
}

void Service::load()
{
    if (!config_.index_path.empty())
        set_index(std::make_shared<const KeywordApiIndex>(load_index(config_.index_path)));
    if (config_.backend == "local" && !config_.corpus_dir.empty()) {
        set_backend(std::make_shared<const LocalCorpusIndex>(LocalCorpusIndex::build(config_.corpus_dir)));
    } else if (config_.backend == "remote") {
        RemoteConfig rc;
        rc.api_base = config_.remote_api_base;
        rc.orgs = config_.orgs;
        if (const char* tok = std::getenv("RACK_CODE_TOKEN"))
            rc.token = tok;
        std::shared_ptr<HttpTransport> transport;
        if (!config_.remote_replay.empty())
            transport = ReplayTransport::from_file(config_.remote_replay);
        else
            transport = make_https_transport(config_.search_budget);
        set_backend(std::make_shared<const RemoteBackend>(std::move(rc), std::move(transport)));
    }
}

void Service::set_index(std::shared_ptr<const KeywordApiIndex> index)
{
    std::lock_guard lock(mutex_);
    index_ = std::move(index);
}

void Service::set_backend(std::shared_ptr<const CorpusBackend> backend)
{
    std::lock_guard lock(mutex_);
    backend_ = std::move(backend);
}

std::shared_ptr<const KeywordApiIndex> Service::current_index() const
{
    std::lock_guard lock(mutex_);
    return index_;
}

std::shared_ptr<const CorpusBackend> Service::current_backend() const
{
    std::lock_guard lock(mutex_);
    return backend_;
}

HttpReply Service::reformulate(std::string_view body) const
{
    return timed(config_.reformulate_budget, config_.enforce_budgets, [&]() -> HttpReply {
        auto index = current_index();
        if (!index)
            return error_reply(503, "INDEX_NOT_LOADED", "index not loaded");
        auto req = json::parse(body, nullptr, false);
        if (req.is_discarded() || !req.is_object())
            return error_reply(400, "BAD_REQUEST", "body must be a JSON object");
        if (!req.contains("query") || !req["query"].is_string())
            return error_reply(400, "BAD_REQUEST", "field 'query' (string) is required");
        SuggestOptions opts;
        opts.coherence_window = config_.coherence_window;
        if (req.contains("top")) {
            if (!req["top"].is_number_integer() || req["top"].get<long long>() < 1)
                return error_reply(400, "BAD_REQUEST", "field 'top' must be a positive integer");
            opts.top = static_cast<std::size_t>(req["top"].get<long long>());
        }
        try {
            auto s = suggest(*index, req["query"].get<std::string>(), stoplist_, opts);
            return HttpReply{200, render_reformulate(s), {}};
        } catch (const Error& e) {
            if (e.code() == ErrorCode::EmptyQuery)
                return error_reply(422, "EMPTY_QUERY", e.what());
            throw;
        }
    });
}

HttpReply Service::search(std::string_view body) const
{
    return timed(config_.search_budget, config_.enforce_budgets, [&]() -> HttpReply {
        auto backend = current_backend();
        if (!backend)
            return error_reply(503, "BACKEND_NOT_CONFIGURED", "no code search backend configured");
        auto req = json::parse(body, nullptr, false);
        if (req.is_discarded() || !req.is_object())
            return error_reply(400, "BAD_REQUEST", "body must be a JSON object");
        if (!req.contains("query") || !req["query"].is_string())
            return error_reply(400, "BAD_REQUEST", "field 'query' (string) is required");
        if (!req.contains("apis") || !req["apis"].is_array())
            return error_reply(400, "BAD_REQUEST", "field 'apis' (array of strings) is required");
        std::vector<std::string> apis;
        for (const auto& a : req["apis"]) {
            if (!a.is_string())
                return error_reply(400, "BAD_REQUEST", "field 'apis' must contain strings");
            if (!a.get<std::string>().empty())
                apis.push_back(a.get<std::string>());
        }
        if (apis.empty())
            return error_reply(422, "NO_APIS", "select at least one API class");

        RankOptions opts;
        opts.host_weight = config_.host_weight;
        std::string mode = req.value("mode", std::string("topk"));
        if (mode != "top1" && mode != "topk")
            return error_reply(400, "BAD_REQUEST", "field 'mode' must be \"top1\" or \"topk\"");
        if (req.contains("k")) {
            if (!req["k"].is_number_integer() || req["k"].get<long long>() < 1)
                return error_reply(400, "BAD_REQUEST", "field 'k' must be a positive integer");
            opts.k = static_cast<std::size_t>(req["k"].get<long long>());
        }
        if (mode == "top1")
            opts.k = 1;

        Query query = Query::parse(req["query"].get<std::string>(), stoplist_);
        try {
            auto hits = backend->search(apis, config_.search_files);
            return HttpReply{200, render_search(rank_snippets(hits, query, apis, opts)), {}};
        } catch (const BackendError& e) {
            json err = error_json(code_name(e.code()), e.what());
            if (e.retry_after())
                err["error"]["retry_after"] = *e.retry_after();
            return reply(502, err);
        }
    });
}

HttpReply Service::health() const
{
    auto index = current_index();
    if (!index)
        return reply(503, json{{"status", "loading"}, {"index_meta", nullptr}});
    return reply(200, json{{"status", "ok"}, {"index_meta", index_meta_json(*index)}});
}

// ---------------------------------------------------------------------------
// HTTP binding

struct HttpServer::Impl {
    std::shared_ptr<Service> service;
    httplib::Server server;
};

namespace {

void send(httplib::Response& res, const HttpReply& r)
{
    res.status = r.status;
    res.set_header("X-Elapsed-Us", std::to_string(r.elapsed.count()));
    res.set_content(r.body, "application/json");
}

}  // namespace

HttpServer::HttpServer(std::shared_ptr<Service> service) : impl_(std::make_unique<Impl>())
{
    impl_->service = std::move(service);
    auto& srv = impl_->server;
    auto svc = impl_->service;

    for (std::string prefix : {"/v1", ""}) {
        srv.Post(prefix + "/reformulate", [svc](const httplib::Request& req, httplib::Response& res) {
            send(res, svc->reformulate(req.body));
        });
        srv.Post(prefix + "/search", [svc](const httplib::Request& req, httplib::Response& res) {
            send(res, svc->search(req.body));
        });
        srv.Get(prefix + "/health", [svc](const httplib::Request&, httplib::Response& res) {
            send(res, svc->health());
        });
    }
    srv.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        std::string msg = "internal error";
        try {
            std::rethrow_exception(ep);
        } catch (const std::exception& e) {
            msg = e.what();
        } catch (...) {
        }
        res.status = 500;
        res.set_content(error_json("INTERNAL", msg).dump(), "application/json");
    });
    if (!impl_->service->config().static_dir.empty())
        srv.set_mount_point("/", impl_->service->config().static_dir);
}

HttpServer::~HttpServer()
{
    stop();
}

int HttpServer::bind(const std::string& host, int port)
{
    int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
    if (bound < 0)
        throw Error(ErrorCode::Io, "cannot bind " + host + ":" + std::to_string(port));
    return bound;
}

void HttpServer::listen()
{
    impl_->server.listen_after_bind();
}

void HttpServer::stop()
{
    if (impl_)
        impl_->server.stop();
}

bool HttpServer::running() const
{
    return impl_->server.is_running();
}

}  // namespace rack
