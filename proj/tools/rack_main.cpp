// rack: command-line front end for ingest, suggest, search, eval and serve.

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rack/corpus_search.hpp"
#include "rack/error.hpp"
#include "rack/eval.hpp"
#include "rack/index_store.hpp"
#include "rack/ingest.hpp"
#include "rack/reformulator.hpp"
#include "rack/render.hpp"
#include "rack/service.hpp"
#include "rack/snippet_extract.hpp"

namespace {

using namespace rack;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitEnvironment = 3;

std::string fixed2(double x)
{
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(2) << round2(x);
    return ss.str();
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::Io, "cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> split_csv(const std::string& s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto b = item.find_first_not_of(" \t");
        auto e = item.find_last_not_of(" \t");
        if (b != std::string::npos)
            out.push_back(item.substr(b, e - b + 1));
    }
    return out;
}

struct Common {
    std::string stoplist_path;

    Stoplist stoplist() const
    {
        return stoplist_path.empty() ? Stoplist::default_list() : Stoplist::from_file(stoplist_path);
    }
};

// ---------------------------------------------------------------------------
// ingest

struct IngestArgs {
    std::string posts;
    std::string format = "xml";
    std::string tag;
    std::string out;
    unsigned threads = 0;
    bool no_meta = false;
};

int run_ingest(const IngestArgs& a, const Common& common)
{
    auto fmt = parse_dump_format(a.format);
    if (!fmt)
        throw Error(ErrorCode::InvalidArgument, "unknown --format " + a.format + " (expected xml or jsonl)");
    auto parsed = parse_dump_file(a.posts, *fmt);
    std::vector<QAPair> pairs;
    if (a.tag.empty()) {
        pairs = std::move(parsed.pairs);
    } else {
        std::string tag = to_lower(a.tag);
        for (auto& p : parsed.pairs)
            if (p.tags.count(tag))
                pairs.push_back(std::move(p));
    }
    IndexMeta meta;
    meta.source_digest = sha256_file_hex(a.posts);
    if (!a.no_meta)
        meta.built_at = utc_timestamp_now();
    KeywordApiIndex index(build_associations(pairs, common.stoplist(), a.threads), meta);
    save_index(index, a.out);
    std::cout << "pairs " << pairs.size() << "\n"
              << "keywords " << index.entries().size() << "\n"
              << "records " << index.record_count() << "\n"
              << "warnings " << parsed.warnings << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// suggest / suggest-from

struct SuggestArgs {
    std::string query;
    std::string index;
    std::size_t top = kDefaultSuggestions;
    std::size_t window = kDefaultCoherenceWindow;
    bool json = false;
};

void print_suggestion(const Suggestion& s, bool as_json)
{
    if (as_json) {
        std::cout << render_reformulate(s) << "\n";
        return;
    }
    std::cout << "keywords:";
    for (const auto& k : s.query.keywords)
        std::cout << " " << k;
    std::cout << "\n";
    std::size_t width = 3;
    for (const auto& c : s.candidates)
        width = std::max(width, c.api.size());
    std::cout << std::left << std::setw(5) << "#" << std::setw(static_cast<int>(width) + 2) << "api"
              << std::setw(6) << "KAC" << std::setw(6) << "KKC"
              << "Relevance\n";
    for (std::size_t i = 0; i < s.candidates.size(); ++i) {
        const auto& c = s.candidates[i];
        std::cout << std::left << std::setw(5) << i + 1 << std::setw(static_cast<int>(width) + 2) << c.api
                  << std::setw(6) << fixed2(c.kac) << std::setw(6) << fixed2(c.kkc) << fixed2(c.relevance)
                  << "\n";
    }
}

Suggestion run_suggest_query(const SuggestArgs& a, const std::string& query, const Common& common)
{
    auto index = load_index(a.index);
    SuggestOptions opts;
    opts.top = a.top;
    opts.coherence_window = a.window;
    return suggest(index, query, common.stoplist(), opts);
}

int run_suggest(const SuggestArgs& a, const Common& common)
{
    print_suggestion(run_suggest_query(a, a.query, common), a.json);
    return kExitOk;
}

struct SuggestFromArgs {
    SuggestArgs base;
    std::string file;
    std::size_t line = 0;
};

int run_suggest_from(const SuggestFromArgs& a, const Common& common)
{
    std::string query = extract_comment_query(read_file(a.file), a.line);
    if (!a.base.json)
        std::cout << "query: " << query << "\n";
    print_suggestion(run_suggest_query(a.base, query, common), a.base.json);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// search

struct SearchArgs {
    std::string query;
    std::string apis;
    std::string index;
    std::string corpus;
    bool remote = false;
    std::string replay;
    std::string orgs;
    std::string api_base;
    std::size_t k = 10;
    bool top1 = false;
    std::size_t files = 10;
    double host_weight = 0.5;
    bool json = false;
};

void print_search(const RankResult& r)
{
    if (!r.notice.empty())
        std::cout << "notice: " << r.notice << "\n";
    for (const auto& f : r.partial_files)
        std::cout << "warning: unbalanced braces in " << f << "; methods after the error were skipped\n";
    for (std::size_t i = 0; i < r.results.size(); ++i) {
        const auto& s = r.results[i];
        std::cout << i + 1 << ". " << s.repo << "/" << s.path << ":" << s.snippet.start_line << "-"
                  << s.snippet.end_line << "  " << s.snippet.name << "  combined " << fixed2(s.combined)
                  << "  similarity " << fixed2(s.similarity) << "  host #" << s.host_rank << "\n";
        std::cout << "   matched:";
        for (const auto& m : s.matched_keywords)
            std::cout << " " << m;
        std::cout << "\n";
        std::istringstream body(s.snippet.body);
        std::string line;
        while (std::getline(body, line))
            std::cout << "   | " << line << "\n";
    }
}

int run_search(const SearchArgs& a, const Common& common)
{
    Stoplist stoplist = common.stoplist();
    std::vector<std::string> apis = split_csv(a.apis);
    if (apis.empty() && !a.index.empty()) {
        // No explicit selection: take the top suggestions.
        SuggestOptions opts;
        opts.top = 3;
        for (const auto& c : suggest(load_index(a.index), a.query, stoplist, opts).candidates)
            apis.push_back(c.api);
    }
    if (apis.empty())
        throw Error(ErrorCode::NoApis, "no API classes selected (use --apis or --index)");

    std::unique_ptr<CorpusBackend> backend;
    if (a.remote) {
        RemoteConfig rc;
        if (!a.orgs.empty())
            rc.orgs = split_csv(a.orgs);
        if (!a.api_base.empty())
            rc.api_base = a.api_base;
        if (const char* tok = std::getenv("RACK_CODE_TOKEN"))
            rc.token = tok;
        std::shared_ptr<HttpTransport> transport;
        if (!a.replay.empty())
            transport = ReplayTransport::from_file(a.replay);
        else
            transport = make_https_transport(std::chrono::milliseconds(2000));
        backend = std::make_unique<RemoteBackend>(std::move(rc), std::move(transport));
    } else {
        backend = std::make_unique<LocalCorpusIndex>(LocalCorpusIndex::build(a.corpus));
    }

    RankOptions opts;
    opts.k = a.top1 ? 1 : a.k;
    opts.host_weight = a.host_weight;
    auto hits = backend->search(apis, a.files);
    auto result = rank_snippets(hits, Query::parse(a.query, stoplist), apis, opts);
    if (a.json)
        std::cout << render_search(result) << "\n";
    else
        print_search(result);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
    std::string gold;
    std::string index;
    std::size_t top = 10;
    bool json = false;
};

int run_eval(const EvalArgs& a, const Common& common)
{
    auto gold = load_gold_set(a.gold);
    auto report = evaluate(load_index(a.index), common.stoplist(), gold, a.top);
    if (a.json) {
        json per = json::array();
        for (const auto& o : report.outcomes)
            per.push_back({{"query", o.query}, {"first_gold_rank", o.first_gold_rank}, {"suggested", o.suggested}});
        json out{{"top", report.top},       {"queries", report.queries}, {"hits", report.hits},
                 {"hit_rate", report.hit_rate}, {"mrr", report.mrr},     {"outcomes", per}};
        std::cout << out.dump() << "\n";
        return kExitOk;
    }
    for (const auto& o : report.outcomes)
        std::cout << (o.first_gold_rank ? "hit  @" + std::to_string(o.first_gold_rank) : std::string("miss   "))
                  << "  " << o.query << "\n";
    std::cout << "queries " << report.queries << "\n"
              << "hit@" << report.top << " " << fixed2(report.hit_rate) << "\n"
              << "mrr " << std::fixed << std::setprecision(4) << report.mrr << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// serve

struct ServeArgs {
    std::string config;
    std::string index;
    std::string corpus;
    std::string listen;
    std::string static_dir;
    bool enforce_budgets = false;
};

int run_serve(const ServeArgs& a, const Common& common)
{
    ServiceConfig cfg = a.config.empty() ? ServiceConfig{} : ServiceConfig::from_file(a.config);
    if (!a.index.empty())
        cfg.index_path = a.index;
    if (!a.corpus.empty()) {
        cfg.backend = "local";
        cfg.corpus_dir = a.corpus;
    }
    if (!a.listen.empty()) {
        auto colon = a.listen.rfind(':');
        if (colon == std::string::npos)
            throw Error(ErrorCode::InvalidArgument, "--listen must be host:port");
        cfg.listen_host = a.listen.substr(0, colon);
        cfg.port = std::atoi(a.listen.c_str() + colon + 1);
    }
    if (!a.static_dir.empty())
        cfg.static_dir = a.static_dir;
    if (a.enforce_budgets)
        cfg.enforce_budgets = true;
    if (!common.stoplist_path.empty())
        cfg.stoplist_path = common.stoplist_path;
    cfg.validate();

    Stoplist stoplist =
        cfg.stoplist_path.empty() ? Stoplist::default_list() : Stoplist::from_file(cfg.stoplist_path);

    // Signals are taken synchronously by a watcher thread.
    sigset_t sigs;
    sigemptyset(&sigs);
    sigaddset(&sigs, SIGINT);
    sigaddset(&sigs, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &sigs, nullptr);

    auto service = std::make_shared<Service>(cfg, std::move(stoplist));
    service->load();
    HttpServer server(service);
    int port = server.bind(cfg.listen_host, cfg.port);
    std::cout << "listening on http://" << cfg.listen_host << ":" << port << std::endl;

    std::thread watcher([&server, sigs] {
        int sig = 0;
        sigwait(&sigs, &sig);
        server.stop();
    });
    server.listen();
    // listen() may return without a signal (e.g. socket failure); wake the watcher.
    pthread_kill(watcher.native_handle(), SIGTERM);
    watcher.join();
    return kExitOk;
}

int exit_code_for(const Error& e)
{
    return is_environment_error(e.code()) ? kExitEnvironment : kExitUsage;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"rack: API-class query reformulation and code snippet search"};
    app.require_subcommand(1);
    Common common;
    app.add_option("--stoplist", common.stoplist_path, "Stop-word file (one per line)")->check(CLI::ExistingFile);

    IngestArgs ingest;
    auto* c_ingest = app.add_subcommand("ingest", "Build a keyword-API index from a Q&A dump");
    c_ingest->add_option("--posts", ingest.posts, "Posts.xml subset or JSONL dump")->required()->check(CLI::ExistingFile);
    c_ingest->add_option("--format", ingest.format, "xml or jsonl")->check(CLI::IsMember({"xml", "jsonl"}));
    c_ingest->add_option("--tag", ingest.tag, "Keep only questions carrying this tag");
    c_ingest->add_option("--out", ingest.out, "Index file to write")->required();
    c_ingest->add_option("--threads", ingest.threads, "Worker threads (0 = all cores)");
    c_ingest->add_flag("--no-meta", ingest.no_meta, "Omit the build timestamp");

    SuggestArgs sug;
    auto* c_suggest = app.add_subcommand("suggest", "Suggest API classes for a query");
    c_suggest->add_option("query", sug.query, "Natural-language query")->required();
    c_suggest->add_option("--index", sug.index)->required()->check(CLI::ExistingFile);
    c_suggest->add_option("--top", sug.top)->check(CLI::PositiveNumber);
    c_suggest->add_option("--window", sug.window, "Top-m list size for coherence")->check(CLI::PositiveNumber);
    c_suggest->add_flag("--json", sug.json);

    SuggestFromArgs from;
    auto* c_from = app.add_subcommand("suggest-from", "Suggest API classes for the comment above a line");
    c_from->add_option("--file", from.file)->required()->check(CLI::ExistingFile);
    c_from->add_option("--line", from.line, "1-based line number")->required()->check(CLI::PositiveNumber);
    c_from->add_option("--index", from.base.index)->required()->check(CLI::ExistingFile);
    c_from->add_option("--top", from.base.top)->check(CLI::PositiveNumber);
    c_from->add_option("--window", from.base.window)->check(CLI::PositiveNumber);
    c_from->add_flag("--json", from.base.json);

    SearchArgs srch;
    auto* c_search = app.add_subcommand("search", "Search code snippets for selected API classes");
    c_search->add_option("query", srch.query)->required();
    c_search->add_option("--apis", srch.apis, "Comma-separated API classes");
    c_search->add_option("--index", srch.index, "Used to pick APIs when --apis is omitted")
        ->check(CLI::ExistingFile);
    auto* o_corpus = c_search->add_option("--corpus", srch.corpus, "Local corpus directory")
                         ->check(CLI::ExistingDirectory);
    auto* o_remote = c_search->add_flag("--remote", srch.remote, "Use the remote code-search backend");
    o_corpus->excludes(o_remote);
    c_search->add_option("--replay", srch.replay, "Serve remote responses from a recorded fixture")
        ->needs(o_remote)
        ->check(CLI::ExistingFile);
    c_search->add_option("--orgs", srch.orgs, "Comma-separated organizations (remote)")->needs(o_remote);
    c_search->add_option("--api-base", srch.api_base)->needs(o_remote);
    auto* o_k = c_search->add_option("--k", srch.k, "Top-K")->check(CLI::PositiveNumber);
    c_search->add_flag("--top1", srch.top1, "Top-1 search")->excludes(o_k);
    c_search->add_option("--files", srch.files, "Files fetched from the backend")->check(CLI::PositiveNumber);
    c_search->add_option("--host-weight", srch.host_weight)->check(CLI::Range(0.0, 1.0));
    c_search->add_flag("--json", srch.json);

    EvalArgs ev;
    auto* c_eval = app.add_subcommand("eval", "hit@n and MRR over a gold set");
    c_eval->add_option("--gold", ev.gold, "JSONL {query, gold_apis}")->required()->check(CLI::ExistingFile);
    c_eval->add_option("--index", ev.index)->required()->check(CLI::ExistingFile);
    c_eval->add_option("--top", ev.top)->check(CLI::PositiveNumber);
    c_eval->add_flag("--json", ev.json);

    ServeArgs srv;
    auto* c_serve = app.add_subcommand("serve", "Run the HTTP service");
    c_serve->add_option("--config", srv.config)->check(CLI::ExistingFile);
    c_serve->add_option("--index", srv.index);
    c_serve->add_option("--corpus", srv.corpus);
    c_serve->add_option("--listen", srv.listen, "host:port (port 0 = any free port)");
    c_serve->add_option("--static", srv.static_dir, "Directory served at /");
    c_serve->add_flag("--enforce-budgets", srv.enforce_budgets);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (c_ingest->parsed())
            return run_ingest(ingest, common);
        if (c_suggest->parsed())
            return run_suggest(sug, common);
        if (c_from->parsed())
            return run_suggest_from(from, common);
        if (c_search->parsed()) {
            if (!srch.remote && srch.corpus.empty())
                throw Error(ErrorCode::InvalidArgument, "search needs --corpus <dir> or --remote");
            return run_search(srch, common);
        }
        if (c_eval->parsed())
            return run_eval(ev, common);
        if (c_serve->parsed())
            return run_serve(srv, common);
    } catch (const BackendError& e) {
        std::cerr << "error: " << code_name(e.code()) << ": " << e.what();
        if (e.retry_after())
            std::cerr << " (retry after " << *e.retry_after() << " s)";
        std::cerr << "\n";
        return exit_code_for(e);
    } catch (const Error& e) {
        std::cerr << "error: " << code_name(e.code()) << ": " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitEnvironment;
    }
    return kExitUsage;
}
