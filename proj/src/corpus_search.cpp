#include "rack/corpus_search.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <exception>
#include <fstream>
#include <future>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "rack/error.hpp"
#include "rack/text.hpp"

namespace rack {
namespace fs = std::filesystem;

namespace {

bool ident_start(char c)
{
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

bool ident_char(char c)
{
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

std::set<std::string> identifier_tokens(std::string_view text)
{
    std::set<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        if (!ident_char(text[i])) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < text.size() && ident_char(text[j]))
            ++j;
        if (ident_start(text[i]))
            out.emplace(text.substr(i, j - i));
        i = j;
    }
    return out;
}

std::vector<std::string> distinct_terms(const std::vector<std::string>& terms)
{
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& t : terms)
        if (!t.empty() && seen.insert(t).second)
            out.push_back(t);
    return out;
}

std::string read_file(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::Io, "cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// Local backend

LocalCorpusIndex LocalCorpusIndex::build(const fs::path& corpus_dir, unsigned threads)
{
    std::error_code ec;
    if (!fs::is_directory(corpus_dir, ec))
        throw Error(ErrorCode::Io, "corpus directory not found: " + corpus_dir.string());

    std::vector<fs::path> paths;
    for (auto it = fs::recursive_directory_iterator(corpus_dir, ec);
         it != fs::recursive_directory_iterator(); it.increment(ec)) {
        if (ec)
            throw Error(ErrorCode::Io, "cannot walk " + corpus_dir.string() + ": " + ec.message());
        if (it->is_regular_file() && it->path().extension() == ".java")
            paths.push_back(it->path());
    }

    LocalCorpusIndex index;
    index.name_ = fs::weakly_canonical(corpus_dir).filename().string();
    index.files_.resize(paths.size());
    std::vector<std::set<std::string>> tokens(paths.size());

    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < paths.size(); i = next++) {
            auto& f = index.files_[i];
            f.path = fs::relative(paths[i], corpus_dir).generic_string();
            f.content = read_file(paths[i]);
            tokens[i] = identifier_tokens(f.content);
        }
    };
    std::vector<std::future<void>> jobs;
    for (unsigned t = 1; t < std::min<std::size_t>(threads, paths.size()); ++t)
        jobs.push_back(std::async(std::launch::async, worker));
    worker();
    for (auto& j : jobs)
        j.get();

    // Sort by path, then build postings against the sorted order.
    std::vector<std::size_t> order(paths.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return index.files_[a].path < index.files_[b].path; });
    std::vector<File> sorted;
    sorted.reserve(order.size());
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        sorted.push_back(std::move(index.files_[order[rank]]));
        for (const auto& tok : tokens[order[rank]])
            index.postings_[tok].push_back(static_cast<std::uint32_t>(rank));
    }
    index.files_ = std::move(sorted);
    return index;
}

std::vector<FileHit> LocalCorpusIndex::search(const std::vector<std::string>& api_terms,
                                              std::size_t limit) const
{
    auto terms = distinct_terms(api_terms);
    if (terms.empty())
        throw Error(ErrorCode::InvalidArgument, "api_terms must not be empty");

    std::unordered_map<std::uint32_t, std::size_t> matched;
    for (const auto& t : terms) {
        auto it = postings_.find(t);
        if (it == postings_.end())
            continue;
        for (auto file : it->second)
            ++matched[file];
    }

    std::vector<std::pair<std::uint32_t, std::size_t>> ranked(matched.begin(), matched.end());
    std::sort(ranked.begin(), ranked.end(), [&](const auto& a, const auto& b) {
        if (a.second != b.second)
            return a.second > b.second;
        return files_[a.first].path < files_[b.first].path;
    });
    if (ranked.size() > limit)
        ranked.resize(limit);

    std::vector<FileHit> hits;
    hits.reserve(ranked.size());
    for (std::size_t r = 0; r < ranked.size(); ++r) {
        const auto& f = files_[ranked[r].first];
        hits.push_back(FileHit{name_, f.path, f.content,
                               static_cast<double>(ranked[r].second) / static_cast<double>(terms.size()),
                               r + 1});
    }
    return hits;
}

// ---------------------------------------------------------------------------
// Remote backend

std::string HttpResponse::header(std::string_view name) const
{
    auto it = headers.find(std::string(name));
    return it == headers.end() ? std::string() : it->second;
}

std::unique_ptr<ReplayTransport> ReplayTransport::from_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::Io, "cannot open recorded responses: " + path);
    auto doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.contains("exchanges"))
        throw Error(ErrorCode::InvalidArgument, "malformed recorded responses: " + path);
    std::map<std::string, HttpResponse> responses;
    for (const auto& ex : doc["exchanges"]) {
        HttpResponse r;
        r.status = ex.value("status", 200);
        if (ex.contains("headers"))
            for (const auto& [k, v] : ex["headers"].items())
                r.headers.emplace(to_lower(k), v.get<std::string>());
        if (ex.contains("body_json"))
            r.body = ex["body_json"].dump();
        else
            r.body = ex.value("body", std::string());
        responses[ex.at("url").get<std::string>()] = std::move(r);
    }
    return std::make_unique<ReplayTransport>(std::move(responses));
}

HttpResponse ReplayTransport::get(const std::string& url, const HttpHeaders&)
{
    std::lock_guard lock(mutex_);
    requested_.push_back(url);
    auto it = responses_.find(url);
    if (it == responses_.end())
        return HttpResponse{404, {}, R"({"message":"Not Found"})"};
    return it->second;
}

std::vector<std::string> ReplayTransport::requested_urls() const
{
    std::lock_guard lock(mutex_);
    return requested_;
}

TokenBucket::TokenBucket(double tokens_per_second, double burst)
    : rate_(tokens_per_second), burst_(std::max(1.0, burst)), tokens_(burst_),
      last_(std::chrono::steady_clock::now())
{
}

void TokenBucket::acquire()
{
    std::unique_lock lock(mutex_);
    while (true) {
        auto now = std::chrono::steady_clock::now();
        std::chrono::duration<double> dt = now - last_;
        last_ = now;
        tokens_ = std::min(burst_, tokens_ + dt.count() * rate_);
        if (tokens_ >= 1.0) {
            tokens_ -= 1.0;
            return;
        }
        if (rate_ <= 0.0)
            throw BackendError(ErrorCode::RateLimit, "request gate closed");
        auto wait = std::chrono::duration<double>((1.0 - tokens_) / rate_);
        // Holding the lock while sleeping keeps callers strictly serialized.
        std::this_thread::sleep_for(wait);
    }
}

std::string url_encode(std::string_view s)
{
    static constexpr char hex[] = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : s) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
            out.push_back(static_cast<char>(c));
        } else {
            out.push_back('%');
            out.push_back(hex[c >> 4]);
            out.push_back(hex[c & 0xF]);
        }
    }
    return out;
}

RemoteBackend::RemoteBackend(RemoteConfig config, std::shared_ptr<HttpTransport> transport)
    : config_(std::move(config)), transport_(std::move(transport)),
      gate_(std::make_shared<TokenBucket>(config_.requests_per_second, config_.burst))
{
}

std::string RemoteBackend::search_url(const std::vector<std::string>& api_terms,
                                      std::size_t limit) const
{
    std::string q;
    for (const auto& t : distinct_terms(api_terms)) {
        if (!q.empty())
            q.push_back(' ');
        q += t;
    }
    q += " language:java";
    for (const auto& org : config_.orgs)
        q += " org:" + org;
    return config_.api_base + "/search/code?q=" + url_encode(q) +
           "&per_page=" + std::to_string(std::clamp<std::size_t>(limit, 1, 100));
}

HttpResponse RemoteBackend::request(const std::string& url, bool raw) const
{
    gate_->acquire();
    HttpHeaders headers{
        {"Accept", raw ? "application/vnd.github.raw+json" : "application/vnd.github+json"},
        {"Authorization", "Bearer " + config_.token},
        {"User-Agent", "rack-code-search"},
        {"X-GitHub-Api-Version", "2022-11-28"},
    };
    HttpResponse r = transport_->get(url, headers);
    if (r.status >= 200 && r.status < 300)
        return r;

    std::optional<int> retry_after;
    if (auto ra = r.header("retry-after"); !ra.empty())
        retry_after = std::atoi(ra.c_str());
    else if (auto reset = r.header("x-ratelimit-reset"); !reset.empty()) {
        auto now = std::chrono::duration_cast<std::chrono::seconds>(
                       std::chrono::system_clock::now().time_since_epoch())
                       .count();
        retry_after = static_cast<int>(std::max<long long>(0, std::atoll(reset.c_str()) - now));
    }
    bool rate_limited = r.status == 429 ||
                        (r.status == 403 && (r.header("x-ratelimit-remaining") == "0" ||
                                             r.body.find("rate limit") != std::string::npos));
    if (rate_limited)
        throw BackendError(ErrorCode::RateLimit, "code search rate limit exceeded",
                           retry_after.value_or(60), r.status);
    if (r.status == 401)
        throw BackendError(ErrorCode::Auth, "code search rejected the credentials", std::nullopt,
                           r.status);
    throw BackendError(ErrorCode::BackendHttp,
                       "code search returned HTTP " + std::to_string(r.status) + " for " + url,
                       retry_after, r.status);
}

std::vector<FileHit> RemoteBackend::search(const std::vector<std::string>& api_terms,
                                           std::size_t limit) const
{
    if (distinct_terms(api_terms).empty())
        throw Error(ErrorCode::InvalidArgument, "api_terms must not be empty");
    if (config_.token.empty())
        throw BackendError(ErrorCode::Auth, "no code search token (set RACK_CODE_TOKEN)");
    if (limit == 0)
        return {};

    HttpResponse r = request(search_url(api_terms, limit), false);
    auto doc = nlohmann::json::parse(r.body, nullptr, false);
    if (doc.is_discarded() || !doc.contains("items") || !doc["items"].is_array())
        throw BackendError(ErrorCode::BackendHttp, "unexpected code search response", std::nullopt,
                           r.status);

    struct Item {
        std::string repo, path, url;
        std::optional<double> score;
    };
    std::vector<Item> items;
    for (const auto& it : doc["items"]) {
        if (items.size() >= limit)
            break;
        Item item;
        item.path = it.value("path", std::string());
        item.url = it.value("url", std::string());
        if (it.contains("repository") && it["repository"].is_object())
            item.repo = it["repository"].value("full_name", std::string());
        if (it.contains("score") && it["score"].is_number())
            item.score = it["score"].get<double>();
        if (item.url.empty())
            continue;
        items.push_back(std::move(item));
    }

    // Bounded parallel content fetches; results land at their rank slot.
    std::vector<FileHit> hits(items.size());
    std::atomic<std::size_t> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;
    auto worker = [&] {
        for (std::size_t i = next++; i < items.size(); i = next++) {
            try {
                HttpResponse content = request(items[i].url, true);
                double rank = static_cast<double>(i + 1);
                hits[i] = FileHit{items[i].repo, items[i].path, std::move(content.body),
                                  items[i].score.value_or(1.0 / rank), i + 1};
            } catch (...) {
                std::lock_guard lock(err_mutex);
                if (!first_error)
                    first_error = std::current_exception();
            }
        }
    };
    std::size_t workers = std::min(items.size(), std::max<std::size_t>(1, config_.max_concurrent_fetches));
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back(worker);
    for (auto& t : pool)
        t.join();
    if (first_error)
        std::rethrow_exception(first_error);
    return hits;
}

}  // namespace rack
