#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace rack {

/// A source file returned by a code-search backend.
struct FileHit {
    std::string repo;
    std::string path;
    std::string content;
    double host_score = 0.0;
    std::size_t host_rank = 0;  // 1-based, unique per result set
};

/// Contract shared by the local and remote backends.
class CorpusBackend {
public:
    virtual ~CorpusBackend() = default;
    /// Throws Error(InvalidArgument) when `api_terms` is empty.
    virtual std::vector<FileHit> search(const std::vector<std::string>& api_terms,
                                        std::size_t limit) const = 0;
};

// ---------------------------------------------------------------------------
// Local backend

/// In-memory index over a directory tree of .java files.
class LocalCorpusIndex : public CorpusBackend {
public:
    /// Reads every *.java file below `corpus_dir` (recursively).
    static LocalCorpusIndex build(const std::filesystem::path& corpus_dir, unsigned threads = 0);

    std::size_t file_count() const { return files_.size(); }
    const std::string& name() const { return name_; }

    /// host_score = matched distinct terms / distinct terms; files scoring 0
    /// are excluded; ties by path ascending.
    std::vector<FileHit> search(const std::vector<std::string>& api_terms,
                                std::size_t limit) const override;

private:
    struct File {
        std::string path;  // relative to the corpus root, '/' separated
        std::string content;
    };
    std::string name_;
    std::vector<File> files_;  // sorted by path
    std::unordered_map<std::string, std::vector<std::uint32_t>> postings_;
};

// ---------------------------------------------------------------------------
// Remote backend

struct HttpResponse {
    int status = 0;
    std::multimap<std::string, std::string> headers;  // lowercase names
    std::string body;

    std::string header(std::string_view name) const;
};

using HttpHeaders = std::vector<std::pair<std::string, std::string>>;

/// Blocking HTTP GET. Transport failures are reported as BackendError
/// (Network or Timeout).
class HttpTransport {
public:
    virtual ~HttpTransport() = default;
    virtual HttpResponse get(const std::string& url, const HttpHeaders& headers) = 0;
};

/// Real HTTPS transport.
std::unique_ptr<HttpTransport> make_https_transport(std::chrono::milliseconds timeout);

/// Serves recorded exchanges from a JSON fixture:
/// {"exchanges": [{"url": ..., "status": ..., "headers": {...}, "body": "..."}]}
/// (a "body_json" value is serialized as the body). Unknown URLs yield 404.
class ReplayTransport : public HttpTransport {
public:
    static std::unique_ptr<ReplayTransport> from_file(const std::string& path);
    explicit ReplayTransport(std::map<std::string, HttpResponse> responses)
        : responses_(std::move(responses))
    {
    }
    HttpResponse get(const std::string& url, const HttpHeaders& headers) override;
    std::vector<std::string> requested_urls() const;

private:
    std::map<std::string, HttpResponse> responses_;
    mutable std::mutex mutex_;
    std::vector<std::string> requested_;
};

/// Serializes outgoing requests through a token bucket.
class TokenBucket {
public:
    TokenBucket(double tokens_per_second, double burst);
    void acquire();

private:
    std::mutex mutex_;
    double rate_;
    double burst_;
    double tokens_;
    std::chrono::steady_clock::time_point last_;
};

struct RemoteConfig {
    std::string api_base = "https://api.github.com";
    std::vector<std::string> orgs = {"apache", "eclipse", "google", "facebook"};
    std::string token;  // usually from RACK_CODE_TOKEN
    std::size_t max_concurrent_fetches = 8;
    double requests_per_second = 10.0;
    double burst = 10.0;
};

std::string url_encode(std::string_view s);

/// Code search over the host's REST code-search endpoint.
class RemoteBackend : public CorpusBackend {
public:
    RemoteBackend(RemoteConfig config, std::shared_ptr<HttpTransport> transport);

    /// Throws BackendError(Auth | RateLimit | Timeout | Network | BackendHttp).
    std::vector<FileHit> search(const std::vector<std::string>& api_terms,
                                std::size_t limit) const override;

    std::string search_url(const std::vector<std::string>& api_terms, std::size_t limit) const;

private:
    HttpResponse request(const std::string& url, bool raw) const;

    RemoteConfig config_;
    std::shared_ptr<HttpTransport> transport_;
    std::shared_ptr<TokenBucket> gate_;
};

}  // namespace rack
