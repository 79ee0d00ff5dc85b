#include <httplib.h>

#include "rack/corpus_search.hpp"
#include "rack/error.hpp"
#include "rack/text.hpp"

namespace rack {
namespace {

class HttpsTransport : public HttpTransport {
public:
    explicit HttpsTransport(std::chrono::milliseconds timeout) : timeout_(timeout) {}

    HttpResponse get(const std::string& url, const HttpHeaders& headers) override
    {
        // scheme://host[:port]/path?query
        auto scheme_end = url.find("://");
        if (scheme_end == std::string::npos)
            throw BackendError(ErrorCode::Network, "malformed URL: " + url);
        auto path_start = url.find('/', scheme_end + 3);
        std::string origin = url.substr(0, path_start);
        std::string target = path_start == std::string::npos ? "/" : url.substr(path_start);

        httplib::Client client(origin);
        auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
        auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - secs);
        client.set_connection_timeout(secs.count(), usecs.count());
        client.set_read_timeout(secs.count(), usecs.count());
        client.set_follow_location(true);

        httplib::Headers h;
        for (const auto& [k, v] : headers)
            h.emplace(k, v);
        auto res = client.Get(target, h);
        if (!res) {
            auto err = res.error();
            ErrorCode code = (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read)
                                 ? ErrorCode::Timeout
                                 : ErrorCode::Network;
            throw BackendError(code, "request to " + origin + " failed: " + httplib::to_string(err));
        }
        HttpResponse out;
        out.status = res->status;
        out.body = std::move(res->body);
        for (const auto& [k, v] : res->headers)
            out.headers.emplace(to_lower(k), v);
        return out;
    }

private:
    std::chrono::milliseconds timeout_;
};

}  // namespace

std::unique_ptr<HttpTransport> make_https_transport(std::chrono::milliseconds timeout)
{
    return std::make_unique<HttpsTransport>(timeout);
}

}  // namespace rack
