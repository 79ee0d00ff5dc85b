#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rack {

enum class ErrorCode {
    InvalidArgument,
    Io,
    EmptyQuery,
    NoWorkingContext,
    NoApis,
    IndexVersion,
    IndexChecksum,
    IndexFormat,
    Auth,
    RateLimit,
    Timeout,
    Network,
    BackendHttp,
    Budget,
};

/// Machine-readable name, e.g. "EMPTY_QUERY".
std::string_view code_name(ErrorCode code);

/// True for failures caused by the environment or a backend rather than by
/// the caller's input.
bool is_environment_error(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message) : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Failure reported by a code-search backend.
class BackendError : public Error {
public:
    BackendError(ErrorCode code, const std::string& message,
                 std::optional<int> retry_after_seconds = std::nullopt, int http_status = 0)
        : Error(code, message), retry_after_(retry_after_seconds), http_status_(http_status)
    {
    }

    std::optional<int> retry_after() const noexcept { return retry_after_; }
    int http_status() const noexcept { return http_status_; }

private:
    std::optional<int> retry_after_;
    int http_status_;
};

}  // namespace rack
