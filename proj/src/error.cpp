#include "rack/error.hpp"

namespace rack {

std::string_view code_name(ErrorCode code)
{
    switch (code) {
    case ErrorCode::InvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::Io: return "IO";
    case ErrorCode::EmptyQuery: return "EMPTY_QUERY";
    case ErrorCode::NoWorkingContext: return "NO_WORKING_CONTEXT";
    case ErrorCode::NoApis: return "NO_APIS";
    case ErrorCode::IndexVersion: return "INDEX_VERSION";
    case ErrorCode::IndexChecksum: return "INDEX_CHECKSUM";
    case ErrorCode::IndexFormat: return "INDEX_FORMAT";
    case ErrorCode::Auth: return "AUTH";
    case ErrorCode::RateLimit: return "RATE_LIMIT";
    case ErrorCode::Timeout: return "TIMEOUT";
    case ErrorCode::Network: return "NETWORK";
    case ErrorCode::BackendHttp: return "BACKEND_HTTP";
    case ErrorCode::Budget: return "BUDGET";
    }
    return "UNKNOWN";
}

bool is_environment_error(ErrorCode code)
{
    switch (code) {
    case ErrorCode::Io:
    case ErrorCode::IndexVersion:
    case ErrorCode::IndexChecksum:
    case ErrorCode::IndexFormat:
    case ErrorCode::Auth:
    case ErrorCode::RateLimit:
    case ErrorCode::Timeout:
    case ErrorCode::Network:
    case ErrorCode::BackendHttp:
    case ErrorCode::Budget:
        return true;
    default:
        return false;
    }
}

}  // namespace rack
