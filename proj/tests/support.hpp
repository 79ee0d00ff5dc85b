#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <unistd.h>

#include <nlohmann/json.hpp>

namespace rack::testing {

inline std::string fixture(const std::string& rel)
{
    return std::string(RACK_FIXTURES_DIR) + "/" + rel;
}

inline std::string slurp(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline nlohmann::json load_json(const std::string& path)
{
    return nlohmann::json::parse(slurp(path));
}

// A scratch file path unique to this process.
inline std::string temp_path(const std::string& name)
{
    static const std::string dir = [] {
        auto d = std::filesystem::temp_directory_path() / ("rack_test_" + std::to_string(::getpid()));
        std::filesystem::create_directories(d);
        return d.string();
    }();
    return dir + "/" + name;
}

}  // namespace rack::testing
