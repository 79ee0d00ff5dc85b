#include "rack/index_store.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>

#include <openssl/evp.h>

#include "rack/error.hpp"

namespace rack {
namespace {

constexpr std::string_view kHeader = "RACKIDX 1";

const ApiCounts& empty_counts()
{
    static const ApiCounts empty;
    return empty;
}

class Sha256 {
public:
    Sha256() : ctx_(EVP_MD_CTX_new(), &EVP_MD_CTX_free)
    {
        if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1)
            throw Error(ErrorCode::Io, "sha256 unavailable");
    }
    void update(std::string_view data) { EVP_DigestUpdate(ctx_.get(), data.data(), data.size()); }
    std::string hex()
    {
        unsigned char md[EVP_MAX_MD_SIZE];
        unsigned int n = 0;
        EVP_DigestFinal_ex(ctx_.get(), md, &n);
        static constexpr char digits[] = "0123456789abcdef";
        std::string out;
        for (unsigned i = 0; i < n; ++i) {
            out.push_back(digits[md[i] >> 4]);
            out.push_back(digits[md[i] & 0xF]);
        }
        return out;
    }

private:
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

bool valid_field(std::string_view s)
{
    return !s.empty() && s.find_first_of("\t\n\r") == std::string_view::npos;
}

}  // namespace

KeywordApiIndex::KeywordApiIndex(AssociationTable entries, IndexMeta meta)
    : entries_(std::move(entries)), meta_(std::move(meta))
{
    std::uint64_t records = 0;
    for (auto it = entries_.begin(); it != entries_.end();) {
        auto& apis = it->second;
        std::erase_if(apis, [](const auto& kv) { return kv.second == 0; });
        if (apis.empty()) {
            it = entries_.erase(it);
        } else {
            records += apis.size();
            ++it;
        }
    }
    meta_.record_count = records;
}

std::set<std::string> KeywordApiIndex::vocabulary() const
{
    std::set<std::string> out;
    for (const auto& [kw, _] : entries_)
        out.insert(kw);
    return out;
}

std::set<std::string> KeywordApiIndex::api_universe() const
{
    std::set<std::string> out;
    for (const auto& [_, apis] : entries_)
        for (const auto& [api, __] : apis)
            out.insert(api);
    return out;
}

const ApiCounts& KeywordApiIndex::lookup(std::string_view keyword) const
{
    auto it = entries_.find(std::string(keyword));
    return it == entries_.end() ? empty_counts() : it->second;
}

std::vector<std::pair<std::string, std::uint64_t>> KeywordApiIndex::top_apis(
    std::string_view keyword, std::size_t m) const
{
    const auto& counts = lookup(keyword);
    std::vector<std::pair<std::string, std::uint64_t>> out(counts.begin(), counts.end());
    auto by_count = [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    };
    if (m < out.size()) {
        std::partial_sort(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(m), out.end(),
                          by_count);
        out.resize(m);
    } else {
        std::sort(out.begin(), out.end(), by_count);
    }
    return out;
}

std::string serialize_index(const KeywordApiIndex& index)
{
    std::string out;
    out.append(kHeader).push_back('\n');
    const auto& meta = index.meta();
    if (meta.source_digest.find_first_of("\n\r") != std::string::npos ||
        meta.built_at.find_first_of("\n\r") != std::string::npos)
        throw Error(ErrorCode::InvalidArgument, "index metadata must be single-line");
    if (!meta.source_digest.empty())
        out.append("# source ").append(meta.source_digest).push_back('\n');
    if (!meta.built_at.empty())
        out.append("# built ").append(meta.built_at).push_back('\n');
    for (const auto& [kw, apis] : index.entries()) {
        if (!valid_field(kw) || kw[0] == '#')
            throw Error(ErrorCode::InvalidArgument, "keyword not serializable: " + kw);
        for (const auto& [api, n] : apis) {
            if (!valid_field(api))
                throw Error(ErrorCode::InvalidArgument, "api not serializable: " + api);
            out.append(kw).push_back('\t');
            out.append(api).push_back('\t');
            out.append(std::to_string(n)).push_back('\n');
        }
    }
    std::string digest = sha256_hex(out);
    out.append(digest).push_back('\n');
    return out;
}

KeywordApiIndex deserialize_index(std::string_view bytes)
{
    if (bytes.substr(0, kHeader.size()) != kHeader ||
        (bytes.size() > kHeader.size() && bytes[kHeader.size()] != '\n'))
        throw Error(ErrorCode::IndexVersion, "not a RACKIDX 1 file (unsupported version or format)");

    // Trailing line: 64 lowercase hex digits + LF.
    if (bytes.size() < kHeader.size() + 1 + 65 || bytes.back() != '\n')
        throw Error(ErrorCode::IndexChecksum, "index truncated: missing checksum line");
    std::string_view body = bytes.substr(0, bytes.size() - 65);
    std::string_view stored = bytes.substr(bytes.size() - 65, 64);
    if (body.back() != '\n' ||
        !std::all_of(stored.begin(), stored.end(),
                     [](char c) { return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'); }))
        throw Error(ErrorCode::IndexChecksum, "index truncated: malformed checksum line");
    if (sha256_hex(body) != stored)
        throw Error(ErrorCode::IndexChecksum, "index checksum mismatch");

    AssociationTable entries;
    IndexMeta meta;
    std::size_t pos = kHeader.size() + 1;
    std::size_t line_no = 1;
    std::optional<std::pair<std::string, std::string>> prev;
    while (pos < body.size()) {
        std::size_t nl = body.find('\n', pos);
        std::string_view line = body.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        auto bad = [&](const std::string& why) {
            return Error(ErrorCode::IndexFormat,
                         "index line " + std::to_string(line_no) + ": " + why);
        };
        if (!line.empty() && line[0] == '#') {
            if (line.rfind("# source ", 0) == 0)
                meta.source_digest = std::string(line.substr(9));
            else if (line.rfind("# built ", 0) == 0)
                meta.built_at = std::string(line.substr(8));
            continue;
        }
        std::size_t t1 = line.find('\t');
        std::size_t t2 = t1 == std::string_view::npos ? t1 : line.find('\t', t1 + 1);
        if (t2 == std::string_view::npos || line.find('\t', t2 + 1) != std::string_view::npos)
            throw bad("expected keyword<TAB>api<TAB>count");
        std::string kw(line.substr(0, t1));
        std::string api(line.substr(t1 + 1, t2 - t1 - 1));
        std::string_view count_s = line.substr(t2 + 1);
        std::uint64_t count = 0;
        auto r = std::from_chars(count_s.data(), count_s.data() + count_s.size(), count);
        if (kw.empty() || api.empty() || r.ec != std::errc() ||
            r.ptr != count_s.data() + count_s.size() || count == 0)
            throw bad("invalid record");
        std::pair<std::string, std::string> key{kw, api};
        if (prev && !(*prev < key))
            throw bad("records not sorted or duplicated");
        prev = std::move(key);
        entries[kw][api] = count;
    }
    return KeywordApiIndex(std::move(entries), std::move(meta));
}

void save_index(const KeywordApiIndex& index, const std::string& path)
{
    std::string bytes = serialize_index(index);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(ErrorCode::Io, "cannot write index: " + path);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw Error(ErrorCode::Io, "short write: " + path);
}

KeywordApiIndex load_index(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::Io, "cannot open index: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return deserialize_index(ss.str());
}

std::string sha256_hex(std::string_view bytes)
{
    Sha256 h;
    h.update(bytes);
    return h.hex();
}

std::string sha256_file_hex(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::Io, "cannot open: " + path);
    Sha256 h;
    std::vector<char> buf(1 << 16);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        h.update(std::string_view(buf.data(), static_cast<std::size_t>(in.gcount())));
    }
    return h.hex();
}

std::string utc_timestamp_now()
{
    auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace rack
