#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rack/ingest.hpp"

namespace rack {

struct IndexMeta {
    std::string source_digest;  // sha256 of the dump the index was built from
    std::string built_at;       // ISO-8601 UTC; empty when omitted
    std::uint64_t record_count = 0;

    bool operator==(const IndexMeta&) const = default;
};

using ApiCounts = std::map<std::string, std::uint64_t>;

/// The keyword-API mapping database. Immutable once constructed.
class KeywordApiIndex {
public:
    KeywordApiIndex() = default;
    /// Zero counts are dropped; keywords left without APIs are dropped.
    explicit KeywordApiIndex(AssociationTable entries, IndexMeta meta = {});

    const AssociationTable& entries() const { return entries_; }
    const IndexMeta& meta() const { return meta_; }
    std::size_t record_count() const { return meta_.record_count; }

    std::set<std::string> vocabulary() const;
    std::set<std::string> api_universe() const;

    /// Empty map for unknown keywords.
    const ApiCounts& lookup(std::string_view keyword) const;

    /// APIs by count descending, ties by name ascending, at most `m` items.
    std::vector<std::pair<std::string, std::uint64_t>> top_apis(std::string_view keyword,
                                                                std::size_t m) const;

    bool operator==(const KeywordApiIndex& other) const { return entries_ == other.entries_; }

private:
    AssociationTable entries_;
    IndexMeta meta_;
};

/// Serialized `RACKIDX 1` text: header, optional "# key value" meta lines,
/// sorted keyword<TAB>api<TAB>count rows, then the lowercase sha256 of all
/// preceding bytes on its own line.
std::string serialize_index(const KeywordApiIndex& index);
KeywordApiIndex deserialize_index(std::string_view bytes);

void save_index(const KeywordApiIndex& index, const std::string& path);
/// Throws Error(IndexVersion | IndexChecksum | IndexFormat | Io).
KeywordApiIndex load_index(const std::string& path);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file_hex(const std::string& path);
std::string utc_timestamp_now();

}  // namespace rack
