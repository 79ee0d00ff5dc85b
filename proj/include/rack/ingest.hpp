#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "rack/text.hpp"

namespace rack {

/// One question joined to its accepted answer.
struct QAPair {
    std::int64_t question_id = 0;
    std::string title;
    std::set<std::string> tags;
    std::string answer_body;
};

enum class DumpFormat { Xml, Jsonl };

std::optional<DumpFormat> parse_dump_format(std::string_view name);

struct DumpParseResult {
    std::vector<QAPair> pairs;  // ordered by question_id
    std::size_t warnings = 0;
};

/// Reads a Stack Exchange Posts.xml subset or a JSONL dump and joins every
/// question to its accepted answer. Questions whose accepted answer is absent
/// are skipped; malformed records are skipped and counted in `warnings`.
/// Throws Error(Io) if the stream cannot be read.
DumpParseResult parse_dump(std::istream& source, DumpFormat format);
DumpParseResult parse_dump_file(const std::string& path, DumpFormat format);

/// API class names found in the code islands of an answer body
/// (<code>, <pre>, and ``` fenced blocks).
std::set<std::string> extract_api_classes(std::string_view answer_body);

/// CamelCase rule used for API classes: uppercase first, at least one
/// lowercase letter, not blocklisted.
bool looks_like_api_class(std::string_view identifier);

struct AssociationRecord {
    std::string keyword;
    std::string api;
    std::uint64_t count = 0;

    bool operator==(const AssociationRecord&) const = default;
};

/// keyword -> api -> count. Ordered so iteration is deterministic.
using AssociationTable = std::map<std::string, std::map<std::string, std::uint64_t>>;

/// Adds every count of `from` into `into`.
void merge_associations(AssociationTable& into, const AssociationTable& from);

/// Each (keyword, api) pair of a Q&A pair contributes exactly 1.
/// `threads` = 0 picks the hardware concurrency.
AssociationTable build_associations(const std::vector<QAPair>& pairs, const Stoplist& stoplist,
                                    unsigned threads = 0);

std::vector<AssociationRecord> to_records(const AssociationTable& table);

}  // namespace rack
