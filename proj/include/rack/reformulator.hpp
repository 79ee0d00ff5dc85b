#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "rack/index_store.hpp"
#include "rack/text.hpp"

namespace rack {

struct Query {
    std::string raw;
    std::vector<std::string> keywords;

    static Query parse(std::string_view raw, const Stoplist& stoplist);
};

/// One suggested API class with its co-occurrence (KAC), coherence (KKC)
/// and overall relevance scores. Normalized scores lie in [0, 1].
struct ApiCandidate {
    std::string api;
    std::uint64_t kac_raw = 0;
    double kac = 0.0;
    double kkc_raw = 0.0;
    double kkc = 0.0;
    double relevance = 0.0;
};

struct KacScore {
    std::uint64_t raw = 0;
    double normalized = 0.0;
};

struct KkcScore {
    double raw = 0.0;
    double normalized = 0.0;
};

inline constexpr std::size_t kDefaultCoherenceWindow = 10;
inline constexpr std::size_t kDefaultSuggestions = 10;

/// Keyword-API co-occurrence: raw = sum of the keyword counts for each API,
/// normalized by the maximum raw value.
std::map<std::string, KacScore> kac_scores(const KeywordApiIndex& index,
                                           const std::vector<std::string>& keywords);

/// Keyword-keyword coherence: fraction of keyword pairs for which the API is
/// in the top-`window` list of both keywords, normalized by the maximum.
/// All zero when fewer than two keywords are given.
std::map<std::string, KkcScore> kkc_scores(const KeywordApiIndex& index,
                                           const std::vector<std::string>& keywords,
                                           const std::set<std::string>& candidates,
                                           std::size_t window = kDefaultCoherenceWindow);

/// relevance = mean(kac, kkc) normalized by its maximum; sorted by relevance
/// desc, then kac desc, then API name.
std::vector<ApiCandidate> combine_relevance(std::vector<ApiCandidate> candidates);

struct Suggestion {
    Query query;
    std::vector<ApiCandidate> candidates;
};

struct SuggestOptions {
    std::size_t top = kDefaultSuggestions;
    std::size_t coherence_window = kDefaultCoherenceWindow;
};

/// Full reformulation pipeline. Throws Error(EmptyQuery) when the query has
/// no keywords left after preprocessing.
Suggestion suggest(const KeywordApiIndex& index, std::string_view raw_query,
                   const Stoplist& stoplist, const SuggestOptions& options = {});

/// Text of the comment block ending at or just above `line` (1-based), with
/// delimiters and leading asterisks removed and whitespace collapsed.
/// Throws Error(NoWorkingContext) if there is none.
std::string extract_comment_query(std::string_view java_source, std::size_t line);

}  // namespace rack
