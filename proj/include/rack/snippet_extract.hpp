#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "rack/corpus_search.hpp"
#include "rack/reformulator.hpp"

namespace rack {

/// Multiset of normalized tokens.
using TokenBag = std::map<std::string, unsigned>;

struct MethodSnippet {
    std::string name;
    std::size_t start_line = 0;  // 1-based, inclusive
    std::size_t end_line = 0;
    std::string body;  // from the first modifier/annotation to the closing brace
    TokenBag tokens;
};

struct ExtractionResult {
    std::vector<MethodSnippet> methods;  // in source order
    bool partial = false;                // braces did not balance
};

/// Methods and constructors with bodies, found at type-body depth (or at
/// file level, for a bare method). Brace counting ignores comments and
/// literals.
ExtractionResult extract_methods(std::string_view java_source);

/// Identifiers split on camel case and underscores, lowercased, stemmed.
/// Java keywords, literals, operators and tokens shorter than 2 are dropped.
TokenBag tokenize_code(std::string_view code);

/// Cosine similarity of term-frequency vectors; 0 when either bag is empty.
double similarity(const TokenBag& a, const TokenBag& b);

struct SnippetResult {
    std::string repo;
    std::string path;
    std::size_t host_rank = 0;
    double host_score = 0.0;
    MethodSnippet snippet;
    double similarity = 0.0;
    double combined = 0.0;
    std::vector<std::string> matched_keywords;  // sorted
};

struct RankOptions {
    std::size_t k = 10;
    double host_weight = 0.5;  // weight of the normalized host score
};

struct RankResult {
    std::vector<SnippetResult> results;
    std::vector<std::string> partial_files;  // files whose braces did not balance
    std::string notice;                      // "no snippets" when nothing was extracted
};

/// Scores every method of every hit against the query and the selected APIs:
/// combined = w * host/max_host + (1 - w) * similarity. Sorted by combined
/// desc, host rank asc, start line asc; truncated to k (k = 1 is Top-1).
RankResult rank_snippets(const std::vector<FileHit>& hits, const Query& query,
                         const std::vector<std::string>& selected_apis,
                         const RankOptions& options = {});

/// Query-side token set: query keywords plus the tokenized API names.
TokenBag query_tokens(const Query& query, const std::vector<std::string>& selected_apis);

}  // namespace rack
