#pragma once

#include <string>
#include <vector>

#include "rack/index_store.hpp"
#include "rack/reformulator.hpp"

namespace rack {

struct GoldQuery {
    std::string query;
    std::vector<std::string> gold_apis;
};

/// JSONL, one {"query": ..., "gold_apis": [...]} object per line.
/// Throws Error(InvalidArgument) on malformed lines or an empty file.
std::vector<GoldQuery> load_gold_set(const std::string& path);

struct QueryOutcome {
    std::string query;
    std::size_t first_gold_rank = 0;  // 1-based; 0 = no gold API in the top n
    std::vector<std::string> suggested;
};

struct EvalReport {
    std::size_t top = 10;
    std::size_t queries = 0;
    std::size_t hits = 0;
    double hit_rate = 0.0;  // hit@top
    double mrr = 0.0;       // mean reciprocal rank of the first gold API, 0 if absent
    std::vector<QueryOutcome> outcomes;
};

/// Queries that reduce to no keywords count as misses.
EvalReport evaluate(const KeywordApiIndex& index, const Stoplist& stoplist,
                    const std::vector<GoldQuery>& gold, std::size_t top = 10);

}  // namespace rack
