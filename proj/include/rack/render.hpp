#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "rack/index_store.hpp"
#include "rack/reformulator.hpp"
#include "rack/snippet_extract.hpp"

namespace rack {

/// Rounded to two decimals for display.
double round2(double x);

nlohmann::json candidate_json(const ApiCandidate& c);
nlohmann::json suggestion_json(const Suggestion& s);
nlohmann::json snippet_json(const SnippetResult& r, std::size_t rank);
nlohmann::json rank_result_json(const RankResult& r);
nlohmann::json index_meta_json(const KeywordApiIndex& index);
nlohmann::json error_json(std::string_view code, std::string_view message);

/// Response bodies shared by the HTTP service and the CLI's --json mode.
std::string render_reformulate(const Suggestion& s);
std::string render_search(const RankResult& r);

}  // namespace rack
