#include "rack/render.hpp"

#include <cmath>

namespace rack {

using nlohmann::json;

double round2(double x)
{
    return std::round(x * 100.0) / 100.0;
}

json candidate_json(const ApiCandidate& c)
{
    return json{
        {"api", c.api},
        {"kac", round2(c.kac)},
        {"kkc", round2(c.kkc)},
        {"relevance", round2(c.relevance)},
        {"precise",
         {{"kac_raw", c.kac_raw},
          {"kac", c.kac},
          {"kkc_raw", c.kkc_raw},
          {"kkc", c.kkc},
          {"relevance", c.relevance}}},
    };
}

json suggestion_json(const Suggestion& s)
{
    json candidates = json::array();
    for (const auto& c : s.candidates)
        candidates.push_back(candidate_json(c));
    return json{{"keywords", s.query.keywords}, {"candidates", std::move(candidates)}};
}

json snippet_json(const SnippetResult& r, std::size_t rank)
{
    return json{
        {"rank", rank},
        {"repo", r.repo},
        {"path", r.path},
        {"method", r.snippet.name},
        {"start_line", r.snippet.start_line},
        {"end_line", r.snippet.end_line},
        {"host_rank", r.host_rank},
        {"similarity", round2(r.similarity)},
        {"combined", round2(r.combined)},
        {"matched_keywords", r.matched_keywords},
        {"body", r.snippet.body},
        {"precise",
         {{"host_score", r.host_score}, {"similarity", r.similarity}, {"combined", r.combined}}},
    };
}

json rank_result_json(const RankResult& r)
{
    json results = json::array();
    for (std::size_t i = 0; i < r.results.size(); ++i)
        results.push_back(snippet_json(r.results[i], i + 1));
    json out{{"results", std::move(results)}};
    if (!r.notice.empty())
        out["notice"] = r.notice;
    if (!r.partial_files.empty())
        out["partial_files"] = r.partial_files;
    return out;
}

json index_meta_json(const KeywordApiIndex& index)
{
    const auto& meta = index.meta();
    return json{
        {"record_count", meta.record_count},
        {"keyword_count", index.entries().size()},
        {"source_digest", meta.source_digest},
        {"built_at", meta.built_at},
    };
}

json error_json(std::string_view code, std::string_view message)
{
    return json{{"error", {{"code", code}, {"message", message}}}};
}

std::string render_reformulate(const Suggestion& s)
{
    return suggestion_json(s).dump();
}

std::string render_search(const RankResult& r)
{
    return rank_result_json(r).dump();
}

}  // namespace rack
