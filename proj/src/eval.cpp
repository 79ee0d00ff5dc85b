#include "rack/eval.hpp"

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

#include "rack/error.hpp"

namespace rack {

std::vector<GoldQuery> load_gold_set(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::Io, "cannot read gold set: " + path);
    std::vector<GoldQuery> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        auto j = nlohmann::json::parse(line, nullptr, false);
        auto bad = [&] {
            return Error(ErrorCode::InvalidArgument,
                         path + ":" + std::to_string(line_no) + ": expected {\"query\", \"gold_apis\"}");
        };
        if (j.is_discarded() || !j.is_object() || !j.contains("query") || !j["query"].is_string() ||
            !j.contains("gold_apis") || !j["gold_apis"].is_array())
            throw bad();
        GoldQuery g{j["query"].get<std::string>(), {}};
        for (const auto& a : j["gold_apis"]) {
            if (!a.is_string())
                throw bad();
            g.gold_apis.push_back(a.get<std::string>());
        }
        out.push_back(std::move(g));
    }
    if (out.empty())
        throw Error(ErrorCode::InvalidArgument, "gold set is empty: " + path);
    return out;
}

EvalReport evaluate(const KeywordApiIndex& index, const Stoplist& stoplist,
                    const std::vector<GoldQuery>& gold, std::size_t top)
{
    EvalReport report;
    report.top = top;
    double rr_sum = 0.0;
    for (const auto& g : gold) {
        QueryOutcome o{g.query, 0, {}};
        try {
            SuggestOptions opts;
            opts.top = top;
            for (const auto& c : suggest(index, g.query, stoplist, opts).candidates)
                o.suggested.push_back(c.api);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::EmptyQuery)
                throw;
        }
        for (std::size_t i = 0; i < o.suggested.size(); ++i) {
            if (std::find(g.gold_apis.begin(), g.gold_apis.end(), o.suggested[i]) != g.gold_apis.end()) {
                o.first_gold_rank = i + 1;
                break;
            }
        }
        if (o.first_gold_rank > 0) {
            ++report.hits;
            rr_sum += 1.0 / static_cast<double>(o.first_gold_rank);
        }
        report.outcomes.push_back(std::move(o));
    }
    report.queries = gold.size();
    if (report.queries > 0) {
        report.hit_rate = static_cast<double>(report.hits) / static_cast<double>(report.queries);
        report.mrr = rr_sum / static_cast<double>(report.queries);
    }
    return report;
}

}  // namespace rack
