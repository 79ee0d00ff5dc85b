#include "rack/reformulator.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "rack/error.hpp"
#include "rack/java_source.hpp"

namespace rack {

Query Query::parse(std::string_view raw, const Stoplist& stoplist)
{
    return Query{std::string(raw), extract_keywords(raw, stoplist)};
}

std::map<std::string, KacScore> kac_scores(const KeywordApiIndex& index,
                                           const std::vector<std::string>& keywords)
{
    std::map<std::string, KacScore> scores;
    for (const auto& kw : keywords)
        for (const auto& [api, n] : index.lookup(kw))
            scores[api].raw += n;

    std::uint64_t max_raw = 0;
    for (const auto& [_, s] : scores)
        max_raw = std::max(max_raw, s.raw);
    for (auto& [_, s] : scores)
        s.normalized = max_raw == 0 ? 0.0 : static_cast<double>(s.raw) / static_cast<double>(max_raw);
    return scores;
}

std::map<std::string, KkcScore> kkc_scores(const KeywordApiIndex& index,
                                           const std::vector<std::string>& keywords,
                                           const std::set<std::string>& candidates,
                                           std::size_t window)
{
    std::map<std::string, KkcScore> scores;
    for (const auto& a : candidates)
        scores[a];
    if (keywords.size() < 2)
        return scores;

    // An API that sits in the top lists of c keywords is coherent for exactly
    // c*(c-1)/2 keyword pairs.
    std::map<std::string, std::size_t> appearances;
    for (const auto& kw : keywords)
        for (const auto& [api, _] : index.top_apis(kw, window))
            if (candidates.count(api))
                ++appearances[api];

    const double pairs = static_cast<double>(keywords.size() * (keywords.size() - 1) / 2);
    double max_raw = 0.0;
    for (const auto& [api, c] : appearances) {
        auto& s = scores[api];
        s.raw = static_cast<double>(c * (c - 1) / 2) / pairs;
        max_raw = std::max(max_raw, s.raw);
    }
    for (auto& [_, s] : scores)
        s.normalized = max_raw == 0.0 ? 0.0 : s.raw / max_raw;
    return scores;
}

std::vector<ApiCandidate> combine_relevance(std::vector<ApiCandidate> candidates)
{
    double max_raw = 0.0;
    for (const auto& c : candidates)
        max_raw = std::max(max_raw, (c.kac + c.kkc) / 2.0);
    for (auto& c : candidates)
        c.relevance = max_raw == 0.0 ? 0.0 : ((c.kac + c.kkc) / 2.0) / max_raw;

    std::sort(candidates.begin(), candidates.end(), [](const ApiCandidate& a, const ApiCandidate& b) {
        if (a.relevance != b.relevance)
            return a.relevance > b.relevance;
        if (a.kac != b.kac)
            return a.kac > b.kac;
        return a.api < b.api;
    });
    return candidates;
}

Suggestion suggest(const KeywordApiIndex& index, std::string_view raw_query,
                   const Stoplist& stoplist, const SuggestOptions& options)
{
    Suggestion out{Query::parse(raw_query, stoplist), {}};
    if (out.query.keywords.empty())
        throw Error(ErrorCode::EmptyQuery, "query has no keywords after preprocessing");

    auto kac = kac_scores(index, out.query.keywords);
    std::set<std::string> names;
    for (const auto& [api, _] : kac)
        names.insert(api);
    auto kkc = kkc_scores(index, out.query.keywords, names, options.coherence_window);

    std::vector<ApiCandidate> candidates;
    candidates.reserve(kac.size());
    for (const auto& [api, k] : kac) {
        const auto& c = kkc.at(api);
        candidates.push_back(ApiCandidate{api, k.raw, k.normalized, c.raw, c.normalized, 0.0});
    }
    out.candidates = combine_relevance(std::move(candidates));
    if (out.candidates.size() > options.top)
        out.candidates.resize(options.top);
    return out;
}

// ---------------------------------------------------------------------------
// Working context from a source comment

namespace {

std::string collapse_whitespace(std::string_view s)
{
    std::string out;
    bool pending_space = false;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space)
            out.push_back(' ');
        pending_space = false;
        out.push_back(c);
    }
    return out;
}

std::string strip_block_lines(std::string_view text)
{
    std::string joined;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        std::size_t b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos)
            continue;
        while (b < line.size() && line[b] == '*')
            ++b;
        joined.append(line, b).push_back(' ');
    }
    return joined;
}

}  // namespace

std::string extract_comment_query(std::string_view java_source, std::size_t line)
{
    auto lex = lex_java(java_source);
    std::vector<std::string_view> lines;
    {
        std::string_view n = lex.neutralized;
        std::size_t pos = 0;
        while (true) {
            std::size_t nl = n.find('\n', pos);
            lines.push_back(n.substr(pos, nl == std::string_view::npos ? nl : nl - pos));
            if (nl == std::string_view::npos)
                break;
            pos = nl + 1;
        }
    }
    if (line == 0 || line > lines.size())
        throw Error(ErrorCode::InvalidArgument,
                    "line " + std::to_string(line) + " outside file of " +
                        std::to_string(lines.size()) + " lines");

    // Comment covering each line (the last one to start, if several).
    std::vector<const JavaComment*> covering(lines.size() + 1, nullptr);
    for (const auto& c : lex.comments)
        for (std::size_t l = c.start_line; l <= c.end_line && l <= lines.size(); ++l)
            covering[l] = &c;

    auto code_free = [&](std::size_t l) {
        return lines[l - 1].find_first_not_of(" \t\r\f") == std::string_view::npos;
    };
    auto annotation = [&](std::size_t l) {
        auto s = lines[l - 1];
        std::size_t b = s.find_first_not_of(" \t\r\f");
        return b != std::string_view::npos && s[b] == '@';
    };

    std::size_t k = line;
    while (true) {
        if (k == 0)
            throw Error(ErrorCode::NoWorkingContext, "no comment at or above line " + std::to_string(line));
        // a trailing comment counts on the target line or the one above it
        if (covering[k] && (code_free(k) || k + 1 >= line))
            break;
        if (code_free(k) || k == line || annotation(k)) {
            --k;
            continue;
        }
        throw Error(ErrorCode::NoWorkingContext, "no comment at or above line " + std::to_string(line));
    }

    const JavaComment* found = covering[k];
    std::string text;
    if (found->kind == JavaComment::Kind::Block) {
        text = strip_block_lines(found->text);
    } else {
        std::vector<const JavaComment*> run;
        for (std::size_t l = k; l >= 1; --l) {
            const JavaComment* c = covering[l];
            if (!c || c->kind != JavaComment::Kind::Line || (l != k && !code_free(l)))
                break;
            run.push_back(c);
        }
        std::reverse(run.begin(), run.end());
        for (const auto* c : run) {
            std::string_view t = c->text;
            while (!t.empty() && t.front() == '/')
                t.remove_prefix(1);
            text.append(t).push_back(' ');
        }
    }
    text = collapse_whitespace(text);
    if (text.empty())
        throw Error(ErrorCode::NoWorkingContext, "comment above line " + std::to_string(line) + " is empty");
    return text;
}

}  // namespace rack
