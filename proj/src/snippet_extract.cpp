#include "rack/snippet_extract.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <future>
#include <optional>
#include <set>
#include <thread>

#include "rack/error.hpp"
#include "rack/java_source.hpp"
#include "rack/text.hpp"

namespace rack {
namespace {

bool ident_start(char c)
{
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

bool ident_char(char c)
{
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

bool space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

constexpr std::string_view kModifiers[] = {
    "public", "protected", "private", "static", "final", "abstract",
    "synchronized", "native", "strictfp", "default", "transient", "volatile",
};

constexpr std::string_view kTypeWords[] = {
    "void", "boolean", "byte", "char", "short", "int", "long", "float", "double",
    "extends", "super", "final",
};

bool one_of(std::string_view w, const auto& list)
{
    return std::find(std::begin(list), std::end(list), w) != std::end(list);
}

class Cursor {
public:
    explicit Cursor(std::string_view s) : s_(s) {}

    bool done() const { return i_ >= s_.size(); }
    char peek() const { return done() ? '\0' : s_[i_]; }
    std::size_t pos() const { return i_; }
    void seek(std::size_t p) { i_ = p; }
    void skip_ws()
    {
        while (!done() && space(s_[i_]))
            ++i_;
    }
    std::string_view ident()
    {
        if (done() || !ident_start(s_[i_]))
            return {};
        std::size_t b = i_;
        while (!done() && ident_char(s_[i_]))
            ++i_;
        return s_.substr(b, i_ - b);
    }
    // Skips a balanced (...) group starting at the current '('.
    bool skip_parens()
    {
        if (peek() != '(')
            return false;
        int depth = 0;
        while (!done()) {
            char c = s_[i_++];
            if (c == '(')
                ++depth;
            else if (c == ')' && --depth == 0)
                return true;
        }
        return false;
    }
    std::string_view rest() const { return s_.substr(std::min(i_, s_.size())); }

private:
    std::string_view s_;
    std::size_t i_ = 0;
};

void skip_annotations(Cursor& c)
{
    while (true) {
        c.skip_ws();
        if (c.peek() != '@')
            return;
        std::size_t save = c.pos();
        c.seek(c.pos() + 1);
        c.skip_ws();
        if (c.ident() == "interface") {  // "@interface" starts a declaration
            c.seek(save);
            return;
        }
        while (c.peek() == '.') {
            c.seek(c.pos() + 1);
            c.ident();
        }
        c.skip_ws();
        if (c.peek() == '(')
            c.skip_parens();
    }
}

int paren_balance(std::string_view s)
{
    int depth = 0;
    for (char ch : s) {
        if (ch == '(')
            ++depth;
        else if (ch == ')')
            --depth;
    }
    return depth;
}

std::vector<std::string_view> words_outside_parens(std::string_view s)
{
    std::vector<std::string_view> words;
    int depth = 0;
    std::size_t i = 0;
    while (i < s.size()) {
        char ch = s[i];
        if (ch == '(') {
            ++depth;
            ++i;
        } else if (ch == ')') {
            --depth;
            ++i;
        } else if (ident_start(ch)) {
            std::size_t b = i;
            while (i < s.size() && ident_char(s[i]))
                ++i;
            if (depth == 0)
                words.push_back(s.substr(b, i - b));
        } else {
            ++i;
        }
    }
    return words;
}

bool is_type_declaration(std::string_view header)
{
    auto words = words_outside_parens(header);
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (words[i] == "new")
            return false;
        if ((words[i] == "class" || words[i] == "interface" || words[i] == "enum" ||
             words[i] == "record") &&
            i + 1 < words.size()) {
            // "record" is contextual: `void record(int x)` is a method.
            if (words[i] == "record") {
                auto after = header.find(words[i + 1], words[i].data() - header.data() + words[i].size());
                auto open = header.find('(', words[i].data() - header.data());
                if (open != std::string_view::npos && after != std::string_view::npos && open < after)
                    return false;
            }
            return header.find('=') == std::string_view::npos;
        }
    }
    return false;
}

// Name of the method or constructor declared by `header`, if it is one.
std::optional<std::string> method_name(std::string_view header)
{
    if (header.find("->") != std::string_view::npos)
        return std::nullopt;
    Cursor c(header);
    skip_annotations(c);
    std::string_view rest = c.rest();

    std::size_t open = rest.find('(');
    if (open == std::string_view::npos)
        return std::nullopt;
    std::size_t name_end = open;
    while (name_end > 0 && space(rest[name_end - 1]))
        --name_end;
    std::size_t name_start = name_end;
    while (name_start > 0 && ident_char(rest[name_start - 1]))
        --name_start;
    std::string_view name = rest.substr(name_start, name_end - name_start);
    if (name.empty() || !ident_start(name[0]) || is_java_keyword(name))
        return std::nullopt;

    // Modifiers, type parameters and the return type.
    std::string_view prefix = rest.substr(0, name_start);
    for (char ch : prefix)
        if (!(ident_char(ch) || space(ch) || ch == '.' || ch == '<' || ch == '>' || ch == ',' ||
              ch == '?' || ch == '[' || ch == ']' || ch == '&' || ch == '@'))
            return std::nullopt;
    int angle = 0;
    for (char ch : prefix) {
        if (ch == '<')
            ++angle;
        else if (ch == '>' && --angle < 0)
            return std::nullopt;
    }
    if (angle != 0)
        return std::nullopt;
    for (std::size_t i = 0; i < prefix.size();) {
        if (!ident_start(prefix[i])) {
            ++i;
            continue;
        }
        std::size_t b = i;
        while (i < prefix.size() && ident_char(prefix[i]))
            ++i;
        auto w = prefix.substr(b, i - b);
        if (is_java_keyword(w) && !one_of(w, kModifiers) && !one_of(w, kTypeWords))
            return std::nullopt;
    }

    // Parameter list, then optional array dims and throws clause.
    Cursor tail(rest);
    tail.seek(open);
    if (!tail.skip_parens())
        return std::nullopt;
    while (true) {
        tail.skip_ws();
        if (tail.peek() != '[')
            break;
        tail.seek(tail.pos() + 1);
        tail.skip_ws();
        if (tail.peek() != ']')
            return std::nullopt;
        tail.seek(tail.pos() + 1);
    }
    tail.skip_ws();
    if (!tail.done()) {
        if (tail.ident() != "throws")
            return std::nullopt;
        for (char ch : tail.rest())
            if (!(ident_char(ch) || space(ch) || ch == '.' || ch == ',' || ch == '<' || ch == '>' ||
                  ch == '?'))
                return std::nullopt;
    }
    return std::string(name);
}

class LineIndex {
public:
    explicit LineIndex(std::string_view text)
    {
        starts_.push_back(0);
        for (std::size_t i = 0; i < text.size(); ++i)
            if (text[i] == '\n')
                starts_.push_back(i + 1);
    }
    std::size_t line(std::size_t pos) const
    {
        auto it = std::upper_bound(starts_.begin(), starts_.end(), pos);
        return static_cast<std::size_t>(it - starts_.begin());
    }

private:
    std::vector<std::size_t> starts_;
};

std::set<std::string> raw_identifiers(std::string_view text)
{
    std::set<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        if (!ident_char(text[i])) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < text.size() && ident_char(text[j]))
            ++j;
        if (ident_start(text[i]))
            out.emplace(text.substr(i, j - i));
        i = j;
    }
    return out;
}

}  // namespace

ExtractionResult extract_methods(std::string_view source)
{
    enum class Scope { Type, Method, Other };
    struct Frame {
        Scope kind;
        std::size_t header_start;
        std::string name;
        bool resets_segment;
    };

    ExtractionResult result;
    const std::string text = lex_java(source).neutralized;
    const LineIndex lines(text);
    std::vector<Frame> stack;
    std::size_t segment = 0;  // start of the current declaration header

    for (std::size_t i = 0; i < text.size(); ++i) {
        char ch = text[i];
        if (ch == ';') {
            segment = i + 1;
        } else if (ch == '{') {
            bool declaration_level = stack.empty() || stack.back().kind == Scope::Type;
            std::string_view header(text.data() + segment, i - segment);
            std::size_t lead = header.find_first_not_of(" \t\r\n\f");
            std::size_t header_start = lead == std::string_view::npos ? i : segment + lead;
            header = header.substr(std::min(lead, header.size()));

            Frame f{Scope::Other, header_start, {}, true};
            if (declaration_level) {
                if (paren_balance(header) > 0) {
                    f.resets_segment = false;  // array value inside an annotation
                } else if (is_type_declaration(header)) {
                    f.kind = Scope::Type;
                } else if (auto name = method_name(header)) {
                    f.kind = Scope::Method;
                    f.name = std::move(*name);
                }
            }
            stack.push_back(std::move(f));
            if (stack.back().resets_segment)
                segment = i + 1;
        } else if (ch == '}') {
            if (stack.empty()) {
                result.partial = true;
                return result;
            }
            Frame f = std::move(stack.back());
            stack.pop_back();
            if (f.kind == Scope::Method) {
                MethodSnippet m;
                m.name = std::move(f.name);
                m.start_line = lines.line(f.header_start);
                m.end_line = lines.line(i);
                m.body = std::string(source.substr(f.header_start, i + 1 - f.header_start));
                m.tokens = tokenize_code(m.body);
                result.methods.push_back(std::move(m));
            }
            if (f.resets_segment)
                segment = i + 1;
        }
    }
    if (!stack.empty())
        result.partial = true;
    std::sort(result.methods.begin(), result.methods.end(),
              [](const MethodSnippet& a, const MethodSnippet& b) { return a.start_line < b.start_line; });
    return result;
}

TokenBag tokenize_code(std::string_view code)
{
    TokenBag bag;
    const std::string text = lex_java(code).neutralized;
    std::size_t i = 0;
    while (i < text.size()) {
        if (!ident_char(text[i])) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < text.size() && ident_char(text[j]))
            ++j;
        std::string_view word(text.data() + i, j - i);
        bool numeric = std::isdigit(static_cast<unsigned char>(word[0])) != 0;
        i = j;
        if (numeric || is_java_keyword(word))
            continue;
        for (const auto& part : split_words(word)) {
            std::string stem = porter_stem(to_lower(part));
            if (stem.size() >= 2)
                ++bag[stem];
        }
    }
    return bag;
}

double similarity(const TokenBag& a, const TokenBag& b)
{
    if (a.empty() || b.empty())
        return 0.0;
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (const auto& [t, n] : a) {
        na += double(n) * n;
        if (auto it = b.find(t); it != b.end())
            dot += double(n) * it->second;
    }
    for (const auto& [_, n] : b)
        nb += double(n) * n;
    if (dot == 0.0)
        return 0.0;
    return std::min(1.0, dot / (std::sqrt(na) * std::sqrt(nb)));
}

TokenBag query_tokens(const Query& query, const std::vector<std::string>& selected_apis)
{
    TokenBag out;
    for (const auto& k : query.keywords)
        out[k] = 1;
    for (const auto& api : selected_apis)
        for (const auto& [t, _] : tokenize_code(api))
            out[t] = 1;
    return out;
}

RankResult rank_snippets(const std::vector<FileHit>& hits, const Query& query,
                         const std::vector<std::string>& selected_apis, const RankOptions& options)
{
    if (options.k == 0)
        throw Error(ErrorCode::InvalidArgument, "k must be at least 1");
    if (options.host_weight < 0.0 || options.host_weight > 1.0)
        throw Error(ErrorCode::InvalidArgument, "host weight must lie in [0, 1]");

    RankResult out;
    const TokenBag qtokens = query_tokens(query, selected_apis);
    const std::set<std::string> keywords(query.keywords.begin(), query.keywords.end());
    double max_host = 0.0;
    for (const auto& h : hits)
        max_host = std::max(max_host, h.host_score);

    auto score_file = [&](const FileHit& hit) {
        std::vector<SnippetResult> rows;
        auto extracted = extract_methods(hit.content);
        double norm_host = max_host > 0.0 ? hit.host_score / max_host : 0.0;
        for (auto& m : extracted.methods) {
            SnippetResult r;
            r.repo = hit.repo;
            r.path = hit.path;
            r.host_rank = hit.host_rank;
            r.host_score = hit.host_score;
            r.similarity = similarity(qtokens, m.tokens);
            r.combined = options.host_weight * norm_host + (1.0 - options.host_weight) * r.similarity;
            std::set<std::string> matched;
            for (const auto& k : keywords)
                if (m.tokens.count(k))
                    matched.insert(k);
            auto idents = raw_identifiers(m.body);
            for (const auto& api : selected_apis)
                if (idents.count(api))
                    matched.insert(api);
            r.matched_keywords.assign(matched.begin(), matched.end());
            r.snippet = std::move(m);
            rows.push_back(std::move(r));
        }
        return std::make_pair(std::move(rows), extracted.partial);
    };

    std::vector<std::future<std::pair<std::vector<SnippetResult>, bool>>> jobs;
    jobs.reserve(hits.size());
    bool parallel = hits.size() > 1 && std::thread::hardware_concurrency() > 1;
    for (const auto& h : hits)
        jobs.push_back(std::async(parallel ? std::launch::async : std::launch::deferred, score_file,
                                  std::cref(h)));
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        auto [rows, partial] = jobs[i].get();
        if (partial)
            out.partial_files.push_back(hits[i].path);
        for (auto& r : rows)
            out.results.push_back(std::move(r));
    }

    if (out.results.empty()) {
        out.notice = "no snippets";
        return out;
    }
    std::sort(out.results.begin(), out.results.end(), [](const SnippetResult& a, const SnippetResult& b) {
        if (a.combined != b.combined)
            return a.combined > b.combined;
        if (a.host_rank != b.host_rank)
            return a.host_rank < b.host_rank;
        return a.snippet.start_line < b.snippet.start_line;
    });
    if (out.results.size() > options.k)
        out.results.resize(options.k);
    return out;
}

}  // namespace rack
