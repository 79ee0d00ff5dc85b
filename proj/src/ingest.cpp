#include "rack/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <future>
#include <thread>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "rack/error.hpp"

namespace rack {
namespace {

// ---------------------------------------------------------------------------
// Entities

void append_utf8(std::string& out, std::uint32_t cp)
{
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

// Unknown entities are copied through verbatim.
std::string decode_entities(std::string_view s)
{
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '&') {
            out.push_back(s[i]);
            continue;
        }
        std::size_t semi = s.find(';', i + 1);
        if (semi == std::string_view::npos || semi - i > 10) {
            out.push_back('&');
            continue;
        }
        std::string_view name = s.substr(i + 1, semi - i - 1);
        bool ok = true;
        if (name == "lt")
            out.push_back('<');
        else if (name == "gt")
            out.push_back('>');
        else if (name == "amp")
            out.push_back('&');
        else if (name == "quot")
            out.push_back('"');
        else if (name == "apos")
            out.push_back('\'');
        else if (name.size() > 1 && name[0] == '#') {
            std::uint32_t cp = 0;
            std::from_chars_result r{};
            if (name[1] == 'x' || name[1] == 'X')
                r = std::from_chars(name.data() + 2, name.data() + name.size(), cp, 16);
            else
                r = std::from_chars(name.data() + 1, name.data() + name.size(), cp, 10);
            ok = r.ec == std::errc() && r.ptr == name.data() + name.size() && cp <= 0x10FFFF;
            if (ok)
                append_utf8(out, cp);
        } else {
            ok = false;
        }
        if (ok)
            i = semi;
        else
            out.push_back('&');
    }
    return out;
}

std::set<std::string> parse_tags(std::string_view raw)
{
    // "<java><html>" (older dumps) or "|java|html|" (newer dumps)
    std::set<std::string> tags;
    std::string cur;
    for (char c : raw) {
        if (c == '<' || c == '>' || c == '|' || c == ' ' || c == ',') {
            if (!cur.empty())
                tags.insert(to_lower(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty())
        tags.insert(to_lower(cur));
    return tags;
}

// ---------------------------------------------------------------------------
// Join of questions and accepted answers, shared by both formats.

struct Question {
    std::string title;
    std::set<std::string> tags;
    std::int64_t accepted_id = 0;
};

class Joiner {
public:
    explicit Joiner(std::size_t& warnings) : warnings_(warnings) {}

    void add_question(std::int64_t id, Question q)
    {
        if (!questions_.emplace(id, q).second) {
            ++warnings_;
            return;
        }
        if (q.accepted_id > 0)
            accepted_to_question_[q.accepted_id] = id;
    }

    void add_answer(std::int64_t id, std::int64_t parent_id, std::string body)
    {
        auto it = accepted_to_question_.find(id);
        if (it != accepted_to_question_.end()) {
            if (parent_id == 0 || parent_id == it->second)
                bodies_.emplace(it->second, std::move(body));
            return;
        }
        // The parent question may come later in the stream.
        if (parent_id != 0 && questions_.count(parent_id) == 0)
            pending_.emplace(id, std::make_pair(parent_id, std::move(body)));
    }

    std::vector<QAPair> finish()
    {
        for (auto& [id, entry] : pending_) {
            auto it = accepted_to_question_.find(id);
            if (it != accepted_to_question_.end() && it->second == entry.first)
                bodies_.emplace(it->second, std::move(entry.second));
        }
        std::vector<QAPair> pairs;
        for (auto& [qid, body] : bodies_) {
            auto& q = questions_.at(qid);
            pairs.push_back(QAPair{qid, q.title, q.tags, std::move(body)});
        }
        std::sort(pairs.begin(), pairs.end(),
                  [](const QAPair& a, const QAPair& b) { return a.question_id < b.question_id; });
        return pairs;
    }

private:
    std::size_t& warnings_;
    std::unordered_map<std::int64_t, Question> questions_;
    std::unordered_map<std::int64_t, std::int64_t> accepted_to_question_;
    std::unordered_map<std::int64_t, std::string> bodies_;
    std::unordered_map<std::int64_t, std::pair<std::int64_t, std::string>> pending_;
};

bool parse_positive(std::string_view s, std::int64_t& out)
{
    auto r = std::from_chars(s.data(), s.data() + s.size(), out);
    return r.ec == std::errc() && r.ptr == s.data() + s.size() && out > 0;
}

// ---------------------------------------------------------------------------
// Posts.xml

using Attributes = std::unordered_map<std::string, std::string>;

// Parses the attribute list of one element (text between "<row" and "/>").
bool parse_attributes(std::string_view s, Attributes& out)
{
    std::size_t i = 0;
    auto skip_ws = [&] {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i])))
            ++i;
    };
    while (true) {
        skip_ws();
        if (i >= s.size())
            return true;
        std::size_t name_start = i;
        while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_' ||
                                s[i] == ':' || s[i] == '-'))
            ++i;
        if (i == name_start)
            return false;
        std::string name(s.substr(name_start, i - name_start));
        skip_ws();
        if (i >= s.size() || s[i] != '=')
            return false;
        ++i;
        skip_ws();
        if (i >= s.size() || (s[i] != '"' && s[i] != '\''))
            return false;
        char quote = s[i++];
        std::size_t end = s.find(quote, i);
        if (end == std::string_view::npos)
            return false;
        out[name] = decode_entities(s.substr(i, end - i));
        i = end + 1;
    }
}

void handle_row(const Attributes& attrs, Joiner& joiner, std::size_t& warnings)
{
    auto get = [&](const char* key) -> const std::string* {
        auto it = attrs.find(key);
        return it == attrs.end() ? nullptr : &it->second;
    };
    std::int64_t id = 0;
    const std::string* id_s = get("Id");
    const std::string* type = get("PostTypeId");
    if (!id_s || !type || !parse_positive(*id_s, id)) {
        ++warnings;
        return;
    }
    if (*type == "1") {
        const std::string* title = get("Title");
        if (!title || title->empty()) {
            ++warnings;
            return;
        }
        Question q;
        q.title = *title;
        if (const auto* tags = get("Tags"))
            q.tags = parse_tags(*tags);
        if (const auto* acc = get("AcceptedAnswerId")) {
            if (!parse_positive(*acc, q.accepted_id)) {
                ++warnings;
                return;
            }
        }
        joiner.add_question(id, std::move(q));
    } else if (*type == "2") {
        std::int64_t parent = 0;
        if (const auto* p = get("ParentId"); p && !parse_positive(*p, parent)) {
            ++warnings;
            return;
        }
        const std::string* body = get("Body");
        joiner.add_answer(id, parent, body ? *body : std::string());
    }
}

void parse_xml(std::istream& in, Joiner& joiner, std::size_t& warnings)
{
    std::string buf;
    std::size_t pos = 0;
    bool eof = false;
    std::vector<char> chunk(1 << 16);

    auto fill = [&]() -> bool {
        if (eof)
            return false;
        in.read(chunk.data(), static_cast<std::streamsize>(chunk.size()));
        std::streamsize n = in.gcount();
        if (in.bad())
            throw Error(ErrorCode::Io, "read error while parsing dump");
        if (n <= 0) {
            eof = true;
            return false;
        }
        buf.erase(0, pos);
        pos = 0;
        buf.append(chunk.data(), static_cast<std::size_t>(n));
        return true;
    };

    while (true) {
        std::size_t start = buf.find("<row", pos);
        if (start == std::string::npos) {
            // Keep a short tail in case "<row" straddles the chunk boundary.
            pos = buf.size() > 4 ? buf.size() - 4 : 0;
            if (!fill())
                return;
            continue;
        }
        std::size_t after = start + 4;
        if (after >= buf.size()) {
            pos = start;
            if (!fill())
                return;
            continue;
        }
        if (!std::isspace(static_cast<unsigned char>(buf[after])) && buf[after] != '/' &&
            buf[after] != '>') {
            pos = after;  // e.g. "<rows>"
            continue;
        }
        // Scan to the end of the element, honouring quoted values.
        std::size_t i = after;
        char quote = 0;
        std::size_t end = std::string::npos;
        bool need_more = false;
        while (true) {
            if (i >= buf.size()) {
                std::size_t rel = i - start;
                pos = start;
                if (!fill()) {
                    need_more = true;
                    break;
                }
                start = pos;
                i = start + rel;
                continue;
            }
            char c = buf[i];
            if (quote) {
                if (c == quote)
                    quote = 0;
            } else if (c == '"' || c == '\'') {
                quote = c;
            } else if (c == '>') {
                end = i;
                break;
            } else if (c == '<') {
                break;  // a new tag began before this one closed
            }
            ++i;
        }
        if (need_more) {
            ++warnings;  // truncated element at end of input
            return;
        }
        if (end == std::string::npos) {
            ++warnings;
            pos = i;
            continue;
        }
        std::size_t attr_end = (end > after && buf[end - 1] == '/') ? end - 1 : end;
        Attributes attrs;
        if (parse_attributes(std::string_view(buf).substr(after, attr_end - after), attrs))
            handle_row(attrs, joiner, warnings);
        else
            ++warnings;
        pos = end + 1;
    }
}

// ---------------------------------------------------------------------------
// JSONL

void parse_jsonl(std::istream& in, Joiner& joiner, std::size_t& warnings)
{
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        auto j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            ++warnings;
            continue;
        }
        std::int64_t id = 0;
        auto id_it = j.find("id");
        if (id_it == j.end()) {
            ++warnings;
            continue;
        }
        if (id_it->is_number_integer())
            id = id_it->get<std::int64_t>();
        else if (id_it->is_string() && !parse_positive(id_it->get<std::string>(), id))
            id = 0;
        auto title_it = j.find("title");
        if (id <= 0 || title_it == j.end() || !title_it->is_string() ||
            title_it->get<std::string>().empty()) {
            ++warnings;
            continue;
        }
        Question q;
        q.title = title_it->get<std::string>();
        if (auto t = j.find("tags"); t != j.end()) {
            if (t->is_array()) {
                for (const auto& tag : *t)
                    if (tag.is_string())
                        q.tags.insert(to_lower(tag.get<std::string>()));
            } else if (t->is_string()) {
                q.tags = parse_tags(t->get<std::string>());
            }
        }
        auto body_it = j.find("accepted_answer_body");
        bool has_answer = body_it != j.end() && body_it->is_string();
        if (body_it != j.end() && !body_it->is_string() && !body_it->is_null()) {
            ++warnings;
            continue;
        }
        // Answers have no ids of their own in this format; offset ids keep
        // them out of the question id space.
        std::int64_t answer_id = has_answer ? (std::int64_t{1} << 62) + id : 0;
        q.accepted_id = answer_id;
        std::size_t before = warnings;
        joiner.add_question(id, std::move(q));
        if (has_answer && warnings == before)
            joiner.add_answer(answer_id, id, body_it->get<std::string>());
    }
    if (in.bad())
        throw Error(ErrorCode::Io, "read error while parsing dump");
}

// ---------------------------------------------------------------------------
// Island parsing

constexpr std::string_view kApiBlocklist[] = {
    "Override", "Deprecated", "SuppressWarnings", "FunctionalInterface", "SafeVarargs",
};

bool ieq_at(std::string_view s, std::size_t pos, std::string_view lit)
{
    if (pos + lit.size() > s.size())
        return false;
    for (std::size_t i = 0; i < lit.size(); ++i)
        if (std::tolower(static_cast<unsigned char>(s[pos + i])) != lit[i])
            return false;
    return true;
}

std::size_t ifind(std::string_view s, std::string_view lit, std::size_t from)
{
    for (std::size_t i = from; i + lit.size() <= s.size(); ++i)
        if (ieq_at(s, i, lit))
            return i;
    return std::string_view::npos;
}

// Collects the inner text of every closed <tag ...>...</tag> region; stops
// at the first unclosed one.
void tag_islands(std::string_view body, std::string_view tag, std::vector<std::string_view>& out)
{
    std::string open = "<" + std::string(tag);
    std::string close = "</" + std::string(tag) + ">";
    std::size_t pos = 0;
    while (true) {
        std::size_t o = ifind(body, open, pos);
        if (o == std::string_view::npos)
            return;
        std::size_t after_name = o + open.size();
        if (after_name < body.size() && body[after_name] != '>' &&
            !std::isspace(static_cast<unsigned char>(body[after_name]))) {
            pos = after_name;  // <prefix> or <codex>, not our tag
            continue;
        }
        std::size_t gt = body.find('>', after_name);
        if (gt == std::string_view::npos)
            return;
        std::size_t c = ifind(body, close, gt + 1);
        if (c == std::string_view::npos)
            return;
        out.push_back(body.substr(gt + 1, c - gt - 1));
        pos = c + close.size();
    }
}

void fenced_islands(std::string_view body, std::vector<std::string_view>& out)
{
    std::size_t pos = 0;
    while (true) {
        std::size_t o = body.find("```", pos);
        if (o == std::string_view::npos)
            return;
        std::size_t content = body.find('\n', o + 3);  // skip the info string
        if (content == std::string_view::npos)
            return;
        std::size_t c = body.find("```", content + 1);
        if (c == std::string_view::npos)
            return;
        out.push_back(body.substr(content + 1, c - content - 1));
        pos = c + 3;
    }
}

bool ident_start(char c)
{
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

bool ident_char(char c)
{
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

}  // namespace

std::optional<DumpFormat> parse_dump_format(std::string_view name)
{
    if (name == "xml")
        return DumpFormat::Xml;
    if (name == "jsonl")
        return DumpFormat::Jsonl;
    return std::nullopt;
}

DumpParseResult parse_dump(std::istream& source, DumpFormat format)
{
    if (!source)
        throw Error(ErrorCode::Io, "dump stream is not readable");
    DumpParseResult result;
    Joiner joiner(result.warnings);
    if (format == DumpFormat::Xml)
        parse_xml(source, joiner, result.warnings);
    else
        parse_jsonl(source, joiner, result.warnings);
    result.pairs = joiner.finish();
    return result;
}

DumpParseResult parse_dump_file(const std::string& path, DumpFormat format)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::Io, "cannot open dump: " + path);
    return parse_dump(in, format);
}

bool looks_like_api_class(std::string_view id)
{
    if (id.empty() || !std::isupper(static_cast<unsigned char>(id[0])))
        return false;
    if (std::none_of(id.begin(), id.end(),
                     [](char c) { return std::islower(static_cast<unsigned char>(c)) != 0; }))
        return false;
    for (auto b : kApiBlocklist)
        if (b == id)
            return false;
    return !is_java_keyword(id);
}

std::set<std::string> extract_api_classes(std::string_view answer_body)
{
    std::vector<std::string_view> islands;
    tag_islands(answer_body, "code", islands);
    tag_islands(answer_body, "pre", islands);
    fenced_islands(answer_body, islands);

    std::set<std::string> apis;
    for (auto island : islands) {
        std::string text = decode_entities(island);
        std::size_t i = 0;
        while (i < text.size()) {
            if (!ident_start(text[i])) {
                ++i;
                continue;
            }
            // A digit-led run ("2D") is a number, not an identifier start.
            if (i > 0 && std::isdigit(static_cast<unsigned char>(text[i - 1]))) {
                while (i < text.size() && ident_char(text[i]))
                    ++i;
                continue;
            }
            std::size_t j = i;
            while (j < text.size() && ident_char(text[j]))
                ++j;
            std::string_view id(text.data() + i, j - i);
            if (looks_like_api_class(id))
                apis.emplace(id);
            i = j;
        }
    }
    return apis;
}

void merge_associations(AssociationTable& into, const AssociationTable& from)
{
    for (const auto& [kw, apis] : from) {
        auto& dst = into[kw];
        for (const auto& [api, n] : apis)
            dst[api] += n;
    }
}

AssociationTable build_associations(const std::vector<QAPair>& pairs, const Stoplist& stoplist,
                                    unsigned threads)
{
    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, pairs.size())));

    auto work = [&](std::size_t begin, std::size_t end) {
        AssociationTable local;
        for (std::size_t i = begin; i < end; ++i) {
            const auto& pair = pairs[i];
            auto keywords = extract_keywords(pair.title, stoplist);
            if (keywords.empty())
                continue;
            auto apis = extract_api_classes(pair.answer_body);
            for (const auto& kw : keywords) {
                if (apis.empty())
                    break;
                auto& row = local[kw];
                for (const auto& api : apis)
                    row[api] += 1;
            }
        }
        return local;
    };

    if (threads <= 1)
        return work(0, pairs.size());

    std::vector<std::future<AssociationTable>> parts;
    std::size_t step = (pairs.size() + threads - 1) / threads;
    for (std::size_t b = 0; b < pairs.size(); b += step)
        parts.push_back(std::async(std::launch::async, work, b, std::min(pairs.size(), b + step)));
    AssociationTable merged;
    for (auto& f : parts)
        merge_associations(merged, f.get());
    return merged;
}

std::vector<AssociationRecord> to_records(const AssociationTable& table)
{
    std::vector<AssociationRecord> out;
    for (const auto& [kw, apis] : table)
        for (const auto& [api, n] : apis)
            out.push_back({kw, api, n});
    return out;
}

}  // namespace rack
