#include "rack/java_source.hpp"

#include <algorithm>
#include <cctype>

namespace rack {
namespace {

bool blank(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\f'; }

}  // namespace

JavaLexResult lex_java(std::string_view src)
{
    JavaLexResult out;
    out.neutralized.assign(src);
    std::string& n = out.neutralized;

    std::size_t line = 1;
    bool line_has_code = false;
    auto blank_out = [&](std::size_t i) {
        if (n[i] != '\n')
            n[i] = ' ';
    };

    std::size_t i = 0;
    while (i < src.size()) {
        char c = src[i];
        char next = i + 1 < src.size() ? src[i + 1] : '\0';

        if (c == '\n') {
            ++line;
            line_has_code = false;
            ++i;
            continue;
        }

        if (c == '/' && next == '/') {
            std::size_t end = src.find('\n', i);
            if (end == std::string_view::npos)
                end = src.size();
            JavaComment cm{JavaComment::Kind::Line, line, line,
                           std::string(src.substr(i + 2, end - i - 2)), line_has_code, false};
            out.comments.push_back(std::move(cm));
            for (std::size_t k = i; k < end; ++k)
                blank_out(k);
            i = end;
            continue;
        }

        if (c == '/' && next == '*') {
            std::size_t close = src.find("*/", i + 2);
            std::size_t end = close == std::string_view::npos ? src.size() : close + 2;
            std::size_t text_end = close == std::string_view::npos ? src.size() : close;
            JavaComment cm{JavaComment::Kind::Block, line, line,
                           std::string(src.substr(i + 2, text_end - std::min(text_end, i + 2))),
                           line_has_code, false};
            for (std::size_t k = i; k < end; ++k) {
                if (src[k] == '\n')
                    ++line;
                blank_out(k);
            }
            cm.end_line = line;
            if (cm.end_line != cm.start_line)
                line_has_code = false;
            std::size_t k = end;
            while (k < src.size() && blank(src[k]))
                ++k;
            cm.code_after = k < src.size() && src[k] != '\n';
            out.comments.push_back(std::move(cm));
            i = end;
            continue;
        }

        if (c == '"' && next == '"' && i + 2 < src.size() && src[i + 2] == '"') {
            // Text block: """ ... """
            line_has_code = true;
            std::size_t k = i + 3;
            while (k < src.size()) {
                if (src[k] == '\\') {
                    blank_out(k);
                    if (k + 1 < src.size()) {
                        if (src[k + 1] == '\n')
                            ++line;
                        blank_out(k + 1);
                    }
                    k += 2;
                    continue;
                }
                if (src.compare(k, 3, "\"\"\"") == 0)
                    break;
                if (src[k] == '\n')
                    ++line;
                blank_out(k);
                ++k;
            }
            i = std::min(src.size(), k + 3);
            continue;
        }

        if (c == '"' || c == '\'') {
            // Literal contents are blanked; an unterminated literal ends at the
            // line break.
            line_has_code = true;
            std::size_t k = i + 1;
            while (k < src.size() && src[k] != c && src[k] != '\n') {
                if (src[k] == '\\' && k + 1 < src.size() && src[k + 1] != '\n') {
                    blank_out(k);
                    blank_out(k + 1);
                    k += 2;
                    continue;
                }
                blank_out(k);
                ++k;
            }
            i = (k < src.size() && src[k] == c) ? k + 1 : k;
            continue;
        }

        if (!blank(c))
            line_has_code = true;
        ++i;
    }

    return out;
}

std::size_t line_of(std::string_view text, std::size_t pos)
{
    pos = std::min(pos, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + pos, '\n'));
}

}  // namespace rack
