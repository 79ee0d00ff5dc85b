#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace rack {

struct JavaComment {
    enum class Kind { Line, Block };
    Kind kind;
    std::size_t start_line;  // 1-based
    std::size_t end_line;
    std::string text;        // without delimiters
    bool code_before = false;  // code precedes it on its first line
    bool code_after = false;   // code follows it on its last line
};

struct JavaLexResult {
    /// Same length as the input; comments and the contents of string, char
    /// and text-block literals replaced by spaces. Newlines are preserved, so
    /// offsets and line numbers are unchanged.
    std::string neutralized;
    std::vector<JavaComment> comments;
};

JavaLexResult lex_java(std::string_view source);

/// 1-based line number of byte offset `pos`.
std::size_t line_of(std::string_view text, std::size_t pos);

}  // namespace rack
