#include "rack/text.hpp"

#include <cctype>
#include <fstream>
#include <stdexcept>

#include "rack/error.hpp"

namespace rack {
namespace {

bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
bool is_upper(char c) { return std::isupper(static_cast<unsigned char>(c)) != 0; }
bool is_lower(char c) { return std::islower(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

void split_camel(std::string_view run, std::vector<std::string>& out)
{
    std::size_t start = 0;
    for (std::size_t i = 1; i < run.size(); ++i) {
        char prev = run[i - 1];
        char cur = run[i];
        bool boundary = false;
        if (is_upper(cur) && (is_lower(prev) || is_digit(prev)))
            boundary = true;  // parse|Html, md5|Hash
        else if (is_upper(prev) && is_upper(cur) && i + 1 < run.size() && is_lower(run[i + 1]))
            boundary = true;  // HTML|Parser
        if (boundary) {
            out.emplace_back(run.substr(start, i - start));
            start = i;
        }
    }
    out.emplace_back(run.substr(start));
}

// NLTK's English list, plus the corpus-specific terms at the end.
constexpr std::string_view kDefaultStopwords[] = {
    "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "your", "yours",
    "yourself", "yourselves", "he", "him", "his", "himself", "she", "her", "hers", "herself",
    "it", "its", "itself", "they", "them", "their", "theirs", "themselves", "what", "which",
    "who", "whom", "this", "that", "these", "those", "am", "is", "are", "was", "were", "be",
    "been", "being", "have", "has", "had", "having", "do", "does", "did", "doing", "a", "an",
    "the", "and", "but", "if", "or", "because", "as", "until", "while", "of", "at", "by",
    "for", "with", "about", "against", "between", "into", "through", "during", "before",
    "after", "above", "below", "to", "from", "up", "down", "in", "out", "on", "off", "over",
    "under", "again", "further", "then", "once", "here", "there", "when", "where", "why",
    "how", "all", "any", "both", "each", "few", "more", "most", "other", "some", "such", "no",
    "nor", "not", "only", "own", "same", "so", "than", "too", "very", "s", "t", "can", "will",
    "just", "don", "should", "now", "d", "ll", "m", "o", "re", "ve", "y", "ain", "aren",
    "couldn", "didn", "doesn", "hadn", "hasn", "haven", "isn", "ma", "mightn", "mustn",
    "needn", "shan", "shouldn", "wasn", "weren", "won", "wouldn",
    "java", "code", "example", "way", "best", "using",
};

constexpr std::string_view kJavaKeywords[] = {
    "abstract", "assert", "boolean", "break", "byte", "case", "catch", "char", "class",
    "const", "continue", "default", "do", "double", "else", "enum", "extends", "final",
    "finally", "float", "for", "goto", "if", "implements", "import", "instanceof", "int",
    "interface", "long", "native", "new", "package", "private", "protected", "public",
    "return", "short", "static", "strictfp", "super", "switch", "synchronized", "this",
    "throw", "throws", "transient", "try", "void", "volatile", "while", "var", "record",
    "yield", "true", "false", "null",
};

}  // namespace

std::string to_lower(std::string_view s)
{
    std::string out(s);
    for (auto& c : out)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::vector<std::string> split_words(std::string_view text)
{
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        if (!is_alnum(text[i])) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < text.size() && is_alnum(text[j]))
            ++j;
        split_camel(text.substr(i, j - i), out);
        i = j;
    }
    return out;
}

const Stoplist& Stoplist::default_list()
{
    static const Stoplist list = [] {
        std::unordered_set<std::string> words;
        for (auto w : kDefaultStopwords)
            words.emplace(w);
        return Stoplist(std::move(words));
    }();
    return list;
}

Stoplist Stoplist::from_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::Io, "cannot read stoplist: " + path);
    std::unordered_set<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t'))
            line.pop_back();
        std::size_t b = line.find_first_not_of(" \t");
        if (b == std::string::npos || line[b] == '#')
            continue;
        words.insert(to_lower(line.substr(b)));
    }
    return Stoplist(std::move(words));
}

std::vector<std::string> extract_keywords(std::string_view text, const Stoplist& stoplist)
{
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& part : split_words(text)) {
        std::string lower = to_lower(part);
        if (stoplist.contains(lower))
            continue;
        std::string stem = porter_stem(lower);
        if (stem.size() < 2)
            continue;
        if (seen.insert(stem).second)
            out.push_back(std::move(stem));
    }
    return out;
}

bool is_java_keyword(std::string_view word)
{
    for (auto k : kJavaKeywords)
        if (k == word)
            return true;
    return false;
}

}  // namespace rack
