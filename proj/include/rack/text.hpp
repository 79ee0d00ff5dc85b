#pragma once

#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace rack {

/// Porter stemmer, original 1980 rule set. Input is expected lowercase ASCII;
/// words of length <= 2 are returned unchanged.
std::string porter_stem(std::string_view word);

/// Splits text into word parts: runs of ASCII alphanumerics, further split at
/// camel-case boundaries ("parseHTMLPage" -> parse, HTML, Page). Case is kept.
std::vector<std::string> split_words(std::string_view text);

std::string to_lower(std::string_view s);

class Stoplist {
public:
    Stoplist() = default;
    explicit Stoplist(std::unordered_set<std::string> words) : words_(std::move(words)) {}

    /// Standard English stop words plus the Java domain terms.
    static const Stoplist& default_list();
    /// One token per line; blank lines and lines starting with '#' ignored.
    static Stoplist from_file(const std::string& path);

    bool contains(std::string_view w) const { return words_.count(std::string(w)) != 0; }
    std::size_t size() const { return words_.size(); }

private:
    std::unordered_set<std::string> words_;
};

/// Keyword preprocessing for question titles and free-text queries:
/// split, lowercase, drop stop words, stem, drop tokens shorter than 2,
/// deduplicate keeping first occurrence.
std::vector<std::string> extract_keywords(std::string_view text, const Stoplist& stoplist);

bool is_java_keyword(std::string_view word);

}  // namespace rack
