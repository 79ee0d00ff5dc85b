#include "rack/text.hpp"

#include <array>

namespace rack {
namespace {

// Working buffer for one word. `end` is the length of the current stem when
// testing a suffix; most predicates look only at word[0, end).
class Stemmer {
public:
    explicit Stemmer(std::string_view w) : w_(w) {}

    std::string run()
    {
        if (w_.empty())
            return w_;
        step1a();
        step1b();
        step1c();
        step2();
        step3();
        step4();
        step5a();
        step5b();
        return w_;
    }

private:
    std::string w_;

    bool consonant(std::size_t i) const
    {
        switch (w_[i]) {
        case 'a': case 'e': case 'i': case 'o': case 'u':
            return false;
        case 'y':
            return i == 0 ? true : !consonant(i - 1);
        default:
            return true;
        }
    }

    // m() in [C](VC)^m[V] over the first n letters.
    int measure(std::size_t n) const
    {
        int m = 0;
        std::size_t i = 0;
        while (i < n && consonant(i))
            ++i;
        while (i < n) {
            while (i < n && !consonant(i))
                ++i;
            if (i >= n)
                break;
            while (i < n && consonant(i))
                ++i;
            ++m;
        }
        return m;
    }

    bool has_vowel(std::size_t n) const
    {
        for (std::size_t i = 0; i < n; ++i)
            if (!consonant(i))
                return true;
        return false;
    }

    bool double_consonant(std::size_t n) const
    {
        return n >= 2 && w_[n - 1] == w_[n - 2] && consonant(n - 1);
    }

    // *o: stem ends cvc, and the final c is not w, x or y.
    bool cvc(std::size_t n) const
    {
        if (n < 3)
            return false;
        if (!consonant(n - 1) || consonant(n - 2) || !consonant(n - 3))
            return false;
        char c = w_[n - 1];
        return c != 'w' && c != 'x' && c != 'y';
    }

    bool ends(std::string_view s) const
    {
        return w_.size() >= s.size() && std::string_view(w_).substr(w_.size() - s.size()) == s;
    }

    std::size_t stem_len(std::string_view suffix) const { return w_.size() - suffix.size(); }

    void replace(std::string_view suffix, std::string_view with)
    {
        w_.resize(stem_len(suffix));
        w_.append(with);
    }

    struct Rule {
        std::string_view suffix;
        std::string_view replacement;
    };

    // The first rule whose suffix matches is the only one considered.
    template <std::size_t N>
    void apply_first(const std::array<Rule, N>& rules, int min_measure)
    {
        for (const auto& r : rules) {
            if (ends(r.suffix)) {
                if (measure(stem_len(r.suffix)) > min_measure)
                    replace(r.suffix, r.replacement);
                return;
            }
        }
    }

    void step1a()
    {
        if (ends("sses"))
            replace("sses", "ss");
        else if (ends("ies"))
            replace("ies", "i");
        else if (ends("ss"))
            return;
        else if (ends("s"))
            replace("s", "");
    }

    void step1b()
    {
        if (ends("eed")) {
            if (measure(stem_len("eed")) > 0)
                replace("eed", "ee");
            return;
        }
        bool removed = false;
        if (ends("ed") && has_vowel(stem_len("ed"))) {
            replace("ed", "");
            removed = true;
        } else if (ends("ing") && has_vowel(stem_len("ing"))) {
            replace("ing", "");
            removed = true;
        }
        if (!removed)
            return;

        if (ends("at"))
            replace("at", "ate");
        else if (ends("bl"))
            replace("bl", "ble");
        else if (ends("iz"))
            replace("iz", "ize");
        else if (double_consonant(w_.size())) {
            char c = w_.back();
            if (c != 'l' && c != 's' && c != 'z')
                w_.pop_back();
        } else if (measure(w_.size()) == 1 && cvc(w_.size())) {
            w_.push_back('e');
        }
    }

    void step1c()
    {
        if (ends("y") && has_vowel(stem_len("y")))
            w_.back() = 'i';
    }

    void step2()
    {
        static constexpr std::array<Rule, 20> rules{{
            {"ational", "ate"}, {"tional", "tion"}, {"enci", "ence"}, {"anci", "ance"},
            {"izer", "ize"},    {"abli", "able"},   {"alli", "al"},    {"entli", "ent"},
            {"eli", "e"},       {"ousli", "ous"},   {"ization", "ize"}, {"ation", "ate"},
            {"ator", "ate"},    {"alism", "al"},    {"iveness", "ive"}, {"fulness", "ful"},
            {"ousness", "ous"}, {"aliti", "al"},    {"iviti", "ive"},   {"biliti", "ble"},
        }};
        // "ational"/"tional" and "ization"/"ation" overlap; list order keeps
        // the longer suffix first, the rest are disjoint.
        apply_first(rules, 0);
    }

    void step3()
    {
        static constexpr std::array<Rule, 7> rules{{
            {"icate", "ic"}, {"ative", ""}, {"alize", "al"}, {"iciti", "ic"},
            {"ical", "ic"},  {"ful", ""},   {"ness", ""},
        }};
        apply_first(rules, 0);
    }

    void step4()
    {
        static constexpr std::array<std::string_view, 19> suffixes{
            "al",  "ance", "ence", "er",  "ic",  "able", "ible", "ant", "ement", "ment",
            "ent", "ion",  "ou",   "ism", "ate", "iti",  "ous",  "ive", "ize",
        };
        for (auto s : suffixes) {
            if (!ends(s))
                continue;
            std::size_t n = stem_len(s);
            if (s == "ion") {
                if (n == 0 || (w_[n - 1] != 's' && w_[n - 1] != 't'))
                    return;
            }
            if (measure(n) > 1)
                w_.resize(n);
            return;
        }
    }

    void step5a()
    {
        if (!ends("e"))
            return;
        std::size_t n = stem_len("e");
        int m = measure(n);
        if (m > 1 || (m == 1 && !cvc(n)))
            w_.pop_back();
    }

    void step5b()
    {
        if (measure(w_.size()) > 1 && double_consonant(w_.size()) && w_.back() == 'l')
            w_.pop_back();
    }
};

}  // namespace

std::string porter_stem(std::string_view word)
{
    return Stemmer(word).run();
}

}  // namespace rack
