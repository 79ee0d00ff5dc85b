#include <doctest.h>

#include <cmath>

#include "oracle.hpp"
#include "rack/error.hpp"
#include "rack/ingest.hpp"
#include "rack/reformulator.hpp"
#include "support.hpp"

using namespace rack;
using rack::testing::fixture;
using rack::testing::load_json;
using rack::testing::slurp;

namespace {

const KeywordApiIndex& fixture_index()
{
    static const KeywordApiIndex idx = [] {
        auto r = parse_dump_file(fixture("mini_posts.xml"), DumpFormat::Xml);
        return KeywordApiIndex(build_associations(r.pairs, Stoplist::default_list(), 1));
    }();
    return idx;
}

const oracle::Model& fixture_model()
{
    static const oracle::Model m(oracle::pairs_from_json(load_json(fixture("mini_posts_expected.json"))));
    return m;
}

ErrorCode error_of(auto&& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("Table 1 relevance arithmetic")
{
    std::vector<ApiCandidate> in{
        {"File", 0, 0.6, 0, 1.0, 0},   {"Document", 0, 1.0, 0, 0.46, 0},
        {"List", 0, 0.9, 0, 0.22, 0},  {"Element", 0, 0.6, 0, 0.46, 0},
        {"Jsoup", 0, 0.4, 0, 0.0, 0},
    };
    auto out = combine_relevance(in);
    std::map<std::string, double> rel;
    for (const auto& c : out)
        rel[c.api] = c.relevance;
    CHECK(rel["File"] == doctest::Approx(1.00).epsilon(0.01));
    CHECK(rel["Document"] == doctest::Approx(0.91).epsilon(0.01));
    CHECK(rel["List"] == doctest::Approx(0.70).epsilon(0.01));
    CHECK(rel["Element"] == doctest::Approx(0.66).epsilon(0.01));
    CHECK(rel["Jsoup"] == doctest::Approx(0.25).epsilon(0.01));
    CHECK(out.front().api == "File");
    CHECK(out.back().api == "Jsoup");
}

TEST_CASE("combine_relevance ordering and degenerate input")
{
    CHECK(combine_relevance({}).empty());
    auto out = combine_relevance({{"B", 0, 0.5, 0, 0.5, 0}, {"A", 0, 0.5, 0, 0.5, 0}, {"C", 0, 1.0, 0, 0.0, 0}});
    // all three tie on relevance; C wins on KAC, then names
    CHECK(out[0].api == "C");
    CHECK(out[1].api == "A");
    CHECK(out[2].api == "B");
    auto zero = combine_relevance({{"Z", 0, 0.0, 0, 0.0, 0}});
    CHECK(zero[0].relevance == 0.0);
}

TEST_CASE("suggest matches the brute-force oracle")
{
    const std::vector<std::string> queries{
        "parsing html in java", "html",          "parse html table",      "md5 hash of string",
        "read file line by line", "download file from url", "convert json to object",
        "format date",            "sort list with comparator", "thread pool tasks",
        "regular expression match", "random number in range", "load properties file",
        "send http get request",  "extract links from page",   "hash",
        "file",                   "string date parse",         "checksum file hash",
        "unknown words entirely", "generate random md5",       "object list sort field json",
    };
    for (const auto& q : queries) {
        CAPTURE(q);
        auto kws = extract_keywords(q, Stoplist::default_list());
        auto expected = oracle::rank(fixture_model(), kws);
        auto got = suggest(fixture_index(), q, Stoplist::default_list(), {1000, 10});
        REQUIRE(got.candidates.size() == expected.size());
        for (std::size_t i = 0; i < expected.size(); ++i) {
            CHECK(got.candidates[i].api == expected[i].api);
            CHECK(got.candidates[i].kac_raw == expected[i].kac_raw);
            CHECK(got.candidates[i].kac == expected[i].kac);
            CHECK(got.candidates[i].kkc_raw == expected[i].kkc_raw);
            CHECK(got.candidates[i].kkc == expected[i].kkc);
            CHECK(got.candidates[i].relevance == expected[i].relevance);
        }
    }
    CHECK(error_of([] { suggest(fixture_index(), "the of in", Stoplist::default_list()); }) ==
          ErrorCode::EmptyQuery);
}

TEST_CASE("fixture query yields the designed head")
{
    auto s = suggest(fixture_index(), "parsing html in java", Stoplist::default_list());
    REQUIRE(s.candidates.size() >= 3);
    CHECK(s.candidates[0].relevance == 1.0);
    std::set<std::string> head;
    for (std::size_t i = 0; i < 3; ++i)
        head.insert(s.candidates[i].api);
    CHECK(head == std::set<std::string>{"Document", "Element", "Jsoup"});
}

TEST_CASE("kkc is zero for a single keyword")
{
    auto kac = kac_scores(fixture_index(), {"hash"});
    std::set<std::string> names;
    for (const auto& [a, _] : kac)
        names.insert(a);
    for (const auto& [_, s] : kkc_scores(fixture_index(), {"hash"}, names)) {
        CHECK(s.raw == 0.0);
        CHECK(s.normalized == 0.0);
    }
    CHECK(kac.at("MessageDigest").raw == 3);
    CHECK(kac.at("MessageDigest").normalized == 1.0);
    CHECK(kac.at("File").normalized == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("coherence window limits the top lists")
{
    // with m = 1 only the single best API per keyword counts
    auto kws = std::vector<std::string>{"pars", "html"};
    std::set<std::string> names{"Document", "Jsoup", "Element", "Elements"};
    auto narrow = kkc_scores(fixture_index(), kws, names, 1);
    auto expected = oracle::rank(fixture_model(), kws, 1);
    for (const auto& e : expected)
        if (names.count(e.api))
            CHECK(narrow.at(e.api).raw == e.kkc_raw);
}

TEST_CASE("scores are bounded and the top list is a prefix")
{
    for (const char* q : {"parse html", "read file", "hash string", "json object"}) {
        auto full = suggest(fixture_index(), q, Stoplist::default_list(), {1000, 10});
        for (const auto& c : full.candidates) {
            CHECK(c.kac >= 0.0);
            CHECK(c.kac <= 1.0);
            CHECK(c.kkc >= 0.0);
            CHECK(c.kkc <= 1.0);
            CHECK(c.relevance >= 0.0);
            CHECK(c.relevance <= 1.0);
        }
        CHECK(full.candidates.front().relevance == 1.0);
        for (std::size_t n : {1u, 3u, 5u, 10u}) {
            auto part = suggest(fixture_index(), q, Stoplist::default_list(), {n, 10});
            REQUIRE(part.candidates.size() == std::min(n, full.candidates.size()));
            for (std::size_t i = 0; i < part.candidates.size(); ++i)
                CHECK(part.candidates[i].api == full.candidates[i].api);
        }
    }
}

TEST_CASE("normalized scores are invariant to uniform count scaling")
{
    AssociationTable scaled = fixture_index().entries();
    for (auto& [_, apis] : scaled)
        for (auto& [__, n] : apis)
            n *= 7;
    KeywordApiIndex big(scaled);
    for (const char* q : {"parsing html", "read file line", "md5 hash string"}) {
        auto a = suggest(fixture_index(), q, Stoplist::default_list(), {1000, 10});
        auto b = suggest(big, q, Stoplist::default_list(), {1000, 10});
        REQUIRE(a.candidates.size() == b.candidates.size());
        for (std::size_t i = 0; i < a.candidates.size(); ++i) {
            CHECK(a.candidates[i].api == b.candidates[i].api);
            CHECK(a.candidates[i].kac == doctest::Approx(b.candidates[i].kac));
            CHECK(a.candidates[i].relevance == doctest::Approx(b.candidates[i].relevance));
        }
    }
}

TEST_CASE("raising one association never lowers that API's KAC")
{
    std::vector<std::string> kws{"read", "file"};
    auto before = kac_scores(fixture_index(), kws);
    for (const auto& [api, s] : before) {
        AssociationTable t = fixture_index().entries();
        t["read"][api] += 2;
        auto after = kac_scores(KeywordApiIndex(t), kws);
        CAPTURE(api);
        CHECK(after.at(api).raw == s.raw + 2);
        CHECK(after.at(api).normalized >= s.normalized);
    }
}

TEST_CASE("comment extraction")
{
    auto src = slurp(fixture("comments/HtmlTask.java"));
    CHECK(extract_comment_query(src, 11) == "Parse the HTML page and extract all links");
    CHECK(extract_comment_query(src, 18) == "read a file line by line");
    CHECK(extract_comment_query(src, 17) == "read a file line by line");
    CHECK(extract_comment_query(src, 9) == "Parse the HTML page and extract all links");
    CHECK(error_of([&] { extract_comment_query(src, 19); }) == ErrorCode::NoWorkingContext);
    CHECK(error_of([&] { extract_comment_query(src, 3); }) == ErrorCode::NoWorkingContext);
    CHECK(error_of([&] { extract_comment_query(src, 0); }) == ErrorCode::InvalidArgument);
    CHECK(error_of([&] { extract_comment_query(src, 500); }) == ErrorCode::InvalidArgument);
    CHECK(extract_comment_query("int x; // trailing note\nint y;\n", 2) == "trailing note");
    CHECK(extract_comment_query("/** Javadoc one-liner */\nvoid f() {}\n", 2) == "Javadoc one-liner");
}

TEST_CASE("suggest-from composes extraction and suggestion")
{
    auto src = slurp(fixture("comments/HtmlTask.java"));
    auto q = extract_comment_query(src, 11);
    auto a = suggest(fixture_index(), q, Stoplist::default_list());
    auto b = suggest(fixture_index(), "Parse the HTML page and extract all links", Stoplist::default_list());
    REQUIRE(a.candidates.size() == b.candidates.size());
    for (std::size_t i = 0; i < a.candidates.size(); ++i)
        CHECK(a.candidates[i].api == b.candidates[i].api);
}
