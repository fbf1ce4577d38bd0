#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <stdexcept>

#include <anno/error.hpp>
#include <anno/normalize.hpp>
#include <anno/util.hpp>

using namespace anno;

namespace {

const LabelSchema& sentiment() {
    static LabelSchema schema({"positive", "neutral", "negative"}, {{"pos", "positive"}});
    return schema;
}

}  // namespace

TEST_CASE("exact matches after trimming and stripping") {
    for (const char* raw : {"positive", " Positive ", "positive.", "'positive'", "\"positive\"",
                            "[positive]", "(positive)", "POSITIVE!", "`positive`,", "<positive>",
                            "{positive}", " 'positive'. "}) {
        CAPTURE(raw);
        auto out = normalize(raw, sentiment());
        CHECK(out.reason == ParseReason::exact);
        CHECK(out.label == "positive");
        REQUIRE(out.matched_span.has_value());
    }
}

TEST_CASE("synonyms resolve to canonical labels") {
    auto out = normalize(" POS. ", sentiment());
    CHECK(out.reason == ParseReason::synonym);
    CHECK(out.label == "positive");
}

TEST_CASE("unique mention within a sentence") {
    auto out = normalize("The sentiment is negative", sentiment());
    CHECK(out.reason == ParseReason::unique_mention);
    CHECK(out.label == "negative");
    REQUIRE(out.matched_span.has_value());
    CHECK(out.matched_span->first == 17);
    CHECK(out.matched_span->second == 25);

    auto mixed = normalize("I'd call this one: Neutral, overall", sentiment());
    CHECK(mixed.reason == ParseReason::unique_mention);
    CHECK(mixed.label == "neutral");
}

TEST_CASE("word boundaries prevent partial-word hits") {
    CHECK(normalize("positively glowing", sentiment()).reason == ParseReason::none);
    CHECK(normalize("the positives outweigh", sentiment()).reason == ParseReason::none);
    CHECK(normalize("unpositive", sentiment()).reason == ParseReason::none);
    // Non-word neighbours still count as boundaries.
    auto hyphen = normalize("answer=positive", sentiment());
    CHECK(hyphen.reason == ParseReason::unique_mention);
    CHECK(hyphen.label == "positive");
}

TEST_CASE("several distinct labels are ambiguous") {
    auto out = normalize("either positive or negative, hard to tell", sentiment());
    CHECK(out.reason == ParseReason::ambiguous);
    CHECK_FALSE(out.label.has_value());
    // The same label twice is still a unique mention.
    auto twice = normalize("negative, definitely negative", sentiment());
    CHECK(twice.reason == ParseReason::unique_mention);
    CHECK(twice.label == "negative");
}

TEST_CASE("unmatchable replies are none") {
    for (const char* raw : {"", "   ", "hard to say, really", "yes", "42", "???"}) {
        CAPTURE(raw);
        auto out = normalize(raw, sentiment());
        CHECK(out.reason == ParseReason::none);
        CHECK_FALSE(out.label.has_value());
    }
}

TEST_CASE("majority vote: plurality, ties and unparsed") {
    auto labeled = [](const char* l) {
        return ParseOutcome{std::string(l), std::nullopt, ParseReason::exact};
    };
    ParseOutcome unparsed{std::nullopt, std::nullopt, ParseReason::none};

    auto v1 = majority_vote({labeled("positive"), labeled("negative"), labeled("positive")},
                            sentiment());
    CHECK(v1.label == "positive");
    CHECK(v1.status == AnnotationStatus::ok);
    CHECK(v1.votes == std::map<std::string, int>{{"positive", 2}, {"negative", 1}});

    // Tie breaks toward the earliest tied label in schema order.
    auto v2 = majority_vote({labeled("negative"), labeled("positive")}, sentiment());
    CHECK(v2.label == "positive");
    CHECK(v2.status == AnnotationStatus::tie_broken);

    auto v3 = majority_vote({labeled("negative"), labeled("neutral")}, sentiment());
    CHECK(v3.label == "neutral");
    CHECK(v3.status == AnnotationStatus::tie_broken);

    // Unparsed paths cast no vote but do not poison the plurality.
    auto v4 = majority_vote({unparsed, labeled("negative"), unparsed}, sentiment());
    CHECK(v4.label == "negative");
    CHECK(v4.status == AnnotationStatus::ok);
    CHECK(v4.votes.size() == 1);

    auto v5 = majority_vote({unparsed, unparsed}, sentiment());
    CHECK_FALSE(v5.label.has_value());
    CHECK(v5.status == AnnotationStatus::unparsed);
    CHECK(v5.votes.empty());

    CHECK_THROWS_AS(majority_vote({}, sentiment()), std::invalid_argument);
}

TEST_CASE("majority vote matches a count-and-argmax oracle over none-mixed vectors") {
    // Alphabet: 3 labels plus "no vote"; lengths 1..4 (4^4 + ... = 340 vectors).
    const auto& schema = sentiment();
    const auto& labels = schema.labels();
    for (int len = 1; len <= 4; ++len) {
        const int total = 1 << (2 * len);  // 4^len
        for (int code = 0; code < total; ++code) {
            std::vector<ParseOutcome> outcomes;
            std::vector<int> counts(3, 0);
            int c = code;
            for (int i = 0; i < len; ++i) {
                const int pick = c & 3;
                c >>= 2;
                if (pick == 3) {
                    outcomes.push_back({std::nullopt, std::nullopt, ParseReason::none});
                } else {
                    outcomes.push_back({labels[pick], std::nullopt, ParseReason::exact});
                    ++counts[pick];
                }
            }
            const auto got = majority_vote(outcomes, schema);

            int best = 0, winners = 0, first = -1;
            for (int i = 0; i < 3; ++i) best = std::max(best, counts[i]);
            for (int i = 0; i < 3; ++i)
                if (counts[i] == best && best > 0) {
                    ++winners;
                    if (first < 0) first = i;
                }
            CAPTURE(len);
            CAPTURE(code);
            if (best == 0) {
                CHECK(got.status == AnnotationStatus::unparsed);
            } else {
                REQUIRE(got.label.has_value());
                CHECK(*got.label == labels[first]);
                CHECK(got.status == (winners == 1 ? AnnotationStatus::ok
                                                  : AnnotationStatus::tie_broken));
            }
        }
    }
}

TEST_CASE("synonym table file parsing") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "anno_test_synonyms";
    fs::create_directories(dir);

    const fs::path good = dir / "good.txt";
    write_file(good.string(),
               "# comment\n"
               "positive: pos , upbeat\n"
               "\n"
               "negative: neg\n");
    auto table = load_synonym_table(good.string());
    CHECK(table == std::map<std::string, std::string>{
                       {"pos", "positive"}, {"upbeat", "positive"}, {"neg", "negative"}});

    const fs::path dup = dir / "dup.txt";
    write_file(dup.string(), "positive: same\nnegative: same\n");
    CHECK_THROWS_AS(load_synonym_table(dup.string()), DataError);

    const fs::path nocolon = dir / "nocolon.txt";
    write_file(nocolon.string(), "positive pos\n");
    CHECK_THROWS_AS(load_synonym_table(nocolon.string()), DataError);

    CHECK_THROWS_AS(load_synonym_table((dir / "missing.txt").string()), DataError);
    fs::remove_all(dir);
}
