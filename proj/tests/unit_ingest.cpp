#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include <anno/error.hpp>
#include <anno/ingest.hpp>
#include <anno/prompt_set.hpp>
#include <anno/util.hpp>

using namespace anno;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path dir;
    TempDir() : dir(fs::temp_directory_path() / "anno_test_ingest") { fs::create_directories(dir); }
    ~TempDir() { fs::remove_all(dir); }

    std::string file(const std::string& name, const std::string& content) const {
        const fs::path path = dir / name;
        write_file(path.string(), content);
        return path.string();
    }
};

const LabelSchema& sentiment() {
    static LabelSchema schema({"positive", "neutral", "negative"}, {{"pos", "positive"}});
    return schema;
}

}  // namespace

TEST_CASE("format detection by extension") {
    CHECK(detect_format("corpus.csv") == CorpusFormat::csv);
    CHECK(detect_format("a/b/corpus.CSV") == CorpusFormat::csv);
    CHECK(detect_format("corpus.jsonl") == CorpusFormat::jsonl);
    CHECK(detect_format("corpus.ndjson") == CorpusFormat::jsonl);
    CHECK_THROWS_AS(detect_format("corpus.txt"), DataError);
    CHECK_THROWS_AS(detect_format("corpus"), DataError);
    CHECK(corpus_format_from_name("csv") == CorpusFormat::csv);
    CHECK_THROWS_AS(corpus_format_from_name("tsv"), DataError);
}

TEST_CASE("parse_csv handles quoting, embedded separators and CRLF") {
    std::vector<std::size_t> lines;
    auto rows = parse_csv("a,b,c\r\n\"x,1\",\"say \"\"hi\"\"\",\"two\nlines\"\nlast,,\n", &lines);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0] == std::vector<std::string>{"a", "b", "c"});
    CHECK(rows[1] == std::vector<std::string>{"x,1", "say \"hi\"", "two\nlines"});
    CHECK(rows[2] == std::vector<std::string>{"last", "", ""});
    CHECK(lines == std::vector<std::size_t>{1, 2, 4});

    CHECK_THROWS_AS(parse_csv("a,\"unterminated\n"), DataError);
}

TEST_CASE("csv corpus ingestion validates structure and labels") {
    TempDir tmp;
    const std::string good = tmp.file("good.csv",
                                      "id,text,gold\n"
                                      "t1,\"hello, world\",positive\n"
                                      "t2,plain text,NEUTRAL\n"
                                      "t3,alias label,pos\n"
                                      "t4,no gold,\n");
    auto corpus = ingest(good, CorpusFormat::csv, sentiment());
    REQUIRE(corpus.size() == 4);
    CHECK(corpus[0].id == "t1");
    CHECK(corpus[0].text == "hello, world");
    CHECK(corpus[0].gold == "positive");
    CHECK(corpus[1].gold == "neutral");   // case-insensitive
    CHECK(corpus[2].gold == "positive");  // synonym resolved to canonical
    CHECK_FALSE(corpus[3].gold.has_value());

    // Header order may vary and gold may be absent entirely.
    const std::string reordered = tmp.file("reorder.csv", "text,id\nsome text,x1\n");
    auto no_gold = ingest(reordered, CorpusFormat::csv, sentiment());
    REQUIRE(no_gold.size() == 1);
    CHECK(no_gold[0].id == "x1");

    CHECK_THROWS_AS(ingest(tmp.file("head.csv", "ident,text\nx,y\n"), CorpusFormat::csv,
                           sentiment()),
                    DataError);
    CHECK_THROWS_AS(ingest(tmp.file("dup.csv", "id,text,gold\na,x,positive\na,y,positive\n"),
                           CorpusFormat::csv, sentiment()),
                    DataError);
    CHECK_THROWS_AS(ingest(tmp.file("blank.csv", "id,text,gold\na, ,positive\n"),
                           CorpusFormat::csv, sentiment()),
                    DataError);
    CHECK_THROWS_AS(ingest(tmp.file("badgold.csv", "id,text,gold\na,x,sideways\n"),
                           CorpusFormat::csv, sentiment()),
                    DataError);
    CHECK_THROWS_AS(ingest(tmp.file("short.csv", "id,text,gold\na\n"), CorpusFormat::csv,
                           sentiment()),
                    DataError);
    CHECK_THROWS_AS(ingest(tmp.file("empty.csv", ""), CorpusFormat::csv, sentiment()), DataError);

    // Errors carry the offending location or item.
    try {
        ingest(tmp.file("where.csv", "id,text,gold\nok,fine,positive\nbad,broken,sideways\n"),
               CorpusFormat::csv, sentiment());
        FAIL("expected DataError");
    } catch (const DataError& e) {
        const std::string what = e.what();
        CHECK(what.find("bad") != std::string::npos);  // offending item id
        CHECK(what.find("sideways") != std::string::npos);
    }
}

TEST_CASE("jsonl corpus ingestion") {
    TempDir tmp;
    const std::string good = tmp.file("good.jsonl",
                                      "{\"id\": \"t1\", \"text\": \"hi\", \"gold\": \"Positive\"}\n"
                                      "{\"id\": 7, \"text\": \"numeric id\"}\n");
    auto corpus = ingest(good, CorpusFormat::jsonl, sentiment());
    REQUIRE(corpus.size() == 2);
    CHECK(corpus[0].gold == "positive");
    CHECK(corpus[1].id == "7");
    CHECK_FALSE(corpus[1].gold.has_value());

    CHECK_THROWS_AS(ingest(tmp.file("broken.jsonl", "{\"id\": \"a\"\n"), CorpusFormat::jsonl,
                           sentiment()),
                    DataError);
    CHECK_THROWS_AS(ingest(tmp.file("notext.jsonl", "{\"id\": \"a\"}\n"), CorpusFormat::jsonl,
                           sentiment()),
                    DataError);
    CHECK_THROWS_AS(ingest(tmp.file("badgold.jsonl",
                                    "{\"id\": \"a\", \"text\": \"x\", \"gold\": \"huh\"}\n"),
                           CorpusFormat::jsonl, sentiment()),
                    DataError);
}

TEST_CASE("fixture corpora load with the expected class balance") {
    auto tweets = ingest("fixtures/corpus_tweets_500.csv", CorpusFormat::csv, sentiment());
    CHECK(tweets.size() == 500);
    auto dist = label_distribution(tweets, sentiment());
    REQUIRE(dist.size() == 3);
    CHECK(dist[0].label == "positive");
    CHECK(dist[0].count == 102);
    CHECK(dist[1].count == 227);
    CHECK(dist[2].count == 171);
    CHECK(dist[0].percent == doctest::Approx(20.4));

    auto small = ingest("fixtures/corpus_tweets_60.csv", CorpusFormat::csv, sentiment());
    CHECK(small.size() == 60);
    auto small_dist = label_distribution(small, sentiment());
    CHECK(small_dist[0].count == 12);
    CHECK(small_dist[1].count == 27);
    CHECK(small_dist[2].count == 21);

    LabelSchema leisure({"yes", "no"});
    auto essays = ingest("fixtures/corpus_essays_490.csv", CorpusFormat::csv, leisure);
    CHECK(essays.size() == 490);
    auto essay_dist = label_distribution(essays, leisure);
    CHECK(essay_dist[0].count == 337);
    CHECK(essay_dist[1].count == 153);
}

TEST_CASE("label_distribution requires gold everywhere and formats a table") {
    std::vector<LabeledText> corpus = {{"a", "x", "positive"}, {"b", "y", "positive"},
                                       {"c", "z", "negative"}};
    auto dist = label_distribution(corpus, sentiment());
    CHECK(dist[0].count == 2);
    CHECK(dist[1].count == 0);
    CHECK(dist[2].count == 1);
    const std::string text = distribution_text(dist);
    CHECK(text.find("positive") != std::string::npos);
    CHECK(text.find("66.67%") != std::string::npos);
    CHECK(text.find("total") != std::string::npos);

    corpus.push_back({"d", "w", std::nullopt});
    CHECK_THROWS_AS(label_distribution(corpus, sentiment()), DataError);
}

TEST_CASE("prompt set fixture files parse into validated plans") {
    auto tweets = load_prompt_set("fixtures/prompts_tweets.json");
    CHECK(tweets.task == "tweet_sentiment");
    CHECK(tweets.schema.labels() ==
          std::vector<std::string>{"positive", "neutral", "negative"});
    REQUIRE(tweets.plans.size() == 15);
    CHECK(tweets.plans[0].name == "01_Zero_shot1");
    CHECK(tweets.plans[0].strategy == Strategy::zero_shot);
    CHECK(tweets.plans[4].strategy == Strategy::one_shot);
    CHECK(tweets.plans[8].demonstrations.size() == 6);
    CHECK(tweets.plans[10].strategy == Strategy::chain_of_thought);
    REQUIRE(tweets.plans[10].reasoning_question.has_value());
    CHECK(tweets.plans[11].demonstrations.size() == 4);
    REQUIRE(tweets.plans[11].demonstrations[0].reasoning.has_value());
    CHECK(tweets.plans[12].strategy == Strategy::self_consistency);
    CHECK(tweets.plans[12].base_strategy == Strategy::zero_shot);
    CHECK(tweets.plans[12].paths == 5);
    CHECK(tweets.plan("14_self_consistency2").base_strategy == Strategy::one_shot);
    CHECK_THROWS_AS(tweets.plan("99_missing"), DataError);

    auto essays = load_prompt_set("fixtures/prompts_essays.json");
    CHECK(essays.schema.labels() == std::vector<std::string>{"yes", "no"});
    REQUIRE(essays.plans.size() == 15);
    CHECK(essays.plans[7].delimiter == "--- End of essay.");
    CHECK(essays.plans[8].demonstrations.size() == 7);
}

TEST_CASE("prompt set parsing rejects bad documents") {
    CHECK_THROWS_AS(parse_prompt_set("nonsense"), DataError);
    CHECK_THROWS_AS(parse_prompt_set(R"({"task": "t"})"), DataError);  // no labels/prompts

    // Duplicate names.
    CHECK_THROWS_AS(parse_prompt_set(R"({
        "task": "t", "labels": ["yes", "no"],
        "prompts": [
            {"name": "p", "strategy": "zero_shot", "system_prompt": "s", "question": "q"},
            {"name": "p", "strategy": "zero_shot", "system_prompt": "s", "question": "q"}
        ]})"),
                    DataError);

    // Plan violations are reported with the prompt name.
    try {
        parse_prompt_set(R"({
            "task": "t", "labels": ["yes", "no"],
            "prompts": [{"name": "broken", "strategy": "one_shot",
                         "system_prompt": "s", "question": "q"}]})");
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("broken") != std::string::npos);
    }

    // Synonyms flow into the schema.
    auto with_syn = parse_prompt_set(R"({
        "task": "t", "labels": ["yes", "no"], "synonyms": {"yep": "yes"},
        "prompts": [{"name": "p", "strategy": "zero_shot",
                     "system_prompt": "s", "question": "q"}]})");
    CHECK(with_syn.schema.resolve("YEP") == "yes");
}
