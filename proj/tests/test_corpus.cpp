#include <algorithm>
#include <set>

#include "doctest.h"
#include "revex/corpus.hpp"
#include "revex/rng.hpp"
#include "test_support.hpp"

using namespace revex;
using testutil::TempDir;

TEST_CASE("tokenize lowercases and splits on non-alphanumeric runs") {
    CHECK(tokenize("Save the Manatee!") ==
          std::vector<std::string>{"save", "the", "manatee"});
    CHECK(tokenize("").empty());
    CHECK(tokenize("boat-related harassment, injury") ==
          std::vector<std::string>{"boat", "related", "harassment", "injury"});
    CHECK(tokenize("A1 b2-c") == std::vector<std::string>{"a1", "b2", "c"});
    CHECK(tokenize("!!! ---") == std::vector<std::string>{});
}

TEST_CASE("tokenize is idempotent on its own joined output") {
    const std::string alphabet = "abcXYZ019 .,-!\n\t'\"";
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        std::string text;
        std::size_t len = rng.bounded(200);
        for (std::size_t i = 0; i < len; ++i) {
            text.push_back(alphabet[rng.bounded(alphabet.size())]);
        }
        auto tokens = tokenize(text);
        auto again = tokenize(join_tokens(tokens, 0, tokens.size()));
        CHECK(again == tokens);
    }
}

TEST_CASE("token_offsets parallels tokenize") {
    const std::string text = "Save the Manatee!";
    auto tokens = tokenize(text);
    auto offsets = token_offsets(text);
    REQUIRE(offsets.size() == tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        auto piece = text.substr(offsets[i].begin, offsets[i].end - offsets[i].begin);
        CHECK(tokenize(piece) == std::vector<std::string>{tokens[i]});
    }
    CHECK(offsets[2].begin == 9);
    CHECK(offsets[2].end == 16);
}

TEST_CASE("locate_rationale finds the first exact token match") {
    std::vector<std::string> doc{"a", "b", "c", "d"};
    auto span = locate_rationale(doc, "b c");
    REQUIRE(span.has_value());
    CHECK(*span == TokenSpan{1, 3});

    CHECK_FALSE(locate_rationale({"a", "b"}, "z").has_value());

    std::vector<std::string> repeated{"x", "y", "x", "y"};
    auto first = locate_rationale(repeated, "x y");
    REQUIRE(first.has_value());
    CHECK(*first == TokenSpan{0, 2});
}

TEST_CASE("locate_rationale returns a span with matching content") {
    Rng rng(23);
    std::vector<std::string> vocab{"aa", "bb", "cc", "dd", "ee"};
    for (int trial = 0; trial < 40; ++trial) {
        std::vector<std::string> doc(20 + rng.bounded(60));
        for (auto& t : doc) t = vocab[rng.bounded(vocab.size())];
        std::size_t a = rng.bounded(doc.size());
        std::size_t b = a + 1 + rng.bounded(doc.size() - a);
        auto span = locate_rationale(doc, join_tokens(doc, a, b));
        REQUIRE(span.has_value());
        REQUIRE(span->length() == b - a);
        for (std::size_t i = 0; i < span->length(); ++i) {
            CHECK(doc[span->start + i] == doc[a + i]);
        }
    }
}

TEST_CASE("filter_annotated applies the 10..249 token length rule") {
    auto span_of_length = [](std::size_t len) { return TokenSpan{0, len}; };
    std::vector<std::string> tokens(300, "w");
    Corpus corpus;
    corpus.documents.push_back(testutil::make_doc(
        "d1", tokens, Label::Responsive,
        {span_of_length(9), span_of_length(10), span_of_length(249), span_of_length(250)}));

    IngestSummary summary;
    Corpus filtered = filter_annotated(corpus, 10, 249, &summary);
    REQUIRE(filtered.documents.size() == 1);
    CHECK(filtered.documents[0].rationale_spans ==
          std::vector<TokenSpan>{span_of_length(10), span_of_length(249)});
    CHECK(summary.spans_dropped == 2);
    CHECK(summary.annotated_documents == 1);
    // text and label untouched
    CHECK(filtered.documents[0].raw_text == corpus.documents[0].raw_text);
    CHECK(filtered.documents[0].label == Label::Responsive);
}

TEST_CASE("filter_annotated drops documents from the annotated population only") {
    Corpus corpus;
    corpus.documents.push_back(
        testutil::make_doc("short", std::vector<std::string>(20, "w"), Label::Responsive,
                           {TokenSpan{0, 5}}));
    IngestSummary summary;
    Corpus filtered = filter_annotated(corpus, 10, 249, &summary);
    CHECK(filtered.documents.size() == 1);  // retained for training
    CHECK(filtered.documents[0].rationale_spans.empty());
    CHECK(summary.annotated_documents == 0);
}

TEST_CASE("make_folds stratifies and is deterministic") {
    Corpus corpus;
    for (int i = 0; i < 5; ++i) {
        corpus.documents.push_back(testutil::make_doc("r" + std::to_string(i), {"x"},
                                                      Label::Responsive));
        corpus.documents.push_back(testutil::make_doc("n" + std::to_string(i), {"y"},
                                                      Label::NotResponsive));
    }
    FoldAssignment folds = make_folds(corpus, 5, 99);
    REQUIRE(folds.fold_of.size() == 10);
    std::vector<int> responsive_per_fold(5, 0), not_per_fold(5, 0);
    for (const auto& doc : corpus.documents) {
        int f = folds.fold_of.at(doc.id);
        REQUIRE(f >= 0);
        REQUIRE(f < 5);
        (doc.label == Label::Responsive ? responsive_per_fold : not_per_fold)[f]++;
    }
    for (int f = 0; f < 5; ++f) {
        CHECK(responsive_per_fold[f] == 1);
        CHECK(not_per_fold[f] == 1);
    }

    FoldAssignment again = make_folds(corpus, 5, 99);
    CHECK(again.fold_of == folds.fold_of);

    FoldAssignment other = make_folds(corpus, 5, 100);
    CHECK(other.fold_of.size() == folds.fold_of.size());
}

TEST_CASE("make_folds rejects classes smaller than the fold count") {
    Corpus corpus;
    corpus.documents.push_back(testutil::make_doc("a", {"x"}, Label::Responsive));
    corpus.documents.push_back(testutil::make_doc("b", {"x"}, Label::Responsive));
    corpus.documents.push_back(testutil::make_doc("c", {"x"}, Label::NotResponsive));
    CHECK_THROWS_AS(make_folds(corpus, 5, 1), std::invalid_argument);
}

TEST_CASE("make_folds covers every id with balanced classes") {
    Rng rng(7);
    Corpus corpus;
    int responsive = 23, not_responsive = 41;
    for (int i = 0; i < responsive; ++i) {
        corpus.documents.push_back(
            testutil::make_doc("r" + std::to_string(i), {"x"}, Label::Responsive));
    }
    for (int i = 0; i < not_responsive; ++i) {
        corpus.documents.push_back(
            testutil::make_doc("n" + std::to_string(i), {"x"}, Label::NotResponsive));
    }
    int k = 5;
    FoldAssignment folds = make_folds(corpus, k, rng.next());
    CHECK(folds.fold_of.size() == corpus.documents.size());
    std::vector<int> resp(k, 0), nonresp(k, 0);
    for (const auto& doc : corpus.documents) {
        int f = folds.fold_of.at(doc.id);
        (doc.label == Label::Responsive ? resp : nonresp)[f]++;
    }
    auto spread = [](const std::vector<int>& counts) {
        auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
        return *hi - *lo;
    };
    CHECK(spread(resp) <= 1);
    CHECK(spread(nonresp) <= 1);
}

TEST_CASE("corpus jsonl ingestion locates rationales and counts results") {
    TempDir dir;
    std::string path = dir.file("corpus.jsonl");
    testutil::write_file(
        path,
        R"({"id":"d1","text":"Save the Manatee! The manatee needs help.","label":"responsive","rationales":["the manatee needs"]})"
        "\n"
        R"({"id":"d2","text":"quarterly budget meeting","label":"not_responsive"})"
        "\n"
        R"({"id":"d3","text":"unlabeled text here"})"
        "\n"
        R"({"id":"d4","text":"alpha beta gamma","label":"responsive","rationales":["missing words"]})"
        "\n");

    IngestSummary summary;
    Corpus corpus = load_corpus_jsonl(path, &summary);
    REQUIRE(corpus.documents.size() == 4);
    CHECK(summary.documents == 4);
    CHECK(summary.responsive == 2);
    CHECK(summary.not_responsive == 1);
    CHECK(summary.unlabeled == 1);
    CHECK(summary.rationales_located == 1);
    CHECK(summary.rationales_unlocated == 1);
    CHECK(corpus.documents[0].rationale_spans == std::vector<TokenSpan>{{3, 6}});
    CHECK(corpus.documents[3].rationale_spans.empty());
}

TEST_CASE("explicit rationale spans win over rationale strings") {
    TempDir dir;
    std::string path = dir.file("corpus.jsonl");
    testutil::write_file(
        path,
        R"({"id":"d1","text":"a b c d e","label":"responsive","rationales":["a b"],"rationale_spans":[[2,4]]})"
        "\n");
    Corpus corpus = load_corpus_jsonl(path);
    REQUIRE(corpus.documents.size() == 1);
    CHECK(corpus.documents[0].rationale_spans == std::vector<TokenSpan>{{2, 4}});
}

TEST_CASE("corpus jsonl rejects invariant violations") {
    TempDir dir;
    SUBCASE("rationales on a non-responsive document") {
        std::string path = dir.file("bad1.jsonl");
        testutil::write_file(
            path,
            R"({"id":"d1","text":"a b c","label":"not_responsive","rationale_spans":[[0,1]]})"
            "\n");
        CHECK_THROWS(load_corpus_jsonl(path));
    }
    SUBCASE("span out of bounds") {
        std::string path = dir.file("bad2.jsonl");
        testutil::write_file(
            path,
            R"({"id":"d1","text":"a b c","label":"responsive","rationale_spans":[[0,9]]})"
            "\n");
        CHECK_THROWS(load_corpus_jsonl(path));
    }
    SUBCASE("duplicate ids") {
        std::string path = dir.file("bad3.jsonl");
        testutil::write_file(path,
                             R"({"id":"d1","text":"a"})"
                             "\n"
                             R"({"id":"d1","text":"b"})"
                             "\n");
        CHECK_THROWS(load_corpus_jsonl(path));
    }
    SUBCASE("unknown label") {
        std::string path = dir.file("bad4.jsonl");
        testutil::write_file(path,
                             R"({"id":"d1","text":"a","label":"maybe"})"
                             "\n");
        CHECK_THROWS(load_corpus_jsonl(path));
    }
}

TEST_CASE("corpus jsonl save/load round trip is stable") {
    TempDir dir;
    Corpus corpus;
    corpus.documents.push_back(testutil::make_doc(
        "d1", {"alpha", "beta", "gamma", "delta"}, Label::Responsive, {TokenSpan{1, 3}}));
    corpus.documents.push_back(
        testutil::make_doc("d2", {"epsilon", "zeta"}, Label::NotResponsive));
    corpus.documents.push_back(testutil::make_doc("d3", {"eta"}));

    std::string first = dir.file("first.jsonl");
    save_corpus_jsonl(corpus, first);
    Corpus loaded = load_corpus_jsonl(first);
    REQUIRE(loaded.documents.size() == corpus.documents.size());
    for (std::size_t i = 0; i < corpus.documents.size(); ++i) {
        CHECK(loaded.documents[i].id == corpus.documents[i].id);
        CHECK(loaded.documents[i].tokens == corpus.documents[i].tokens);
        CHECK(loaded.documents[i].label == corpus.documents[i].label);
        CHECK(loaded.documents[i].rationale_spans == corpus.documents[i].rationale_spans);
    }

    std::string second = dir.file("second.jsonl");
    save_corpus_jsonl(loaded, second);
    CHECK(testutil::read_file(first) == testutil::read_file(second));
}
