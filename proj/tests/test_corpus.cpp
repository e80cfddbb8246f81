#include <doctest.h>

#include <algorithm>

#include "generators.hpp"
#include "privmt/corpus.hpp"
#include "privmt/errors.hpp"

using namespace privmt;

TEST_CASE("parse_corpus: empty input yields an empty corpus") {
  CHECK(parse_corpus("").empty());
  CHECK(parse_corpus("\n\n").empty());
}

TEST_CASE("parse_corpus: record with organization and time spans") {
  const std::string line = R"({"id":"fig1","src":"苹果 将 在 周五 发布 新品",)"
                           R"("tgt":"Apple will launch new products on Friday",)"
                           R"("src_spans":[)"
                           R"({"surface":"苹果","start":0,"length":1,"type":"Organization","link":0},)"
                           R"({"surface":"周五","start":3,"length":1,"type":"Time","link":1}],)"
                           R"("tgt_spans":[)"
                           R"({"surface":"Apple","start":0,"length":1,"type":"Organization","link":0},)"
                           R"({"surface":"Friday","start":6,"length":1,"type":"Time","link":1}]})";
  auto pairs = parse_corpus(line);
  REQUIRE(pairs.size() == 1);
  const AnnotatedPair& pair = pairs[0];
  CHECK(pair.id == "fig1");
  CHECK(pair.src_tokens == TokenSeq{"苹果", "将", "在", "周五", "发布", "新品"});
  REQUIRE(pair.src_spans.size() == 2);
  CHECK(pair.src_spans[0].surface == TokenSeq{"苹果"});
  CHECK(pair.src_spans[0].type == EntityType::Organization);
  CHECK(pair.src_spans[0].start == 0);
  CHECK(pair.src_spans[1].surface == TokenSeq{"周五"});
  CHECK(pair.src_spans[1].type == EntityType::Time);
  CHECK(pair.src_spans[1].start == 3);
  CHECK(pair.src_spans[1].link == 1);
  CHECK(validate_pair(pair).empty());
}

TEST_CASE("parse_corpus: span past the end of the sentence is rejected") {
  const std::string line =
      R"({"id":"x","src":"a b c d e f","tgt":"g",)"
      R"("src_spans":[{"surface":"?","start":7,"length":1,"type":"Time","link":0}],)"
      R"("tgt_spans":[]})";
  CHECK_THROWS_WITH_AS(parse_corpus(line),
                       doctest::Contains("span out of bounds"), DatasetError);
}

TEST_CASE("parse_corpus: error diagnostics carry the line number") {
  const std::string good =
      R"({"id":"a","src":"x","tgt":"y","src_spans":[],"tgt_spans":[]})";
  SUBCASE("malformed json") {
    try {
      parse_corpus(good + "\n{oops\n");
      FAIL("expected DatasetError");
    } catch (const DatasetError& e) {
      CHECK(e.line() == 2);
    }
  }
  SUBCASE("duplicate id") {
    CHECK_THROWS_WITH_AS(parse_corpus(good + "\n" + good + "\n"),
                         doctest::Contains("duplicate pair id"), DatasetError);
  }
  SUBCASE("surface mismatch") {
    const std::string bad =
        R"({"id":"b","src":"x y","tgt":"z",)"
        R"("src_spans":[{"surface":"q","start":0,"length":1,"type":"Time","link":0}],)"
        R"("tgt_spans":[]})";
    CHECK_THROWS_WITH_AS(parse_corpus(bad),
                         doctest::Contains("surface/token mismatch"),
                         DatasetError);
  }
  SUBCASE("overlapping spans") {
    const std::string bad =
        R"({"id":"c","src":"x y z","tgt":"w","src_spans":[)"
        R"({"surface":"x y","start":0,"length":2,"type":"Time","link":0},)"
        R"({"surface":"y z","start":1,"length":2,"type":"Time","link":1}],)"
        R"("tgt_spans":[]})";
    CHECK_THROWS_WITH_AS(parse_corpus(bad), doctest::Contains("overlap"),
                         DatasetError);
  }
  SUBCASE("unknown entity type") {
    const std::string bad =
        R"({"id":"d","src":"x","tgt":"y",)"
        R"("src_spans":[{"surface":"x","start":0,"length":1,"type":"Widget","link":0}],)"
        R"("tgt_spans":[]})";
    CHECK_THROWS_WITH_AS(parse_corpus(bad),
                         doctest::Contains("unknown entity type"), DatasetError);
  }
}

TEST_CASE("validate_pair: reports every violation without mutating") {
  AnnotatedPair pair;
  pair.id = "v";
  pair.src_tokens = {"a", "b", "c", "d", "e"};
  pair.tgt_tokens = {"x", "y"};

  SUBCASE("well-formed pair has an empty report") {
    pair.src_spans = {{{"b"}, 1, 1, EntityType::Location, 0}};
    pair.tgt_spans = {{{"y"}, 1, 1, EntityType::Location, 0}};
    CHECK(validate_pair(pair).empty());
  }

  SUBCASE("two spans covering token 3 produce one overlap naming both") {
    pair.src_spans = {{{"c", "d"}, 2, 2, EntityType::Time, 0},
                      {{"d", "e"}, 3, 2, EntityType::Time, 1}};
    auto report = validate_pair(pair);
    REQUIRE(report.size() == 1);
    CHECK(report[0].code == Violation::Code::Overlap);
    CHECK(report[0].span_index == 0);
    CHECK(report[0].other_index == 1);
  }

  SUBCASE("linked spans with differing types") {
    pair.src_spans = {{{"a"}, 0, 1, EntityType::PersonName, 7}};
    pair.tgt_spans = {{{"x"}, 0, 1, EntityType::Location, 7}};
    auto report = validate_pair(pair);
    REQUIRE(report.size() == 1);
    CHECK(report[0].code == Violation::Code::LinkTypeMismatch);
  }

  SUBCASE("duplicate link within a side") {
    pair.src_spans = {{{"a"}, 0, 1, EntityType::Time, 3},
                      {{"c"}, 2, 1, EntityType::Time, 3}};
    auto report = validate_pair(pair);
    REQUIRE(report.size() == 1);
    CHECK(report[0].code == Violation::Code::DuplicateLink);
  }

  SUBCASE("validation is pure") {
    pair.src_spans = {{{"a"}, 0, 1, EntityType::Time, 3},
                      {{"c"}, 2, 1, EntityType::Time, 3}};
    AnnotatedPair copy = pair;
    auto first = validate_pair(pair);
    auto second = validate_pair(pair);
    CHECK(pair == copy);
    REQUIRE(first.size() == second.size());
    for (std::size_t i = 0; i < first.size(); ++i) {
      CHECK(first[i].code == second[i].code);
      CHECK(first[i].span_index == second[i].span_index);
    }
  }
}

TEST_CASE("corpus round-trip: parse after serialize is the identity") {
  SplitMix64 rng(2024);
  auto corpus = testgen::random_corpus(rng, 60);
  auto reparsed = parse_corpus(serialize_corpus(corpus));
  CHECK(reparsed == corpus);
}

namespace {

AnnotatedPair candidate_pair() {
  AnnotatedPair pair;
  pair.id = "cand";
  pair.src_tokens = {"alpha", "beta", "gamma", "delta"};
  pair.tgt_tokens = {"one", "two", "three"};
  pair.src_spans = {{{"alpha"}, 0, 1, EntityType::PersonName, 0},
                    {{"gamma"}, 2, 1, EntityType::Location, 1}};
  pair.tgt_spans = {{{"one"}, 0, 1, EntityType::PersonName, 0}};
  return pair;
}

AnnotatorJudgment judge(std::string annotator, bool sentence_private,
                        std::set<std::string> accepted = {}) {
  return {std::move(annotator), "cand", sentence_private, std::move(accepted)};
}

}  // namespace

TEST_CASE("aggregate_annotations: majority sentence vote and term threshold") {
  const AnnotatedPair cand = candidate_pair();

  SUBCASE("3 of 5 private, span accepted by 3 becomes gold") {
    std::vector<AnnotatorJudgment> judgments = {
        judge("a1", true, {"src:0:1"}), judge("a2", true, {"src:0:1"}),
        judge("a3", true, {"src:0:1"}), judge("a4", false), judge("a5", false)};
    auto gold = aggregate_annotations(cand, judgments);
    REQUIRE(gold.has_value());
    REQUIRE(gold->src_spans.size() == 1);
    CHECK(gold->src_spans[0].surface == TokenSeq{"alpha"});
    CHECK(gold->tgt_spans.empty());
  }

  SUBCASE("2 of 4 private is not a strict majority") {
    std::vector<AnnotatorJudgment> judgments = {
        judge("a1", true, {"src:0:1"}), judge("a2", true, {"src:0:1"}),
        judge("a3", false), judge("a4", false)};
    CHECK_FALSE(aggregate_annotations(cand, judgments).has_value());
  }

  SUBCASE("5 private but a span accepted by exactly 2 is not gold") {
    std::vector<AnnotatorJudgment> judgments = {
        judge("a1", true, {"src:0:1", "src:2:1"}),
        judge("a2", true, {"src:0:1", "src:2:1"}),
        judge("a3", true, {"src:0:1"}), judge("a4", true, {"src:0:1"}),
        judge("a5", true)};
    auto gold = aggregate_annotations(cand, judgments);
    REQUIRE(gold.has_value());
    REQUIRE(gold->src_spans.size() == 1);
    CHECK(gold->src_spans[0].surface == TokenSeq{"alpha"});
  }

  SUBCASE("a lower term threshold admits the same span") {
    std::vector<AnnotatorJudgment> judgments = {
        judge("a1", true, {"src:2:1"}), judge("a2", true, {"src:2:1"}),
        judge("a3", true)};
    VoteThresholds thresholds;
    thresholds.term_votes = 1;
    auto gold = aggregate_annotations(cand, judgments, thresholds);
    REQUIRE(gold.has_value());
    REQUIRE(gold->src_spans.size() == 1);
    CHECK(gold->src_spans[0].surface == TokenSeq{"gamma"});
  }

  SUBCASE("unknown candidate key is an error") {
    std::vector<AnnotatorJudgment> judgments = {judge("a1", true, {"src:9:1"})};
    CHECK_THROWS_WITH_AS(aggregate_annotations(cand, judgments),
                         doctest::Contains("unknown candidate"), DatasetError);
  }

  SUBCASE("accepting spans while voting non-private is an error") {
    std::vector<AnnotatorJudgment> judgments = {
        judge("a1", false, {"src:0:1"}), judge("a2", true)};
    CHECK_THROWS_AS(aggregate_annotations(cand, judgments), DatasetError);
  }
}

TEST_CASE("aggregate_annotations: permutation invariance and count replay") {
  const AnnotatedPair cand = candidate_pair();
  SplitMix64 rng(99);

  for (int round = 0; round < 50; ++round) {
    const std::size_t n = 3 + rng.next_below(3);  // 3-5 annotators
    std::vector<AnnotatorJudgment> judgments;
    for (std::size_t a = 0; a < n; ++a) {
      bool is_private = rng.next_unit() < 0.6;
      std::set<std::string> accepted;
      if (is_private) {
        if (rng.next_unit() < 0.7) accepted.insert("src:0:1");
        if (rng.next_unit() < 0.5) accepted.insert("src:2:1");
        if (rng.next_unit() < 0.5) accepted.insert("tgt:0:1");
      }
      judgments.push_back(
          judge("a" + std::to_string(a), is_private, std::move(accepted)));
    }

    auto gold = aggregate_annotations(cand, judgments);

    std::vector<AnnotatorJudgment> shuffled = judgments;
    for (std::size_t i = shuffled.size(); i > 1; --i) {
      std::swap(shuffled[i - 1], shuffled[rng.next_below(i)]);
    }
    auto gold_again = aggregate_annotations(cand, shuffled);
    CHECK(gold_again == gold);

    // Replay the accept counts against the threshold for every kept span.
    if (gold) {
      for (const PrivacySpan& span : gold->src_spans) {
        int count = 0;
        for (const auto& j : judgments) {
          count += j.accepted.contains(span_key("src", span)) ? 1 : 0;
        }
        CHECK(count > 2);
      }
    }
  }
}

TEST_CASE("parse_judgments: judgment line format") {
  const std::string text =
      R"({"annotator":"a1","pair_id":"p","private":true,"accepted":["src:0:1","tgt:2:2"]})"
      "\n"
      R"({"annotator":"a2","pair_id":"p","private":false,"accepted":[]})"
      "\n";
  auto judgments = parse_judgments(text);
  REQUIRE(judgments.size() == 2);
  CHECK(judgments[0].annotator == "a1");
  CHECK(judgments[0].sentence_private);
  CHECK(judgments[0].accepted == std::set<std::string>{"src:0:1", "tgt:2:2"});
  CHECK_FALSE(judgments[1].sentence_private);
  CHECK(judgments[1].accepted.empty());
}
