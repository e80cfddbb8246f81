#include <doctest.h>

#include <unordered_set>

#include "generators.hpp"
#include "privmt/errors.hpp"
#include "privmt/sanitize.hpp"

using namespace privmt;

namespace {

PrivacySpan span_at(const TokenSeq& tokens, std::size_t start,
                    std::size_t length, EntityType type, std::uint32_t link) {
  PrivacySpan span;
  span.start = start;
  span.length = length;
  span.type = type;
  span.link = link;
  span.surface.assign(tokens.begin() + static_cast<std::ptrdiff_t>(start),
                      tokens.begin() + static_cast<std::ptrdiff_t>(start + length));
  return span;
}

// Pool whose phrases reuse the sentence vocabulary, so the exclusion rule
// actually has work to do.
EntityLexicon overlapping_pool(std::uint64_t vocab) {
  std::vector<LexiconEntry> entries;
  for (std::uint64_t i = 0; i < vocab; ++i) {
    for (EntityType type : base_types()) {
      entries.push_back({{testgen::word("w", i)},
                         {testgen::word("w", (i + 1) % vocab)},
                         type,
                         1 + i % 3});
    }
  }
  return EntityLexicon::from_entries(std::move(entries));
}

}  // namespace

TEST_CASE("tag template: canonical spelling only") {
  TagTemplate tag;
  CHECK(tag.token(0) == "PINFO0");
  CHECK(tag.token(12) == "PINFO12");
  CHECK(tag.parse("PINFO0") == 0);
  CHECK(tag.parse("PINFO12") == 12);
  CHECK_FALSE(tag.parse("PINFO").has_value());
  CHECK_FALSE(tag.parse("PINFO01").has_value());
  CHECK_FALSE(tag.parse("PINFOx").has_value());
  CHECK_FALSE(tag.parse("pinfo1").has_value());
  CHECK(tag.looks_like_tag("PINFO"));
  CHECK(tag.looks_like_tag("PINFORMATION"));
  CHECK_FALSE(tag.looks_like_tag("INFO1"));

  TagTemplate bracketed = TagTemplate::from_pattern("<PINFO{n}>");
  CHECK(bracketed.token(3) == "<PINFO3>");
  CHECK(bracketed.parse("<PINFO3>") == 3);
  CHECK_FALSE(bracketed.parse("<PINFO3").has_value());
  CHECK_FALSE(bracketed.parse("PINFO3>").has_value());

  CHECK_THROWS_AS(TagTemplate::from_pattern("NOPLACEHOLDER"), ConfigError);
  CHECK_THROWS_AS(TagTemplate::from_pattern("{n}SUFFIXONLY"), ConfigError);
}

TEST_CASE("sanitize: tag strategy numbers spans left to right") {
  const TokenSeq src = {"苹果", "将", "在", "周五", "发布", "新品"};
  std::vector<PrivacySpan> spans = {
      span_at(src, 0, 1, EntityType::Organization, 0),
      span_at(src, 3, 1, EntityType::Time, 1)};
  SplitMix64 rng(1);
  auto result = sanitize(src, spans, Strategy::TagBased, Scenario::Explicit,
                         nullptr, rng);
  CHECK(result.sanitized ==
        TokenSeq{"PINFO0", "将", "在", "PINFO1", "发布", "新品"});
  REQUIRE(result.replacements.size() == 2);
  CHECK(result.replacements[0].placeholder == TokenSeq{"PINFO0"});
  CHECK(result.replacements[1].placeholder == TokenSeq{"PINFO1"});
  CHECK(result.replacements[1].sanitized_start == 3);
  CHECK(result.events.empty());
  CHECK(restore_source(result) == src);
}

TEST_CASE("sanitize: no spans means identity, any strategy") {
  const TokenSeq src = {"a", "b", "c"};
  for (Strategy strategy : {Strategy::EntityBased, Strategy::DictionaryBased,
                            Strategy::TagBased}) {
    SplitMix64 rng(4);
    auto result =
        sanitize(src, {}, strategy, Scenario::Explicit, nullptr, rng);
    CHECK(result.sanitized == src);
    CHECK(result.replacements.empty());
  }
}

TEST_CASE("sanitize: the five-span case study sentence") {
  const TokenSeq src = split_tokens(
      "联合国 国际 原子能 总署 （ IAEA ） 26 日 公布 报告 指出 ， 伊朗 已 开始 "
      "使用 先进 的 离心机 加速 生产 浓缩铀 ， 进一步 违反 2015 年 与 世界大国 "
      "达成 的 核 协议 。");
  REQUIRE(src.size() == 35);
  std::vector<PrivacySpan> spans = {
      span_at(src, 0, 4, EntityType::Organization, 0),
      span_at(src, 5, 1, EntityType::Organization, 1),
      span_at(src, 7, 1, EntityType::Time, 2),
      span_at(src, 13, 1, EntityType::Location, 3),
      span_at(src, 26, 1, EntityType::Time, 4)};
  SplitMix64 rng(1);
  auto result = sanitize(src, spans, Strategy::TagBased, Scenario::Explicit,
                         nullptr, rng);
  CHECK(result.sanitized == split_tokens(
      "PINFO0 （ PINFO1 ） PINFO2 日 公布 报告 指出 ， PINFO3 已 开始 使用 "
      "先进 的 离心机 加速 生产 浓缩铀 ， 进一步 违反 PINFO4 年 与 世界大国 "
      "达成 的 核 协议 。"));
  CHECK(restore_source(result) == src);
}

TEST_CASE("sanitize: rejects invalid spans") {
  const TokenSeq src = {"a", "b", "c"};
  SplitMix64 rng(1);
  std::vector<PrivacySpan> oob = {span_at(src, 1, 2, EntityType::Time, 0)};
  oob[0].length = 5;
  CHECK_THROWS_AS(sanitize(src, oob, Strategy::TagBased, Scenario::Explicit,
                           nullptr, rng),
                  DatasetError);
  std::vector<PrivacySpan> overlapping = {
      span_at(src, 0, 2, EntityType::Time, 0),
      span_at(src, 1, 2, EntityType::Time, 1)};
  CHECK_THROWS_AS(sanitize(src, overlapping, Strategy::TagBased,
                           Scenario::Explicit, nullptr, rng),
                  DatasetError);
}

TEST_CASE("sanitize: substitutes respect the exclusion rule") {
  SplitMix64 corpus_rng(77);
  const EntityLexicon pool = overlapping_pool(12);

  for (int round = 0; round < 100; ++round) {
    auto pair = testgen::random_pair(corpus_rng, "p" + std::to_string(round),
                                     {.vocab = 12});
    std::unordered_set<Token> privacy;
    for (const PrivacySpan& span : pair.src_spans) {
      privacy.insert(span.surface.begin(), span.surface.end());
    }
    std::unordered_set<Token> non_private;
    std::vector<bool> in_span(pair.src_tokens.size(), false);
    for (const PrivacySpan& span : pair.src_spans) {
      for (std::size_t k = 0; k < span.length; ++k) in_span[span.start + k] = true;
    }
    for (std::size_t i = 0; i < pair.src_tokens.size(); ++i) {
      if (!in_span[i]) non_private.insert(pair.src_tokens[i]);
    }

    for (Strategy strategy : {Strategy::EntityBased, Strategy::DictionaryBased,
                              Strategy::TagBased}) {
      SplitMix64 rng = derive_rng(42, pair.id);
      auto result = sanitize(pair.src_tokens, pair.src_spans, strategy,
                             Scenario::Explicit, &pool, rng);

      // Privacy tokens that never occur in the non-private part must be
      // gone from the sanitized sentence.
      for (const Token& token : privacy) {
        if (non_private.contains(token)) continue;
        for (const Token& out : result.sanitized) CHECK(out != token);
      }
      CHECK(restore_source(result) == pair.src_tokens);

      // Tag ordinals are exactly 0..k-1 in span order.
      if (strategy == Strategy::TagBased) {
        for (std::size_t i = 0; i < result.replacements.size(); ++i) {
          CHECK(result.replacements[i].placeholder ==
                TokenSeq{"PINFO" + std::to_string(i)});
        }
      }

      // Same inputs and seed reproduce the result bit for bit.
      SplitMix64 rng2 = derive_rng(42, pair.id);
      auto again = sanitize(pair.src_tokens, pair.src_spans, strategy,
                            Scenario::Explicit, &pool, rng2);
      CHECK(again == result);
    }
  }
}

TEST_CASE("sanitize: empty pool falls back to tags and records the event") {
  const TokenSeq src = {"a", "b"};
  std::vector<PrivacySpan> spans = {span_at(src, 0, 1, EntityType::Work, 0)};
  const EntityLexicon pool;  // nothing to sample

  SplitMix64 rng(3);
  auto result = sanitize(src, spans, Strategy::DictionaryBased,
                         Scenario::Explicit, &pool, rng);
  CHECK(result.sanitized == TokenSeq{"PINFO0", "b"});
  REQUIRE(result.events.size() == 1);
  CHECK(result.events[0].kind == SanitizeEventKind::FallbackToTag);
  CHECK_FALSE(result.replacements[0].substitute.has_value());

  SanitizeOptions no_fallback;
  no_fallback.allow_tag_fallback = false;
  SplitMix64 rng2(3);
  CHECK_THROWS_AS(sanitize(src, spans, Strategy::DictionaryBased,
                           Scenario::Explicit, &pool, rng2, no_fallback),
                  DatasetError);
}

TEST_CASE("recognize: greedy longest match, left to right") {
  std::vector<LexiconEntry> entries = {
      {{"United"}, {"u"}, EntityType::Location, 1},
      {{"United", "Nations"}, {"un"}, EntityType::Organization, 1},
      {{"Geneva"}, {"g"}, EntityType::Location, 1},
  };
  EntityLexicon gaz = EntityLexicon::from_entries(entries);

  SUBCASE("the longer phrase wins over its prefix") {
    TokenSeq sent = {"the", "United", "Nations", "met", "in", "Geneva"};
    auto spans = recognize(sent, gaz, all_types());
    REQUIRE(spans.size() == 2);
    CHECK(spans[0].surface == TokenSeq{"United", "Nations"});
    CHECK(spans[0].start == 1);
    CHECK(spans[0].type == EntityType::Organization);
    CHECK(spans[0].link == 0);
    CHECK(spans[1].surface == TokenSeq{"Geneva"});
    CHECK(spans[1].link == 1);
  }

  SUBCASE("type filter hides phrases") {
    TokenSeq sent = {"United", "Nations"};
    auto spans = recognize(sent, gaz, TypeFilter{EntityType::Location});
    REQUIRE(spans.size() == 1);
    CHECK(spans[0].surface == TokenSeq{"United"});  // org phrase filtered out
  }

  SUBCASE("empty gazetteer and zero-hit sentences") {
    CHECK(recognize({"a", "b"}, EntityLexicon(), all_types()).empty());
    CHECK(recognize({"no", "hits", "here"}, gaz, all_types()).empty());
  }
}

TEST_CASE("recognize agrees with a brute-force matcher on random input") {
  SplitMix64 rng(555);
  // A pile of 1-2 token phrases over a small vocabulary.
  std::vector<LexiconEntry> entries;
  for (int i = 0; i < 14; ++i) {
    TokenSeq src{testgen::word("w", rng.next_below(10))};
    if (rng.next_unit() < 0.5) src.push_back(testgen::word("w", rng.next_below(10)));
    TokenSeq tgt{testgen::word("t", static_cast<std::uint64_t>(i))};
    EntityType type = testgen::random_base_type(rng);
    bool duplicate = false;
    for (const auto& e : entries) {
      duplicate = duplicate || (e.src == src && e.type == type);
    }
    if (!duplicate) entries.push_back({src, tgt, type, 1});
  }
  EntityLexicon gaz = EntityLexicon::from_entries(entries);

  for (int round = 0; round < 200; ++round) {
    TokenSeq sent;
    const std::size_t len = rng.next_below(15);
    for (std::size_t i = 0; i < len; ++i) {
      sent.push_back(testgen::word("w", rng.next_below(10)));
    }

    // Oracle: enumerate every matching (pos, len) by direct comparison,
    // then walk greedily preferring longer matches.
    std::vector<PrivacySpan> expected;
    std::uint32_t link = 0;
    std::size_t pos = 0;
    while (pos < sent.size()) {
      std::size_t best = 0;
      const LexiconEntry* best_entry = nullptr;
      for (const LexiconEntry& e : gaz.all_entries()) {
        if (e.src.size() <= best || pos + e.src.size() > sent.size()) continue;
        bool match = true;
        for (std::size_t k = 0; k < e.src.size() && match; ++k) {
          match = sent[pos + k] == e.src[k];
        }
        if (match) {
          best = e.src.size();
          best_entry = &e;
        }
      }
      if (best_entry) {
        expected.push_back({best_entry->src, pos, best, best_entry->type, link++});
        pos += best;
      } else {
        ++pos;
      }
    }

    auto actual = recognize(sent, gaz, all_types());
    REQUIRE(actual.size() == expected.size());
    for (std::size_t i = 0; i < actual.size(); ++i) {
      CHECK(actual[i].start == expected[i].start);
      CHECK(actual[i].length == expected[i].length);
      CHECK(actual[i].surface == expected[i].surface);
      CHECK(actual[i].link == expected[i].link);
    }
  }
}

TEST_CASE("inject_recognition_errors: boundary rates and binomial behavior") {
  SplitMix64 seed_rng(9);
  std::vector<PrivacySpan> spans;
  for (int i = 0; i < 10000; ++i) {
    spans.push_back({{testgen::word("p", static_cast<std::uint64_t>(i))},
                     static_cast<std::size_t>(i),
                     1,
                     EntityType::PersonName,
                     static_cast<std::uint32_t>(i)});
  }

  SUBCASE("rate 0 keeps everything") {
    SplitMix64 rng(1);
    CHECK(inject_recognition_errors(spans, 0.0, rng).size() == spans.size());
  }
  SUBCASE("rate 1 drops everything") {
    SplitMix64 rng(1);
    CHECK(inject_recognition_errors(spans, 1.0, rng).empty());
  }
  SUBCASE("retained fraction tracks 1 - rate") {
    for (double rate : {0.1, 0.2, 0.3}) {
      SplitMix64 rng(seed_rng.next());
      auto kept = inject_recognition_errors(spans, rate, rng);
      const double fraction =
          static_cast<double>(kept.size()) / static_cast<double>(spans.size());
      CHECK(fraction == doctest::Approx(1.0 - rate).epsilon(0.025));
    }
  }
  SUBCASE("rate out of range") {
    SplitMix64 rng(1);
    CHECK_THROWS_AS(inject_recognition_errors(spans, -0.1, rng), ConfigError);
    CHECK_THROWS_AS(inject_recognition_errors(spans, 1.5, rng), ConfigError);
  }
}
