#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "privmt/corpus.hpp"
#include "privmt/lexicon.hpp"
#include "privmt/rng.hpp"

namespace privmt {

enum class Strategy { EntityBased, DictionaryBased, TagBased };
enum class Scenario { Explicit, Implicit };

std::string_view to_string(Strategy s);
std::string_view to_string(Scenario s);
std::optional<Strategy> strategy_from(std::string_view name);
std::optional<Scenario> scenario_from(std::string_view name);

// Placeholder tag shape. The default produces the single token "PINFO<n>";
// a pattern like "<PINFO{n}>" yields bracketed tags instead. parse() accepts
// only the canonical spelling ("PINFO07" is not a tag, it is malformed).
struct TagTemplate {
  std::string prefix = "PINFO";
  std::string suffix;

  static TagTemplate from_pattern(std::string_view pattern);  // "PINFO{n}"
  std::string pattern() const;

  Token token(std::size_t ordinal) const;
  std::optional<std::size_t> parse(const Token& token) const;
  // Shape check only: prefix and suffix match, regardless of the middle.
  bool looks_like_tag(const Token& token) const;
};

// One span replacement. placeholder occupies
// [sanitized_start, sanitized_start + placeholder.size()) in the sanitized
// sentence. substitute is set for entity/dictionary replacements and empty
// for tags (including tag fallbacks).
struct Replacement {
  std::size_t ordinal = 0;
  PrivacySpan original;
  TokenSeq placeholder;
  std::optional<LexiconEntry> substitute;
  std::uint32_t link = 0;
  std::size_t sanitized_start = 0;

  bool operator==(const Replacement&) const = default;
};

enum class SanitizeEventKind { FallbackToTag, NoCandidate };

struct SanitizeEvent {
  std::size_t ordinal;
  SanitizeEventKind kind;

  bool operator==(const SanitizeEvent&) const = default;
};

std::string_view to_string(SanitizeEventKind kind);

struct SanitizeOptions {
  TagTemplate tag;
  // When a sampling pool is empty the span falls back to a tag placeholder
  // and the fallback is recorded; with fallback disabled it is an error.
  bool allow_tag_fallback = true;
  // Extra tokens the sampled substitutes must avoid, beyond the union of
  // this sentence's span tokens (e.g. the known target-side privacy tokens).
  std::unordered_set<Token> extra_exclusion;
};

struct SanitizationResult {
  TokenSeq sanitized;
  std::vector<Replacement> replacements;  // sorted by original.start
  Scenario scenario = Scenario::Explicit;
  Strategy strategy = Strategy::TagBased;
  std::vector<SanitizeEvent> events;

  bool operator==(const SanitizationResult&) const = default;
};

// Replaces each span left-to-right. Tag placeholders are numbered 0..k-1 in
// span order. Entity/dictionary substitutes are drawn from `pool` (the full
// lexicon for EntityBased, the frequency-filtered dictionary for
// DictionaryBased) with the exclusion rule: a substitute may not share any
// token with a privacy span of this sentence, so sanitization can never
// reintroduce a privacy token. Throws DatasetError on invalid spans.
SanitizationResult sanitize(const TokenSeq& src_tokens,
                            std::vector<PrivacySpan> spans, Strategy strategy,
                            Scenario scenario, const EntityLexicon* pool,
                            SplitMix64& rng, const SanitizeOptions& options = {});

// Splices every original span back over its placeholder; inverse of
// sanitize on the token level.
TokenSeq restore_source(const SanitizationResult& result);

// Greedy longest-match, left-to-right, non-overlapping gazetteer matching.
// Emitted spans get fresh link ids 0,1,... in sentence order.
std::vector<PrivacySpan> recognize(const TokenSeq& tokens,
                                   const EntityLexicon& gazetteer,
                                   const TypeFilter& filter);

// Drops each span independently with probability miss_rate; deterministic
// under the given rng. Throws ConfigError when the rate is out of [0, 1].
std::vector<PrivacySpan> inject_recognition_errors(
    std::vector<PrivacySpan> spans, double miss_rate, SplitMix64& rng);

}  // namespace privmt
