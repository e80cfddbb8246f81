#include "privmt/sanitize.hpp"

#include <algorithm>

#include "privmt/errors.hpp"

namespace privmt {

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::EntityBased: return "entity";
    case Strategy::DictionaryBased: return "dictionary";
    case Strategy::TagBased: return "tag";
  }
  return "?";
}

std::string_view to_string(Scenario s) {
  return s == Scenario::Explicit ? "explicit" : "implicit";
}

std::optional<Strategy> strategy_from(std::string_view name) {
  if (name == "entity") return Strategy::EntityBased;
  if (name == "dictionary" || name == "dict") return Strategy::DictionaryBased;
  if (name == "tag") return Strategy::TagBased;
  return std::nullopt;
}

std::optional<Scenario> scenario_from(std::string_view name) {
  if (name == "explicit") return Scenario::Explicit;
  if (name == "implicit") return Scenario::Implicit;
  return std::nullopt;
}

std::string_view to_string(SanitizeEventKind kind) {
  switch (kind) {
    case SanitizeEventKind::FallbackToTag: return "fallback_to_tag";
    case SanitizeEventKind::NoCandidate: return "no_candidate";
  }
  return "?";
}

TagTemplate TagTemplate::from_pattern(std::string_view pattern) {
  std::size_t slot = pattern.find("{n}");
  if (slot == std::string_view::npos) {
    throw ConfigError("tag template '" + std::string(pattern) +
                      "' has no {n} slot");
  }
  TagTemplate tag;
  tag.prefix = std::string(pattern.substr(0, slot));
  tag.suffix = std::string(pattern.substr(slot + 3));
  if (tag.prefix.empty()) {
    throw ConfigError("tag template must have a non-empty prefix");
  }
  return tag;
}

std::string TagTemplate::pattern() const { return prefix + "{n}" + suffix; }

Token TagTemplate::token(std::size_t ordinal) const {
  return prefix + std::to_string(ordinal) + suffix;
}

std::optional<std::size_t> TagTemplate::parse(const Token& token) const {
  if (!looks_like_tag(token)) return std::nullopt;
  std::string_view middle(token);
  middle.remove_prefix(prefix.size());
  middle.remove_suffix(suffix.size());
  if (middle.empty()) return std::nullopt;
  std::size_t value = 0;
  for (char c : middle) {
    if (c < '0' || c > '9') return std::nullopt;
    value = value * 10 + static_cast<std::size_t>(c - '0');
  }
  // Only the canonical spelling counts ("PINFO01" is not PINFO1).
  if (std::to_string(value) != middle) return std::nullopt;
  return value;
}

bool TagTemplate::looks_like_tag(const Token& token) const {
  return token.size() >= prefix.size() + suffix.size() &&
         token.compare(0, prefix.size(), prefix) == 0 &&
         token.compare(token.size() - suffix.size(), suffix.size(), suffix) == 0;
}

namespace {

void require_valid_spans(const TokenSeq& tokens,
                         const std::vector<PrivacySpan>& spans) {
  for (const PrivacySpan& span : spans) {
    if (span.length == 0) throw DatasetError("span length must be >= 1");
    if (span.start + span.length > tokens.size()) {
      throw DatasetError("span out of bounds");
    }
  }
  for (std::size_t i = 0; i < spans.size(); ++i) {
    for (std::size_t j = i + 1; j < spans.size(); ++j) {
      bool disjoint =
          spans[i].start + spans[i].length <= spans[j].start ||
          spans[j].start + spans[j].length <= spans[i].start;
      if (!disjoint) throw DatasetError("overlapping spans");
    }
  }
}

}  // namespace

SanitizationResult sanitize(const TokenSeq& src_tokens,
                            std::vector<PrivacySpan> spans, Strategy strategy,
                            Scenario scenario, const EntityLexicon* pool,
                            SplitMix64& rng, const SanitizeOptions& options) {
  require_valid_spans(src_tokens, spans);
  std::sort(spans.begin(), spans.end(),
            [](const PrivacySpan& a, const PrivacySpan& b) {
              return a.start < b.start;
            });

  std::unordered_set<Token> exclusion = options.extra_exclusion;
  for (const PrivacySpan& span : spans) {
    exclusion.insert(span.surface.begin(), span.surface.end());
  }

  SanitizationResult result;
  result.scenario = scenario;
  result.strategy = strategy;

  std::size_t cursor = 0;
  for (std::size_t ordinal = 0; ordinal < spans.size(); ++ordinal) {
    const PrivacySpan& span = spans[ordinal];
    while (cursor < span.start) result.sanitized.push_back(src_tokens[cursor++]);

    Replacement repl;
    repl.ordinal = ordinal;
    repl.original = span;
    repl.link = span.link;
    repl.sanitized_start = result.sanitized.size();

    if (strategy == Strategy::TagBased) {
      repl.placeholder = {options.tag.token(ordinal)};
    } else {
      std::optional<LexiconEntry> pick;
      if (pool) pick = pool->sample(span.type, exclusion, rng);
      if (pick) {
        repl.substitute = std::move(pick);
        repl.placeholder = repl.substitute->src;
      } else if (options.allow_tag_fallback) {
        repl.placeholder = {options.tag.token(ordinal)};
        result.events.push_back({ordinal, SanitizeEventKind::FallbackToTag});
      } else {
        result.events.push_back({ordinal, SanitizeEventKind::NoCandidate});
        throw DatasetError("no replacement candidate for type " +
                           std::string(to_string(span.type)) +
                           " and tag fallback is disabled");
      }
    }

    result.sanitized.insert(result.sanitized.end(), repl.placeholder.begin(),
                            repl.placeholder.end());
    result.replacements.push_back(std::move(repl));
    cursor = span.start + span.length;
  }
  while (cursor < src_tokens.size()) result.sanitized.push_back(src_tokens[cursor++]);
  return result;
}

TokenSeq restore_source(const SanitizationResult& result) {
  TokenSeq restored = result.sanitized;
  // Splice from the back so earlier placeholder positions stay valid.
  for (auto it = result.replacements.rbegin(); it != result.replacements.rend();
       ++it) {
    auto begin = restored.begin() + static_cast<std::ptrdiff_t>(it->sanitized_start);
    restored.erase(begin,
                   begin + static_cast<std::ptrdiff_t>(it->placeholder.size()));
    restored.insert(
        restored.begin() + static_cast<std::ptrdiff_t>(it->sanitized_start),
        it->original.surface.begin(), it->original.surface.end());
  }
  return restored;
}

std::vector<PrivacySpan> recognize(const TokenSeq& tokens,
                                   const EntityLexicon& gazetteer,
                                   const TypeFilter& filter) {
  std::vector<PrivacySpan> spans;
  std::uint32_t next_link = 0;
  std::size_t pos = 0;
  while (pos < tokens.size()) {
    std::size_t longest = std::min(gazetteer.max_src_tokens(), tokens.size() - pos);
    bool matched = false;
    for (std::size_t len = longest; len >= 1 && !matched; --len) {
      TokenSeq slice(tokens.begin() + static_cast<std::ptrdiff_t>(pos),
                     tokens.begin() + static_cast<std::ptrdiff_t>(pos + len));
      const LexiconEntry* entry = gazetteer.find(slice, filter);
      if (entry) {
        spans.push_back({std::move(slice), pos, len, entry->type, next_link++});
        pos += len;
        matched = true;
      }
    }
    if (!matched) ++pos;
  }
  return spans;
}

std::vector<PrivacySpan> inject_recognition_errors(
    std::vector<PrivacySpan> spans, double miss_rate, SplitMix64& rng) {
  if (miss_rate < 0.0 || miss_rate > 1.0) {
    throw ConfigError("miss rate must be in [0, 1]");
  }
  std::vector<PrivacySpan> kept;
  kept.reserve(spans.size());
  for (PrivacySpan& span : spans) {
    if (rng.next_unit() >= miss_rate) kept.push_back(std::move(span));
  }
  return kept;
}

}  // namespace privmt
