#include "privmt/augment.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include "privmt/errors.hpp"
#include "privmt/rng.hpp"

namespace privmt {

std::string_view to_string(AugmentEventKind kind) {
  switch (kind) {
    case AugmentEventKind::UnlinkedSpan: return "unlinked_span";
    case AugmentEventKind::NoCandidate: return "no_candidate";
  }
  return "?";
}

namespace {

// Rewrites one side: spans in `surfaces` get their new surface spliced in,
// the rest stay; all span positions are recomputed.
std::pair<TokenSeq, std::vector<PrivacySpan>> rewrite_side(
    const TokenSeq& tokens, std::vector<PrivacySpan> spans,
    const std::unordered_map<std::uint32_t, TokenSeq>& surfaces) {
  std::sort(spans.begin(), spans.end(),
            [](const PrivacySpan& a, const PrivacySpan& b) {
              return a.start < b.start;
            });

  TokenSeq out_tokens;
  std::vector<PrivacySpan> out_spans;
  std::size_t cursor = 0;
  for (PrivacySpan& span : spans) {
    while (cursor < span.start) out_tokens.push_back(tokens[cursor++]);
    auto it = surfaces.find(span.link);
    const TokenSeq& surface = it != surfaces.end() ? it->second : span.surface;
    PrivacySpan rewritten = span;
    rewritten.surface = surface;
    rewritten.start = out_tokens.size();
    rewritten.length = surface.size();
    out_tokens.insert(out_tokens.end(), surface.begin(), surface.end());
    out_spans.push_back(std::move(rewritten));
    cursor = span.start + span.length;
  }
  while (cursor < tokens.size()) out_tokens.push_back(tokens[cursor++]);
  return {std::move(out_tokens), std::move(out_spans)};
}

}  // namespace

AugmentResult build_adaptive_corpus(const std::vector<AnnotatedPair>& corpus,
                                    const EntityLexicon& lexicon,
                                    const AugmentSpec& spec) {
  if (spec.strategy == Strategy::EntityBased) {
    throw ConfigError(
        "adaptive corpora are built for the dictionary and tag strategies only");
  }

  AugmentResult result;
  result.pairs.reserve(corpus.size());

  for (const AnnotatedPair& pair : corpus) {
    SplitMix64 rng = derive_rng(spec.seed, pair.id);

    std::unordered_map<std::uint32_t, const PrivacySpan*> tgt_by_link;
    for (const PrivacySpan& span : pair.tgt_spans) {
      tgt_by_link.emplace(span.link, &span);
    }
    std::unordered_set<std::uint32_t> src_links;
    for (const PrivacySpan& span : pair.src_spans) src_links.insert(span.link);

    std::unordered_set<Token> exclusion;
    for (const PrivacySpan& span : pair.src_spans) {
      exclusion.insert(span.surface.begin(), span.surface.end());
    }
    for (const PrivacySpan& span : pair.tgt_spans) {
      exclusion.insert(span.surface.begin(), span.surface.end());
    }

    // Linked spans of a filtered type, in source order, get replacements;
    // everything else stays and asymmetric spans are logged.
    std::unordered_map<std::uint32_t, TokenSeq> src_surfaces;
    std::unordered_map<std::uint32_t, TokenSeq> tgt_surfaces;
    std::size_t ordinal = 0;
    for (const PrivacySpan& span : pair.src_spans) {
      if (!spec.types.contains(span.type)) continue;
      auto linked = tgt_by_link.find(span.link);
      if (linked == tgt_by_link.end()) {
        result.events.push_back(
            {pair.id, span.link, AugmentEventKind::UnlinkedSpan});
        continue;
      }
      if (spec.strategy == Strategy::TagBased) {
        const Token tag = spec.tag.token(ordinal++);
        src_surfaces[span.link] = {tag};
        tgt_surfaces[span.link] = {tag};
      } else {
        auto entry = lexicon.sample(span.type, exclusion, rng);
        if (!entry) {
          result.events.push_back(
              {pair.id, span.link, AugmentEventKind::NoCandidate});
          continue;
        }
        src_surfaces[span.link] = entry->src;
        tgt_surfaces[span.link] = entry->tgt;
      }
    }
    for (const PrivacySpan& span : pair.tgt_spans) {
      if (spec.types.contains(span.type) && !src_links.contains(span.link)) {
        result.events.push_back(
            {pair.id, span.link, AugmentEventKind::UnlinkedSpan});
      }
    }

    AnnotatedPair rewritten;
    rewritten.id = pair.id;
    std::tie(rewritten.src_tokens, rewritten.src_spans) =
        rewrite_side(pair.src_tokens, pair.src_spans, src_surfaces);
    std::tie(rewritten.tgt_tokens, rewritten.tgt_spans) =
        rewrite_side(pair.tgt_tokens, pair.tgt_spans, tgt_surfaces);
    result.pairs.push_back(std::move(rewritten));
  }
  return result;
}

std::vector<AnnotatedPair> mix_augment(std::vector<AnnotatedPair> replaced,
                                       const std::vector<AnnotatedPair>& original,
                                       const AugmentSpec& spec) {
  if (!spec.mix_original) return replaced;
  if (replaced.size() != original.size()) {
    throw ConfigError("replaced and original corpora differ in length (" +
                      std::to_string(replaced.size()) + " vs " +
                      std::to_string(original.size()) + ")");
  }
  for (std::size_t i = 0; i < replaced.size(); ++i) {
    if (replaced[i].id != original[i].id) {
      throw ConfigError("replaced[" + std::to_string(i) +
                        "] does not derive from original[" + std::to_string(i) +
                        "] (ids '" + replaced[i].id + "' vs '" +
                        original[i].id + "')");
    }
  }
  if (spec.original_ratio < 0.0 || spec.original_ratio > 1.0) {
    throw ConfigError("original_ratio must be in [0, 1]");
  }

  SplitMix64 rng(spec.seed);

  // The replaced copy keeps distinct ids so the mixed corpus still has
  // unique pair ids.
  std::vector<AnnotatedPair> mixed = std::move(replaced);
  for (AnnotatedPair& pair : mixed) pair.id += "-aug";

  const auto take = static_cast<std::size_t>(std::llround(
      spec.original_ratio * static_cast<double>(original.size())));
  if (take >= original.size()) {
    mixed.insert(mixed.end(), original.begin(), original.end());
  } else {
    std::vector<std::size_t> indices(original.size());
    for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
    for (std::size_t i = indices.size(); i > 1; --i) {
      std::swap(indices[i - 1], indices[rng.next_below(i)]);
    }
    indices.resize(take);
    std::sort(indices.begin(), indices.end());
    for (std::size_t index : indices) mixed.push_back(original[index]);
  }

  for (std::size_t i = mixed.size(); i > 1; --i) {
    std::swap(mixed[i - 1], mixed[rng.next_below(i)]);
  }
  return mixed;
}

}  // namespace privmt
