#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "privmt/corpus.hpp"
#include "privmt/lexicon.hpp"
#include "privmt/sanitize.hpp"

namespace privmt {

// Configuration for adaptive-training corpus construction. Only the
// dictionary and tag placeholder families take an adaptive corpus; the
// entity-based strategy already produces natural text and needs none.
struct AugmentSpec {
  Strategy strategy = Strategy::TagBased;
  bool mix_original = true;
  std::uint64_t seed = 0;
  TypeFilter types = base_types();
  // Fraction of original pairs mixed back in (1.0 = the full union).
  double original_ratio = 1.0;
  TagTemplate tag;
};

enum class AugmentEventKind { UnlinkedSpan, NoCandidate };

struct AugmentEvent {
  std::string pair_id;
  std::uint32_t link = 0;
  AugmentEventKind kind = AugmentEventKind::UnlinkedSpan;
};

std::string_view to_string(AugmentEventKind kind);

struct AugmentResult {
  std::vector<AnnotatedPair> pairs;
  std::vector<AugmentEvent> events;
};

// Rewrites each pair's linked spans consistently on both sides: the
// dictionary strategy replaces a linked span pair with one sampled lexicon
// entry of the same type (src side gets the entry's src phrase, tgt side
// its tgt phrase), the tag strategy puts the identical "PINFO<n>" token on
// both sides for link n. Unlinked spans and spans with no sampling
// candidate are left in place and logged. Span annotations are rewritten so
// the output validates under the dataset parser. Deterministic under
// spec.seed; preserves corpus length and pair ids.
AugmentResult build_adaptive_corpus(const std::vector<AnnotatedPair>& corpus,
                                    const EntityLexicon& lexicon,
                                    const AugmentSpec& spec);

// Concatenates replaced and original pairs and shuffles deterministically
// under spec.seed. The two inputs must be index-aligned (replaced[i]
// derives from original[i]). Replaced ids get a "-aug" suffix so the mixed
// corpus keeps the unique-id invariant. mix_original = false returns the
// replaced corpus unchanged.
std::vector<AnnotatedPair> mix_augment(std::vector<AnnotatedPair> replaced,
                                       const std::vector<AnnotatedPair>& original,
                                       const AugmentSpec& spec);

}  // namespace privmt
