#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "privmt/entity_type.hpp"
#include "privmt/types.hpp"

namespace privmt {

// One privacy term. Positions are token indices into the owning sentence;
// `surface` duplicates the covered tokens so a record is self-describing.
// `link` pairs a source span with its target-side counterpart; a span may
// have no counterpart (annotation asymmetry).
struct PrivacySpan {
  TokenSeq surface;
  std::size_t start = 0;
  std::size_t length = 0;
  EntityType type = EntityType::PersonName;
  std::uint32_t link = 0;

  bool operator==(const PrivacySpan&) const = default;
};

// A bilingual sentence pair with privacy spans on both sides.
struct AnnotatedPair {
  std::string id;
  TokenSeq src_tokens;
  TokenSeq tgt_tokens;
  std::vector<PrivacySpan> src_spans;
  std::vector<PrivacySpan> tgt_spans;

  bool operator==(const AnnotatedPair&) const = default;
};

struct Violation {
  enum class Code {
    SpanOutOfBounds,
    EmptySpan,
    SurfaceMismatch,
    Overlap,
    DuplicateLink,
    LinkTypeMismatch,
  };

  Code code;
  std::string side;        // "src" or "tgt"
  std::size_t span_index;  // index into the offending side's span list
  std::optional<std::size_t> other_index;  // second span for pairwise codes
  std::string detail;
};

std::string_view to_string(Violation::Code code);

// Reports every invariant violation; an empty report means the pair is
// valid. Pure: never mutates and never throws on bad data.
std::vector<Violation> validate_pair(const AnnotatedPair& pair);

// Line-delimited JSON records, one pair per line. Throws DatasetError with
// the offending line number on malformed input, invalid spans, or duplicate
// pair ids; every returned pair passes validate_pair.
std::vector<AnnotatedPair> parse_corpus(std::istream& in);
std::vector<AnnotatedPair> parse_corpus(std::string_view text);
std::vector<AnnotatedPair> load_corpus(const std::string& path);

void serialize_corpus(const std::vector<AnnotatedPair>& pairs,
                      std::ostream& out);
std::string serialize_corpus(const std::vector<AnnotatedPair>& pairs);

// One annotator's decision for one pair: whether the sentence pair contains
// privacy at all, and which candidate spans they accepted. Accepted keys use
// the "<side>:<start>:<length>" form and must be empty when the annotator
// marked the pair non-private.
struct AnnotatorJudgment {
  std::string annotator;
  std::string pair_id;
  bool sentence_private = false;
  std::set<std::string> accepted;
};

std::vector<AnnotatorJudgment> parse_judgments(std::istream& in);
std::vector<AnnotatorJudgment> parse_judgments(std::string_view text);
std::vector<AnnotatorJudgment> load_judgments(const std::string& path);

std::string span_key(std::string_view side, const PrivacySpan& span);

// Vote thresholds for aggregation. Defaults follow the annotation protocol:
// a pair is private iff strictly more than half the annotators say so, and
// a candidate becomes gold iff strictly more than `term_votes` accepted it.
struct VoteThresholds {
  double sentence_fraction = 0.5;
  int term_votes = 2;
};

// Aggregates multi-annotator judgments over a candidate pair (a pair whose
// span lists are the candidate spans offered to annotators). Returns the
// gold pair, or nullopt when the sentence vote discards it. Order of
// judgments does not matter. Throws DatasetError on judgments that
// reference unknown candidate keys, the wrong pair, or that accept spans
// while voting non-private.
std::optional<AnnotatedPair> aggregate_annotations(
    const AnnotatedPair& candidates,
    const std::vector<AnnotatorJudgment>& judgments,
    const VoteThresholds& thresholds = {});

}  // namespace privmt
