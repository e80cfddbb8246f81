#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "privmt/corpus.hpp"
#include "privmt/lexicon.hpp"
#include "privmt/sanitize.hpp"

namespace privmt {

// The server side of the boundary. A backend only ever sees the sanitized
// token sequence and the pair id; spans, lexicons, and transcripts stay on
// the client side. Implementations must tolerate concurrent calls.
class TranslationBackend {
 public:
  virtual ~TranslationBackend() = default;
  virtual TokenSeq translate(const std::string& id,
                             const TokenSeq& tokens) const = 0;
  virtual std::string name() const = 0;
};

class IdentityBackend final : public TranslationBackend {
 public:
  TokenSeq translate(const std::string&, const TokenSeq& tokens) const override {
    return tokens;
  }
  std::string name() const override { return "identity"; }
};

// Deterministic word-for-word translation through a bilingual word table.
// A table value may expand to several tokens. Tokens shaped like the tag
// template pass through unchanged; unknown tokens are copied.
class TableBackend final : public TranslationBackend {
 public:
  TableBackend() = default;
  TableBackend(std::unordered_map<Token, TokenSeq> table, TagTemplate tag)
      : table_(std::move(table)), tag_(std::move(tag)) {}

  // Tab-separated lines: src word, tgt word(s). Duplicate src is an error.
  static TableBackend parse(std::istream& in, TagTemplate tag = {});
  static TableBackend load(const std::string& path, TagTemplate tag = {});

  TokenSeq translate(const std::string&, const TokenSeq& tokens) const override;
  std::string name() const override { return "table"; }

 private:
  std::unordered_map<Token, TokenSeq> table_;
  TagTemplate tag_;
};

// Speaks the wire protocol: HTTP POST <base-url>/translate with
// {"id": ..., "src": [...]} and expects {"id": ..., "tgt": [...]}. Retries
// transport failures with exponential backoff, then throws BackendError.
class RemoteBackend final : public TranslationBackend {
 public:
  explicit RemoteBackend(std::string base_url, int retries = 2,
                         int backoff_ms = 100);

  TokenSeq translate(const std::string& id,
                     const TokenSeq& tokens) const override;
  std::string name() const override { return "remote"; }

 private:
  std::string base_url_;
  int retries_;
  int backoff_ms_;
};

struct TranscriptEntry {
  TokenSeq sent;
  TokenSeq received;

  bool operator==(const TranscriptEntry&) const = default;
};

// The exact record of what crossed the client/server boundary, keyed by
// pair id, append-once. This is the sole input to PER: leakage is measured
// from what was actually transmitted, not from intended sanitization.
class BoundaryTranscript {
 public:
  void record(const std::string& pair_id, TranscriptEntry entry);
  const TranscriptEntry& at(const std::string& pair_id) const;
  bool contains(const std::string& pair_id) const;
  std::size_t size() const;

  // Sorted by pair id.
  std::vector<std::pair<std::string, TranscriptEntry>> sorted_entries() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, TranscriptEntry> entries_;
};

enum class Provenance { TableHit, CopyThrough };

std::string_view to_string(Provenance p);

// Client-local translation of one privacy span. CopyThrough means the span
// was absent from the phrase table and its surface is passed through.
struct PrivacyTranslation {
  std::uint32_t link = 0;
  TokenSeq src_surface;
  TokenSeq tgt_tokens;
  Provenance provenance = Provenance::CopyThrough;

  bool operator==(const PrivacyTranslation&) const = default;
};

// Looks up each replacement's original surface in the phrase table. Output
// index i corresponds to replacement ordinal i.
std::vector<PrivacyTranslation> translate_privacy(
    const std::vector<Replacement>& replacements, const EntityLexicon& table);

enum class MissReason { PlaceholderAbsent, SubstituteTranslationNotFound };

std::string_view to_string(MissReason r);

struct MergeMiss {
  std::size_t ordinal;
  MissReason reason;
};

struct MergeOutcome {
  TokenSeq final_tokens;
  std::size_t substitutions_made = 0;
  std::vector<MergeMiss> misses;
};

// Replaces each "PINFO<n>" token in the model output with the privacy
// translation for ordinal n, at every occurrence. A replacement whose
// placeholder never occurs is a miss and its translation is dropped (an
// arbitrary insertion point would corrupt word order). Tokens that look
// like a tag but do not parse, or whose ordinal has no replacement, raise
// MergeError. Non-placeholder tokens are never touched.
MergeOutcome merge_tag(const TokenSeq& mt_output,
                       const std::vector<Replacement>& replacements,
                       const std::vector<PrivacyTranslation>& translations,
                       const TagTemplate& tag = {});

// For each replacement in ordinal order, finds the leftmost not-yet-consumed
// exact occurrence of the substitute's tgt phrase in the model output and
// splices in the privacy translation. Consumed regions (matched or spliced)
// cannot be matched twice. Replacements that fell back to a tag are merged
// by tag within the same pass.
MergeOutcome merge_substitute(
    const TokenSeq& mt_output, const std::vector<Replacement>& replacements,
    const std::vector<PrivacyTranslation>& translations,
    const TagTemplate& tag = {});

struct GatewayOptions {
  TagTemplate tag;
  TypeFilter types = base_types();
  // Implicit scenario only: simulated recognizer miss rate.
  double miss_rate = 0.0;
  bool allow_tag_fallback = true;
};

struct SentenceOutcome {
  TokenSeq final_tokens;
  TranscriptEntry transcript;
  SanitizationResult sanitation;
  std::vector<PrivacyTranslation> privacy_translations;
  MergeOutcome merge;
  // Spans that drove sanitization: gold (filtered) in the explicit
  // scenario, recognizer output in the implicit scenario.
  std::vector<PrivacySpan> active_spans;
};

// The full client-side pipeline for one sentence: select spans, sanitize,
// send across the boundary, translate privacy locally, merge. The backend
// receives exactly the sanitized tokens, nothing else.
SentenceOutcome run_sentence(const AnnotatedPair& pair, Scenario scenario,
                             Strategy strategy,
                             const TranslationBackend& backend,
                             const EntityLexicon* entity_pool,
                             const EntityLexicon& table,
                             const EntityLexicon* gazetteer, SplitMix64 rng,
                             const GatewayOptions& options = {});

}  // namespace privmt
