#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "privmt/entity_type.hpp"
#include "privmt/rng.hpp"
#include "privmt/types.hpp"

namespace privmt {

struct LexiconEntry {
  TokenSeq src;
  TokenSeq tgt;
  EntityType type = EntityType::PersonName;
  std::uint64_t freq = 1;

  bool operator==(const LexiconEntry&) const = default;
};

// Typed bilingual entity entries plus the derived phrase table used for
// privacy translation. Immutable after construction. Entry order within a
// type is deterministic: descending freq, ties broken by lexicographic src
// phrase, so serialization and sampling are reproducible.
class EntityLexicon {
 public:
  EntityLexicon() = default;

  // Sorts into canonical order and builds the phrase table. Throws
  // DatasetError on empty phrases, zero freq, or duplicate (src, type).
  static EntityLexicon from_entries(std::vector<LexiconEntry> entries);

  // Entries of one type as a contiguous slice, in canonical order.
  std::span<const LexiconEntry> entries(EntityType type) const;
  const std::vector<LexiconEntry>& all_entries() const { return entries_; }

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::size_t max_src_tokens() const { return max_src_tokens_; }

  // Exact token-sequence match against the phrase table; no fuzzy matching.
  // When the same src phrase exists under several types, the entry that is
  // first in canonical type order wins.
  std::optional<TokenSeq> lookup(const TokenSeq& src) const;

  // The entry behind lookup(), or nullptr.
  const LexiconEntry* find(const TokenSeq& src) const;

  // First entry for src whose type passes the filter, or nullptr.
  const LexiconEntry* find(const TokenSeq& src, const TypeFilter& filter) const;

  // Uniform draw among entries of the requested type whose src and tgt
  // phrases share no token with the exclusion set. Returns nullopt when the
  // pool is empty after exclusion.
  std::optional<LexiconEntry> sample(
      EntityType type, const std::unordered_set<Token>& exclusion,
      SplitMix64& rng) const;

  // Tab-separated lines: type, src phrase, tgt phrase, freq.
  static EntityLexicon parse(std::istream& in);
  static EntityLexicon parse(std::string_view text);
  static EntityLexicon load(const std::string& path);
  void serialize(std::ostream& out) const;
  std::string serialize() const;

 private:
  std::vector<LexiconEntry> entries_;  // canonical order, grouped by type
  std::unordered_map<EntityType, std::pair<std::size_t, std::size_t>>
      type_ranges_;  // type -> [begin, end) into entries_
  std::unordered_map<std::string, std::vector<std::size_t>>
      by_src_;  // joined src phrase -> entry indices in canonical order
  std::size_t max_src_tokens_ = 0;
};

struct AlignedTriple {
  TokenSeq src;
  TokenSeq tgt;
  EntityType type = EntityType::PersonName;

  bool operator==(const AlignedTriple&) const = default;
};

// Tab-separated lines: type, src phrase, tgt phrase (one observation each).
std::vector<AlignedTriple> parse_aligned(std::istream& in);
std::vector<AlignedTriple> parse_aligned(std::string_view text);
std::vector<AlignedTriple> load_aligned(const std::string& path);

// Groups identical (src, tgt, type) observations and counts them, keeps the
// most frequent tgt per (src, type) (ties: lexicographically smallest tgt),
// then drops entries whose count is below min_freq. Permutation-invariant
// in the input order.
EntityLexicon build_dictionary(const std::vector<AlignedTriple>& aligned,
                               std::uint64_t min_freq);

}  // namespace privmt
