#include "privmt/lexicon.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include "privmt/errors.hpp"

namespace privmt {

namespace {

// Canonical order: type (enum order), then descending freq, then
// lexicographic src phrase.
bool canonical_less(const LexiconEntry& a, const LexiconEntry& b) {
  if (a.type != b.type) return a.type < b.type;
  if (a.freq != b.freq) return a.freq > b.freq;
  return a.src < b.src;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t pos = 0;
  while (true) {
    std::size_t tab = line.find('\t', pos);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(pos));
      break;
    }
    fields.push_back(line.substr(pos, tab - pos));
    pos = tab + 1;
  }
  return fields;
}

}  // namespace

EntityLexicon EntityLexicon::from_entries(std::vector<LexiconEntry> entries) {
  for (const LexiconEntry& e : entries) {
    if (e.src.empty() || e.tgt.empty()) {
      throw DatasetError("lexicon entry with empty phrase");
    }
    if (e.freq < 1) {
      throw DatasetError("lexicon entry '" + join_tokens(e.src) +
                         "' has freq < 1");
    }
  }
  std::sort(entries.begin(), entries.end(), canonical_less);

  EntityLexicon lex;
  lex.entries_ = std::move(entries);
  for (std::size_t i = 0; i < lex.entries_.size(); ++i) {
    const LexiconEntry& e = lex.entries_[i];
    auto [it, inserted] = lex.type_ranges_.try_emplace(e.type, i, i + 1);
    if (!inserted) it->second.second = i + 1;
    lex.by_src_[join_tokens(e.src)].push_back(i);
    lex.max_src_tokens_ = std::max(lex.max_src_tokens_, e.src.size());
  }
  for (const auto& [key, indices] : lex.by_src_) {
    for (std::size_t i = 1; i < indices.size(); ++i) {
      if (lex.entries_[indices[i - 1]].type == lex.entries_[indices[i]].type) {
        throw DatasetError("duplicate src phrase '" + key + "' for type " +
                           std::string(to_string(lex.entries_[indices[i]].type)));
      }
    }
  }
  return lex;
}

std::span<const LexiconEntry> EntityLexicon::entries(EntityType type) const {
  auto it = type_ranges_.find(type);
  if (it == type_ranges_.end()) return {};
  return {entries_.data() + it->second.first,
          it->second.second - it->second.first};
}

std::optional<TokenSeq> EntityLexicon::lookup(const TokenSeq& src) const {
  const LexiconEntry* entry = find(src);
  if (!entry) return std::nullopt;
  return entry->tgt;
}

const LexiconEntry* EntityLexicon::find(const TokenSeq& src) const {
  auto it = by_src_.find(join_tokens(src));
  if (it == by_src_.end()) return nullptr;
  return &entries_[it->second.front()];
}

const LexiconEntry* EntityLexicon::find(const TokenSeq& src,
                                        const TypeFilter& filter) const {
  auto it = by_src_.find(join_tokens(src));
  if (it == by_src_.end()) return nullptr;
  for (std::size_t index : it->second) {
    if (filter.contains(entries_[index].type)) return &entries_[index];
  }
  return nullptr;
}

std::optional<LexiconEntry> EntityLexicon::sample(
    EntityType type, const std::unordered_set<Token>& exclusion,
    SplitMix64& rng) const {
  auto range = type_ranges_.find(type);
  if (range == type_ranges_.end()) return std::nullopt;

  std::vector<std::size_t> eligible;
  for (std::size_t i = range->second.first; i < range->second.second; ++i) {
    const LexiconEntry& e = entries_[i];
    auto clean = [&exclusion](const TokenSeq& phrase) {
      return std::none_of(phrase.begin(), phrase.end(), [&](const Token& t) {
        return exclusion.contains(t);
      });
    };
    if (clean(e.src) && clean(e.tgt)) eligible.push_back(i);
  }
  if (eligible.empty()) return std::nullopt;
  return entries_[eligible[rng.next_below(eligible.size())]];
}

EntityLexicon EntityLexicon::parse(std::istream& in) {
  std::vector<LexiconEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split_fields(line);
    if (fields.size() != 4) {
      throw DatasetError("expected 4 tab-separated fields, got " +
                             std::to_string(fields.size()),
                         line_no);
    }
    LexiconEntry entry;
    auto type = entity_type_from(fields[0]);
    if (!type) throw DatasetError("unknown entity type '" + fields[0] + "'", line_no);
    entry.type = *type;
    entry.src = split_tokens(fields[1]);
    entry.tgt = split_tokens(fields[2]);
    if (entry.src.empty() || entry.tgt.empty()) {
      throw DatasetError("empty phrase", line_no);
    }
    try {
      entry.freq = std::stoull(fields[3]);
    } catch (const std::exception&) {
      throw DatasetError("bad freq '" + fields[3] + "'", line_no);
    }
    if (entry.freq < 1) throw DatasetError("freq must be >= 1", line_no);
    entries.push_back(std::move(entry));
  }
  try {
    return from_entries(std::move(entries));
  } catch (const DatasetError& e) {
    throw DatasetError(std::string("lexicon: ") + e.what());
  }
}

EntityLexicon EntityLexicon::parse(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse(in);
}

EntityLexicon EntityLexicon::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open lexicon file '" + path + "'");
  return parse(in);
}

void EntityLexicon::serialize(std::ostream& out) const {
  for (const LexiconEntry& e : entries_) {
    out << to_string(e.type) << '\t' << join_tokens(e.src) << '\t'
        << join_tokens(e.tgt) << '\t' << e.freq << '\n';
  }
}

std::string EntityLexicon::serialize() const {
  std::ostringstream out;
  serialize(out);
  return out.str();
}

std::vector<AlignedTriple> parse_aligned(std::istream& in) {
  std::vector<AlignedTriple> triples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split_fields(line);
    if (fields.size() != 3) {
      throw DatasetError("expected 3 tab-separated fields, got " +
                             std::to_string(fields.size()),
                         line_no);
    }
    AlignedTriple triple;
    auto type = entity_type_from(fields[0]);
    if (!type) throw DatasetError("unknown entity type '" + fields[0] + "'", line_no);
    triple.type = *type;
    triple.src = split_tokens(fields[1]);
    triple.tgt = split_tokens(fields[2]);
    if (triple.src.empty() || triple.tgt.empty()) {
      throw DatasetError("empty phrase", line_no);
    }
    triples.push_back(std::move(triple));
  }
  return triples;
}

std::vector<AlignedTriple> parse_aligned(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_aligned(in);
}

std::vector<AlignedTriple> load_aligned(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open aligned-pair file '" + path + "'");
  return parse_aligned(in);
}

EntityLexicon build_dictionary(const std::vector<AlignedTriple>& aligned,
                               std::uint64_t min_freq) {
  // Count identical observations. std::map keys give a deterministic
  // grouping independent of input order.
  std::map<std::tuple<EntityType, TokenSeq, TokenSeq>, std::uint64_t> counts;
  for (const AlignedTriple& t : aligned) {
    if (t.src.empty() || t.tgt.empty()) {
      throw DatasetError("empty phrase in aligned input");
    }
    ++counts[{t.type, t.src, t.tgt}];
  }

  // Per (type, src), keep the most frequent tgt; ties go to the
  // lexicographically smallest tgt.
  std::map<std::pair<EntityType, TokenSeq>, std::pair<TokenSeq, std::uint64_t>>
      best;
  for (const auto& [key, freq] : counts) {
    const auto& [type, src, tgt] = key;
    auto [it, inserted] = best.try_emplace({type, src}, tgt, freq);
    if (!inserted) {
      auto& [best_tgt, best_freq] = it->second;
      if (freq > best_freq || (freq == best_freq && tgt < best_tgt)) {
        it->second = {tgt, freq};
      }
    }
  }

  std::vector<LexiconEntry> entries;
  for (const auto& [key, value] : best) {
    if (value.second < min_freq) continue;
    entries.push_back({key.second, value.first, key.first, value.second});
  }
  return EntityLexicon::from_entries(std::move(entries));
}

}  // namespace privmt
