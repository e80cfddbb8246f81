#include "privmt/gateway.hpp"

#include <chrono>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "privmt/errors.hpp"

namespace privmt {

using nlohmann::json;

TableBackend TableBackend::parse(std::istream& in, TagTemplate tag) {
  std::unordered_map<Token, TokenSeq> table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      throw DatasetError("expected 2 tab-separated fields", line_no);
    }
    Token src = line.substr(0, tab);
    TokenSeq tgt = split_tokens(line.substr(tab + 1));
    if (src.empty() || tgt.empty()) throw DatasetError("empty word", line_no);
    if (!table.emplace(std::move(src), std::move(tgt)).second) {
      throw DatasetError("duplicate source word", line_no);
    }
  }
  return TableBackend(std::move(table), std::move(tag));
}

TableBackend TableBackend::load(const std::string& path, TagTemplate tag) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open word table '" + path + "'");
  return parse(in, std::move(tag));
}

TokenSeq TableBackend::translate(const std::string&,
                                 const TokenSeq& tokens) const {
  TokenSeq out;
  out.reserve(tokens.size());
  for (const Token& token : tokens) {
    if (tag_.looks_like_tag(token)) {
      out.push_back(token);
      continue;
    }
    auto it = table_.find(token);
    if (it == table_.end()) {
      out.push_back(token);
    } else {
      out.insert(out.end(), it->second.begin(), it->second.end());
    }
  }
  return out;
}

RemoteBackend::RemoteBackend(std::string base_url, int retries, int backoff_ms)
    : base_url_(std::move(base_url)),
      retries_(retries),
      backoff_ms_(backoff_ms) {}

TokenSeq RemoteBackend::translate(const std::string& id,
                                  const TokenSeq& tokens) const {
  json request{{"id", id}, {"src", tokens}};
  const std::string body = request.dump();

  std::string last_error;
  for (int attempt = 0; attempt <= retries_; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(
          std::chrono::milliseconds(backoff_ms_ << (attempt - 1)));
    }
    httplib::Client client(base_url_);
    auto res = client.Post("/translate", body, "application/json");
    if (!res) {
      last_error = "transport: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "status " + std::to_string(res->status);
      continue;
    }
    try {
      json response = json::parse(res->body);
      return response.at("tgt").get<TokenSeq>();
    } catch (const json::exception& e) {
      last_error = std::string("bad response body: ") + e.what();
    }
  }
  throw BackendError("translate failed for pair '" + id + "' after " +
                     std::to_string(retries_ + 1) + " attempts (" + last_error +
                     ")");
}

void BoundaryTranscript::record(const std::string& pair_id,
                                TranscriptEntry entry) {
  std::lock_guard lock(mutex_);
  if (!entries_.emplace(pair_id, std::move(entry)).second) {
    throw DatasetError("transcript already has an entry for pair '" + pair_id +
                       "'");
  }
}

const TranscriptEntry& BoundaryTranscript::at(const std::string& pair_id) const {
  std::lock_guard lock(mutex_);
  return entries_.at(pair_id);
}

bool BoundaryTranscript::contains(const std::string& pair_id) const {
  std::lock_guard lock(mutex_);
  return entries_.contains(pair_id);
}

std::size_t BoundaryTranscript::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

std::vector<std::pair<std::string, TranscriptEntry>>
BoundaryTranscript::sorted_entries() const {
  std::lock_guard lock(mutex_);
  return {entries_.begin(), entries_.end()};
}

std::string_view to_string(Provenance p) {
  return p == Provenance::TableHit ? "table_hit" : "copy_through";
}

std::string_view to_string(MissReason r) {
  return r == MissReason::PlaceholderAbsent
             ? "placeholder_absent"
             : "substitute_translation_not_found";
}

std::vector<PrivacyTranslation> translate_privacy(
    const std::vector<Replacement>& replacements, const EntityLexicon& table) {
  std::vector<PrivacyTranslation> out;
  out.reserve(replacements.size());
  for (const Replacement& repl : replacements) {
    PrivacyTranslation t;
    t.link = repl.link;
    t.src_surface = repl.original.surface;
    if (auto tgt = table.lookup(repl.original.surface)) {
      t.tgt_tokens = std::move(*tgt);
      t.provenance = Provenance::TableHit;
    } else {
      t.tgt_tokens = repl.original.surface;
      t.provenance = Provenance::CopyThrough;
    }
    out.push_back(std::move(t));
  }
  return out;
}

namespace {

struct Cell {
  Token token;
  bool consumed;
};

// Shared merge engine. Tag replacements splice at every unconsumed
// occurrence of their tag token; substitute replacements consume the
// leftmost unconsumed occurrence of the substitute's tgt phrase. Spliced
// regions are consumed and can never be matched again.
MergeOutcome merge_impl(const TokenSeq& mt_output,
                        const std::vector<Replacement>& replacements,
                        const std::vector<PrivacyTranslation>& translations,
                        const TagTemplate& tag) {
  if (translations.size() != replacements.size()) {
    throw MergeError("have " + std::to_string(translations.size()) +
                     " privacy translations for " +
                     std::to_string(replacements.size()) + " replacements");
  }

  for (const Token& token : mt_output) {
    if (!tag.looks_like_tag(token)) continue;
    auto ordinal = tag.parse(token);
    if (!ordinal) throw MergeError("malformed placeholder token '" + token + "'");
    if (*ordinal >= replacements.size() ||
        replacements[*ordinal].substitute.has_value()) {
      throw MergeError("placeholder '" + token + "' has no tag replacement");
    }
  }

  std::vector<Cell> cells;
  cells.reserve(mt_output.size());
  for (const Token& token : mt_output) cells.push_back({token, false});

  auto splice = [&cells](std::size_t pos, std::size_t len,
                         const TokenSeq& insert) {
    cells.erase(cells.begin() + static_cast<std::ptrdiff_t>(pos),
                cells.begin() + static_cast<std::ptrdiff_t>(pos + len));
    std::vector<Cell> inserted;
    inserted.reserve(insert.size());
    for (const Token& token : insert) inserted.push_back({token, true});
    cells.insert(cells.begin() + static_cast<std::ptrdiff_t>(pos),
                 inserted.begin(), inserted.end());
  };

  MergeOutcome outcome;
  for (std::size_t i = 0; i < replacements.size(); ++i) {
    const Replacement& repl = replacements[i];
    const TokenSeq& insert = translations[i].tgt_tokens;

    if (!repl.substitute.has_value()) {
      const Token want = tag.token(repl.ordinal);
      bool any = false;
      for (std::size_t pos = 0; pos < cells.size();) {
        if (!cells[pos].consumed && cells[pos].token == want) {
          splice(pos, 1, insert);
          pos += insert.size();
          any = true;
        } else {
          ++pos;
        }
      }
      if (any) {
        ++outcome.substitutions_made;
      } else {
        outcome.misses.push_back({repl.ordinal, MissReason::PlaceholderAbsent});
      }
      continue;
    }

    const TokenSeq& needle = repl.substitute->tgt;
    std::size_t found = cells.size();
    for (std::size_t pos = 0; pos + needle.size() <= cells.size(); ++pos) {
      bool match = true;
      for (std::size_t k = 0; k < needle.size() && match; ++k) {
        match = !cells[pos + k].consumed && cells[pos + k].token == needle[k];
      }
      if (match) {
        found = pos;
        break;
      }
    }
    if (found < cells.size()) {
      splice(found, needle.size(), insert);
      ++outcome.substitutions_made;
    } else {
      outcome.misses.push_back(
          {repl.ordinal, MissReason::SubstituteTranslationNotFound});
    }
  }

  outcome.final_tokens.reserve(cells.size());
  for (Cell& cell : cells) outcome.final_tokens.push_back(std::move(cell.token));
  return outcome;
}

}  // namespace

MergeOutcome merge_tag(const TokenSeq& mt_output,
                       const std::vector<Replacement>& replacements,
                       const std::vector<PrivacyTranslation>& translations,
                       const TagTemplate& tag) {
  return merge_impl(mt_output, replacements, translations, tag);
}

MergeOutcome merge_substitute(const TokenSeq& mt_output,
                              const std::vector<Replacement>& replacements,
                              const std::vector<PrivacyTranslation>& translations,
                              const TagTemplate& tag) {
  return merge_impl(mt_output, replacements, translations, tag);
}

SentenceOutcome run_sentence(const AnnotatedPair& pair, Scenario scenario,
                             Strategy strategy,
                             const TranslationBackend& backend,
                             const EntityLexicon* entity_pool,
                             const EntityLexicon& table,
                             const EntityLexicon* gazetteer, SplitMix64 rng,
                             const GatewayOptions& options) {
  std::vector<PrivacySpan> spans;
  if (scenario == Scenario::Explicit) {
    for (const PrivacySpan& span : pair.src_spans) {
      if (options.types.contains(span.type)) spans.push_back(span);
    }
  } else {
    if (gazetteer) spans = recognize(pair.src_tokens, *gazetteer, options.types);
    if (options.miss_rate > 0.0) {
      spans = inject_recognition_errors(std::move(spans), options.miss_rate, rng);
    }
  }

  SanitizeOptions sopt;
  sopt.tag = options.tag;
  sopt.allow_tag_fallback = options.allow_tag_fallback;
  if (scenario == Scenario::Explicit) {
    // Both sides of the pair are known here, so substitutes must avoid the
    // target-side privacy tokens as well or the returned translation could
    // leak them.
    for (const PrivacySpan& span : pair.tgt_spans) {
      if (options.types.contains(span.type)) {
        sopt.extra_exclusion.insert(span.surface.begin(), span.surface.end());
      }
    }
  }

  const EntityLexicon* pool = nullptr;
  if (strategy == Strategy::EntityBased) pool = entity_pool;
  if (strategy == Strategy::DictionaryBased) pool = &table;

  SentenceOutcome out;
  out.active_spans = spans;
  out.sanitation = sanitize(pair.src_tokens, std::move(spans), strategy,
                            scenario, pool, rng, sopt);
  out.transcript.sent = out.sanitation.sanitized;
  out.transcript.received = backend.translate(pair.id, out.transcript.sent);
  out.privacy_translations = translate_privacy(out.sanitation.replacements, table);
  out.merge = strategy == Strategy::TagBased
                  ? merge_tag(out.transcript.received,
                              out.sanitation.replacements,
                              out.privacy_translations, options.tag)
                  : merge_substitute(out.transcript.received,
                                     out.sanitation.replacements,
                                     out.privacy_translations, options.tag);
  out.final_tokens = out.merge.final_tokens;
  return out;
}

}  // namespace privmt
