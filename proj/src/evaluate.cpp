#include "privmt/evaluate.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <memory>
#include <thread>

#include "privmt/corpus.hpp"
#include "privmt/errors.hpp"
#include "privmt/rng.hpp"

namespace privmt {

using nlohmann::json;

double round_score(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.4f", value);
  return std::stod(buffer);
}

std::string report_to_string(const json& report) {
  return report.dump(2) + "\n";
}

namespace {

std::unique_ptr<TranslationBackend> make_backend(const RunConfig& config,
                                                 const TagTemplate& tag) {
  const std::string& spec = config.backend;
  if (spec == "identity") return std::make_unique<IdentityBackend>();
  if (spec.starts_with("table:")) {
    return std::make_unique<TableBackend>(
        TableBackend::load(spec.substr(6), tag));
  }
  if (spec.starts_with("remote:")) {
    return std::make_unique<RemoteBackend>(spec.substr(7), config.retries,
                                           config.backoff_ms);
  }
  throw ConfigError("unknown backend spec '" + spec +
                    "' (expected identity, table:<path>, or remote:<url>)");
}

// Both languages share one set: entries from either file (or the built-in
// defaults) are unioned, which is harmless since the scripts do not collide.
StopwordSet load_stopwords(const RunConfig& config) {
  if (config.stopwords_src.empty() && config.stopwords_tgt.empty()) {
    return StopwordSet::defaults(config.fold_case);
  }
  std::unordered_set<Token> words;
  auto add = [&words](const std::string& path) {
    if (path.empty()) return;
    std::ifstream in(path);
    if (!in) throw DatasetError("cannot open stopword file '" + path + "'");
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line[0] != '#') words.insert(line);
    }
  };
  add(config.stopwords_src);
  add(config.stopwords_tgt);
  return StopwordSet(std::move(words), config.fold_case);
}

struct SentenceResult {
  bool ok = false;
  bool transport_failure = false;
  std::string error;
  SentenceOutcome outcome;
  PerReport per;
};

std::vector<TokenSeq> gold_surfaces(const std::vector<PrivacySpan>& spans,
                                    const TypeFilter& types) {
  std::vector<TokenSeq> out;
  for (const PrivacySpan& span : spans) {
    if (types.contains(span.type)) out.push_back(span.surface);
  }
  return out;
}

json config_to_json(const RunConfig& config) {
  json strategies = json::array();
  for (Strategy s : config.strategies) strategies.push_back(std::string(to_string(s)));
  return json{
      {"dataset", config.dataset},
      {"scenario", std::string(to_string(config.scenario))},
      {"strategies", strategies},
      {"types", type_filter_to_string(config.types)},
      {"backend", config.backend},
      {"lexicon", config.lexicon},
      {"table", config.table},
      {"gazetteer", config.gazetteer},
      {"stopwords_src", config.stopwords_src.empty() ? "builtin" : config.stopwords_src},
      {"stopwords_tgt", config.stopwords_tgt.empty() ? "builtin" : config.stopwords_tgt},
      {"seed", config.seed},
      {"per_aggregation",
       config.per_aggregation == PerAggregation::Micro ? "micro" : "macro"},
      {"exposure_mode",
       config.exposure_mode == ExposureMode::Set ? "set" : "multiset"},
      {"jobs", config.jobs},
      {"retries", config.retries},
      {"backoff_ms", config.backoff_ms},
      {"tag_template", config.tag_template},
      {"fold_case", config.fold_case},
      {"miss_rate", config.miss_rate},
  };
}

}  // namespace

EvaluationOutcome run_evaluation(const RunConfig& config) {
  const TagTemplate tag = TagTemplate::from_pattern(config.tag_template);
  const auto corpus = load_corpus(config.dataset);
  if (corpus.empty()) throw DatasetError("dataset '" + config.dataset + "' is empty");

  EntityLexicon lexicon, table, gazetteer;
  if (!config.lexicon.empty()) lexicon = EntityLexicon::load(config.lexicon);
  if (!config.table.empty()) table = EntityLexicon::load(config.table);
  if (!config.gazetteer.empty()) gazetteer = EntityLexicon::load(config.gazetteer);

  const StopwordSet stopwords = load_stopwords(config);
  const auto backend = make_backend(config, tag);

  GatewayOptions options;
  options.tag = tag;
  options.types = config.types;
  options.miss_rate = config.scenario == Scenario::Implicit ? config.miss_rate : 0.0;

  int jobs = config.jobs > 0
                 ? config.jobs
                 : static_cast<int>(std::thread::hardware_concurrency());
  jobs = std::max(1, std::min<int>(jobs, static_cast<int>(corpus.size())));

  const auto started = std::chrono::steady_clock::now();

  EvaluationOutcome result;
  json blocks = json::array();

  for (Strategy strategy : config.strategies) {
    std::vector<SentenceResult> results(corpus.size());
    std::atomic<std::size_t> cursor{0};

    auto worker = [&]() {
      while (true) {
        const std::size_t index = cursor.fetch_add(1);
        if (index >= corpus.size()) break;
        const AnnotatedPair& pair = corpus[index];
        SentenceResult& slot = results[index];
        try {
          slot.outcome = run_sentence(
              pair, config.scenario, strategy, *backend,
              lexicon.empty() ? nullptr : &lexicon, table,
              gazetteer.empty() ? nullptr : &gazetteer,
              derive_rng(config.seed, pair.id), options);
          slot.per = per_sentence(slot.outcome.transcript.sent,
                                  slot.outcome.transcript.received,
                                  gold_surfaces(pair.src_spans, config.types),
                                  gold_surfaces(pair.tgt_spans, config.types),
                                  stopwords, config.exposure_mode);
          slot.ok = true;
        } catch (const BackendError& e) {
          slot.transport_failure = true;
          slot.error = e.what();
        } catch (const std::exception& e) {
          slot.error = e.what();
        }
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(jobs));
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();

    // Sequential aggregation in corpus order keeps every sum and every
    // report list deterministic regardless of worker scheduling.
    std::vector<PerReport> per_reports;
    std::vector<TokenSeq> candidates;
    std::vector<TokenSeq> references;
    std::size_t fallbacks = 0;
    std::size_t miss_placeholder = 0;
    std::size_t miss_substitute = 0;
    json failures = json::array();
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      const SentenceResult& r = results[i];
      if (!r.ok) {
        failures.push_back(json{
            {"pair", corpus[i].id},
            {"kind", r.transport_failure ? "transport" : "structural"},
            {"error", r.error}});
        if (r.transport_failure) ++result.transport_failures;
        else ++result.structural_failures;
        continue;
      }
      per_reports.push_back(r.per);
      candidates.push_back(r.outcome.final_tokens);
      references.push_back(corpus[i].tgt_tokens);
      for (const SanitizeEvent& event : r.outcome.sanitation.events) {
        if (event.kind == SanitizeEventKind::FallbackToTag) ++fallbacks;
      }
      for (const MergeMiss& miss : r.outcome.merge.misses) {
        if (miss.reason == MissReason::PlaceholderAbsent) ++miss_placeholder;
        else ++miss_substitute;
      }
    }

    json block{
        {"strategy", std::string(to_string(strategy))},
        {"scenario", std::string(to_string(config.scenario))},
        {"sentences", corpus.size()},
        {"scored", per_reports.size()},
        {"sacre_bleu", "n/a"},
        {"fallbacks", fallbacks},
        {"misses",
         {{"placeholder_absent", miss_placeholder},
          {"substitute_translation_not_found", miss_substitute}}},
        {"failures", failures},
    };
    if (per_reports.empty()) {
      block["bleu"] = nullptr;
      block["chrf"] = nullptr;
      block["per"] = nullptr;
      block["counts"] = nullptr;
    } else {
      const PerReport corpus_per =
          per_corpus(per_reports, config.per_aggregation);
      block["bleu"] = round_score(bleu(candidates, references));
      block["chrf"] = round_score(chrf(candidates, references));
      block["per"] = round_score(corpus_per.per);
      block["counts"] = json{
          {"n_xe", corpus_per.n_xe},   {"n_xp", corpus_per.n_xp},
          {"n_ye", corpus_per.n_ye},   {"n_yp", corpus_per.n_yp},
          {"r_x", round_score(corpus_per.r_x)},
          {"r_y", round_score(corpus_per.r_y)},
      };
    }
    blocks.push_back(std::move(block));
  }

  result.report = json{{"config", config_to_json(config)}, {"results", blocks}};
  if (config.emit_timing) {
    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - started);
    result.report["timing"] = json{{"wall_ms", elapsed.count()}};
  }
  return result;
}

}  // namespace privmt
