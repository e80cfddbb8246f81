// Command-line front end: every pipeline stage as a subcommand, driven by a
// config file and/or flags, with machine-readable JSON reports.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "privmt/augment.hpp"
#include "privmt/corpus.hpp"
#include "privmt/errors.hpp"
#include "privmt/evaluate.hpp"
#include "privmt/gateway.hpp"
#include "privmt/lexicon.hpp"
#include "privmt/serve.hpp"

namespace {

using namespace privmt;
using nlohmann::json;

constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitBackend = 3;
constexpr int kExitDataset = 4;

// All file outputs are atomic: write a sibling temp file, then rename.
void write_file_atomic(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::fwrite(content.data(), 1, content.size(), stdout);
    return;
  }
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write to '" + tmp + "'");
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

struct EvaluateArgs {
  RunConfig config;
  std::string scenario = "explicit";
  std::string strategy = "tag";
  std::string types = "5-types";
  std::string per_aggregation = "micro";
  std::string exposure = "set";
  bool sweep = false;
};

void finish_config(EvaluateArgs& args) {
  auto scenario = scenario_from(args.scenario);
  if (!scenario) throw ConfigError("unknown scenario '" + args.scenario + "'");
  args.config.scenario = *scenario;

  if (args.sweep) {
    args.config.strategies = {Strategy::EntityBased, Strategy::DictionaryBased,
                              Strategy::TagBased};
  } else {
    auto strategy = strategy_from(args.strategy);
    if (!strategy) throw ConfigError("unknown strategy '" + args.strategy + "'");
    args.config.strategies = {*strategy};
  }

  args.config.types = parse_type_filter(args.types);

  if (args.per_aggregation == "micro") {
    args.config.per_aggregation = PerAggregation::Micro;
  } else if (args.per_aggregation == "macro") {
    args.config.per_aggregation = PerAggregation::Macro;
  } else {
    throw ConfigError("per aggregation must be micro or macro");
  }

  if (args.exposure == "set") {
    args.config.exposure_mode = ExposureMode::Set;
  } else if (args.exposure == "multiset") {
    args.config.exposure_mode = ExposureMode::Multiset;
  } else {
    throw ConfigError("exposure mode must be set or multiset");
  }

  for (const std::string* path :
       {&args.config.dataset, &args.config.lexicon, &args.config.table,
        &args.config.gazetteer, &args.config.stopwords_src,
        &args.config.stopwords_tgt}) {
    if (!path->empty() && !std::filesystem::exists(*path)) {
      throw ConfigError("file '" + *path + "' does not exist");
    }
  }
  if (args.config.dataset.empty()) throw ConfigError("--dataset is required");
}

void add_run_options(CLI::App& cmd, EvaluateArgs& args) {
  cmd.set_config("--config");
  cmd.add_option("--dataset", args.config.dataset, "dataset file (JSON lines)");
  cmd.add_option("--scenario", args.scenario, "explicit | implicit");
  cmd.add_option("--strategy", args.strategy, "entity | dictionary | tag");
  cmd.add_flag("--sweep", args.sweep, "run all three strategies");
  cmd.add_option("--types", args.types,
                 "3-types | 5-types | 10-types | all | comma list");
  cmd.add_option("--backend", args.config.backend,
                 "identity | table:<path> | remote:<url>");
  cmd.add_option("--lexicon", args.config.lexicon, "full entity lexicon (TSV)");
  cmd.add_option("--table", args.config.table,
                 "dictionary / privacy phrase table (TSV)");
  cmd.add_option("--gazetteer", args.config.gazetteer,
                 "recognizer gazetteer (TSV)");
  cmd.add_option("--stopwords-src", args.config.stopwords_src);
  cmd.add_option("--stopwords-tgt", args.config.stopwords_tgt);
  cmd.add_option("--seed", args.config.seed, "global seed");
  cmd.add_option("--per-aggregation", args.per_aggregation, "micro | macro");
  cmd.add_option("--exposure", args.exposure, "set | multiset");
  cmd.add_option("--report", args.config.report, "report path (default stdout)");
  cmd.add_option("--jobs", args.config.jobs, "parallel workers (0 = cores)");
  cmd.add_option("--retries", args.config.retries);
  cmd.add_option("--backoff-ms", args.config.backoff_ms);
  cmd.add_option("--tag-template", args.config.tag_template);
  cmd.add_option("--fold-case", args.config.fold_case);
  cmd.add_option("--miss-rate", args.config.miss_rate,
                 "implicit scenario: simulated recognizer miss rate");
  cmd.add_flag("--timing", args.config.emit_timing,
               "include wall-clock timing in the report");
}

int cmd_evaluate(EvaluateArgs& args) {
  finish_config(args);
  EvaluationOutcome outcome = run_evaluation(args.config);
  write_file_atomic(args.config.report, report_to_string(outcome.report));
  if (outcome.transport_failures > 0) return kExitBackend;
  if (outcome.structural_failures > 0) return kExitFailure;
  return 0;
}

int cmd_sanitize(EvaluateArgs& args, const std::string& out_path) {
  finish_config(args);
  if (args.config.strategies.size() != 1) {
    throw ConfigError("sanitize takes a single strategy");
  }
  const Strategy strategy = args.config.strategies.front();
  const TagTemplate tag = TagTemplate::from_pattern(args.config.tag_template);
  const auto corpus = load_corpus(args.config.dataset);

  EntityLexicon lexicon, table, gazetteer;
  if (!args.config.lexicon.empty()) lexicon = EntityLexicon::load(args.config.lexicon);
  if (!args.config.table.empty()) table = EntityLexicon::load(args.config.table);
  if (!args.config.gazetteer.empty()) {
    gazetteer = EntityLexicon::load(args.config.gazetteer);
  }

  std::string out;
  for (const AnnotatedPair& pair : corpus) {
    SplitMix64 rng = derive_rng(args.config.seed, pair.id);
    std::vector<PrivacySpan> spans;
    if (args.config.scenario == Scenario::Explicit) {
      for (const PrivacySpan& span : pair.src_spans) {
        if (args.config.types.contains(span.type)) spans.push_back(span);
      }
    } else {
      spans = recognize(pair.src_tokens, gazetteer, args.config.types);
      if (args.config.miss_rate > 0.0) {
        spans = inject_recognition_errors(std::move(spans),
                                          args.config.miss_rate, rng);
      }
    }
    SanitizeOptions sopt;
    sopt.tag = tag;
    const EntityLexicon* pool = nullptr;
    if (strategy == Strategy::EntityBased) pool = &lexicon;
    if (strategy == Strategy::DictionaryBased) pool = &table;
    SanitizationResult result = sanitize(pair.src_tokens, std::move(spans),
                                         strategy, args.config.scenario, pool,
                                         rng, sopt);
    json record{{"id", pair.id},
                {"strategy", std::string(to_string(strategy))},
                {"scenario", std::string(to_string(result.scenario))},
                {"sanitized", join_tokens(result.sanitized)},
                {"replacements", json::array()},
                {"events", json::array()}};
    for (const Replacement& repl : result.replacements) {
      json r{{"ordinal", repl.ordinal},
             {"start", repl.original.start},
             {"length", repl.original.length},
             {"surface", join_tokens(repl.original.surface)},
             {"type", std::string(to_string(repl.original.type))},
             {"link", repl.link},
             {"placeholder", join_tokens(repl.placeholder)}};
      if (repl.substitute) {
        r["substitute_src"] = join_tokens(repl.substitute->src);
        r["substitute_tgt"] = join_tokens(repl.substitute->tgt);
      }
      record["replacements"].push_back(std::move(r));
    }
    for (const SanitizeEvent& event : result.events) {
      record["events"].push_back(json{
          {"ordinal", event.ordinal}, {"event", std::string(to_string(event.kind))}});
    }
    out += record.dump();
    out += '\n';
  }
  write_file_atomic(out_path, out);
  return 0;
}

int cmd_build_dict(const std::string& in_path, std::uint64_t min_freq,
                   const std::string& out_path) {
  const auto triples = load_aligned(in_path);
  const EntityLexicon lexicon = build_dictionary(triples, min_freq);
  write_file_atomic(out_path, lexicon.serialize());
  return 0;
}

int cmd_augment(EvaluateArgs& args, const std::string& out_path,
                bool mix_original, double original_ratio) {
  finish_config(args);
  if (args.config.strategies.size() != 1) {
    throw ConfigError("augment takes a single strategy");
  }
  AugmentSpec spec;
  spec.strategy = args.config.strategies.front();
  spec.mix_original = mix_original;
  spec.seed = args.config.seed;
  spec.types = args.config.types;
  spec.original_ratio = original_ratio;
  spec.tag = TagTemplate::from_pattern(args.config.tag_template);

  const auto corpus = load_corpus(args.config.dataset);
  const EntityLexicon lexicon = args.config.table.empty()
                                    ? EntityLexicon()
                                    : EntityLexicon::load(args.config.table);
  AugmentResult result = build_adaptive_corpus(corpus, lexicon, spec);
  for (const AugmentEvent& event : result.events) {
    std::fprintf(stderr, "augment: pair %s link %u: %s\n",
                 event.pair_id.c_str(), event.link,
                 std::string(to_string(event.kind)).c_str());
  }
  auto mixed = mix_augment(std::move(result.pairs), corpus, spec);
  write_file_atomic(out_path, serialize_corpus(mixed));
  return 0;
}

int cmd_aggregate(const std::string& candidates_path,
                  const std::string& judgments_path,
                  const std::string& out_path, double sentence_fraction,
                  int term_votes) {
  const auto candidates = load_corpus(candidates_path);
  const auto judgments = load_judgments(judgments_path);

  std::map<std::string, std::vector<AnnotatorJudgment>> by_pair;
  for (const AnnotatorJudgment& j : judgments) by_pair[j.pair_id].push_back(j);

  VoteThresholds thresholds{sentence_fraction, term_votes};
  std::vector<AnnotatedPair> gold;
  for (const AnnotatedPair& pair : candidates) {
    auto it = by_pair.find(pair.id);
    if (it == by_pair.end()) {
      throw DatasetError("no judgments for pair '" + pair.id + "'");
    }
    if (auto kept = aggregate_annotations(pair, it->second, thresholds)) {
      gold.push_back(std::move(*kept));
    }
  }
  write_file_atomic(out_path, serialize_corpus(gold));
  return 0;
}

int cmd_serve_stub(const std::string& table_path, int port,
                   const std::string& tag_template) {
  TableBackend backend = TableBackend::load(
      table_path, TagTemplate::from_pattern(tag_template));
  serve_stub_blocking(std::move(backend), port);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"privacy gateway and benchmark harness for machine translation"};
  app.require_subcommand(1);

  EvaluateArgs eval_args;
  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "run the full pipeline and write an evaluation report");
  add_run_options(*evaluate, eval_args);

  EvaluateArgs sanitize_args;
  std::string sanitize_out = "-";
  CLI::App* sanitize_cmd =
      app.add_subcommand("sanitize", "sanitize a dataset and dump replacements");
  add_run_options(*sanitize_cmd, sanitize_args);
  sanitize_cmd->add_option("--out", sanitize_out, "output path");

  std::string dict_in, dict_out = "-";
  std::uint64_t min_freq = 1;
  CLI::App* build_dict = app.add_subcommand(
      "build-dict", "build the entity translation dictionary from aligned phrases");
  build_dict->add_option("--in", dict_in, "aligned triples (TSV)")->required();
  build_dict->add_option("--min-freq", min_freq, "minimum pair frequency");
  build_dict->add_option("--out", dict_out, "output lexicon path");

  EvaluateArgs augment_args;
  std::string augment_out = "-";
  bool augment_mix = false;
  double augment_ratio = 1.0;
  CLI::App* augment_cmd = app.add_subcommand(
      "augment", "build an adaptive-training corpus (dictionary or tag)");
  add_run_options(*augment_cmd, augment_args);
  augment_cmd->add_option("--out", augment_out, "output dataset path");
  augment_cmd->add_flag("--mix-original", augment_mix,
                        "mix original pairs back in");
  augment_cmd->add_option("--original-ratio", augment_ratio,
                          "fraction of originals to mix in");

  std::string agg_candidates, agg_judgments, agg_out = "-";
  double agg_fraction = 0.5;
  int agg_votes = 2;
  CLI::App* aggregate_cmd = app.add_subcommand(
      "aggregate", "aggregate annotator judgments into gold annotations");
  aggregate_cmd->add_option("--candidates", agg_candidates, "candidate dataset")
      ->required();
  aggregate_cmd->add_option("--judgments", agg_judgments, "judgment file")
      ->required();
  aggregate_cmd->add_option("--out", agg_out, "output dataset path");
  aggregate_cmd->add_option("--sentence-fraction", agg_fraction,
                            "pair kept iff private votes > fraction * total");
  aggregate_cmd->add_option("--term-votes", agg_votes,
                            "span gold iff accepted by more than this many");

  std::string serve_table, serve_tag = "PINFO{n}";
  int serve_port = 8787;
  CLI::App* serve_cmd = app.add_subcommand(
      "serve-stub", "run the mock translation service over the wire protocol");
  serve_cmd->add_option("--table", serve_table, "word table (TSV)")->required();
  serve_cmd->add_option("--port", serve_port, "listen port");
  serve_cmd->add_option("--tag-template", serve_tag);

  CLI11_PARSE(app, argc, argv);

  try {
    if (evaluate->parsed()) return cmd_evaluate(eval_args);
    if (sanitize_cmd->parsed()) return cmd_sanitize(sanitize_args, sanitize_out);
    if (build_dict->parsed()) return cmd_build_dict(dict_in, min_freq, dict_out);
    if (augment_cmd->parsed()) {
      return cmd_augment(augment_args, augment_out, augment_mix, augment_ratio);
    }
    if (aggregate_cmd->parsed()) {
      return cmd_aggregate(agg_candidates, agg_judgments, agg_out, agg_fraction,
                           agg_votes);
    }
    if (serve_cmd->parsed()) {
      return cmd_serve_stub(serve_table, serve_port, serve_tag);
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const BackendError& e) {
    std::fprintf(stderr, "backend error: %s\n", e.what());
    return kExitBackend;
  } catch (const DatasetError& e) {
    std::fprintf(stderr, "dataset error: %s\n", e.what());
    return kExitDataset;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitFailure;
  }
  return 0;
}
