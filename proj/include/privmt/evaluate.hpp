#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "privmt/entity_type.hpp"
#include "privmt/gateway.hpp"
#include "privmt/metrics.hpp"
#include "privmt/sanitize.hpp"

namespace privmt {

// Resolved configuration for an end-to-end evaluation run. Everything that
// influences the numbers lives here and is echoed into the report, so a
// report alone reproduces its run.
struct RunConfig {
  std::string dataset;
  Scenario scenario = Scenario::Explicit;
  std::vector<Strategy> strategies = {Strategy::TagBased};
  TypeFilter types = base_types();
  // "identity" | "table:<path>" | "remote:<url>"
  std::string backend = "identity";
  std::string lexicon;    // full entity pool (entity strategy, optional)
  std::string table;      // dictionary / phrase translation table (optional)
  std::string gazetteer;  // implicit-scenario recognizer (optional)
  std::string stopwords_src;  // optional; built-in defaults otherwise
  std::string stopwords_tgt;
  std::uint64_t seed = 0;
  PerAggregation per_aggregation = PerAggregation::Micro;
  ExposureMode exposure_mode = ExposureMode::Set;
  std::string report;  // output path; empty = stdout
  int jobs = 0;        // 0 = hardware concurrency
  int retries = 2;
  int backoff_ms = 100;
  std::string tag_template = "PINFO{n}";
  bool fold_case = true;
  double miss_rate = 0.0;
  // Wall-clock timing is the one non-deterministic report section; it is
  // off by default so equal runs produce byte-identical files.
  bool emit_timing = false;
};

struct EvaluationOutcome {
  nlohmann::json report;
  std::size_t transport_failures = 0;
  std::size_t structural_failures = 0;
};

// Runs the pipeline over the whole corpus (fanning sentences out over
// config.jobs workers), aggregates PER / BLEU / chrF per strategy, and
// builds the report document. Sentences that fail are excluded from the
// metrics and listed in the report, never silently scored. Deterministic:
// equal configs and inputs yield byte-identical reports at any parallelism.
EvaluationOutcome run_evaluation(const RunConfig& config);

// Serializes exactly as written to disk (2-space indent, trailing newline).
std::string report_to_string(const nlohmann::json& report);

// Rounds a score to 4 decimals through a fixed-format string so the JSON
// dump prints e.g. 0.1875 regardless of platform.
double round_score(double value);

}  // namespace privmt
