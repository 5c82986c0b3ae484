#pragma once

// Subcommand bodies behind the `dgp` CLI, kept in the library so they can be
// tested without spawning processes.

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "dgp/classifier.hpp"
#include "dgp/config.hpp"
#include "dgp/cost_model.hpp"
#include "dgp/graph_store.hpp"
#include "dgp/metapath.hpp"
#include "dgp/pipeline.hpp"

namespace dgp {

json to_json(const GraphStats& s);

struct IngestResult {
  HeteroGraph graph;
  GraphStats stats;
  std::filesystem::path bundle;
};

// Reads the raw dataset files, then writes the canonical bundle and
// stats.json into `out_dir` (dataset.bundle when empty).
IngestResult cmd_ingest(const PipelineConfig& cfg, std::filesystem::path out_dir = {});

std::vector<MetapathCandidate> cmd_enumerate_metapaths(const PipelineConfig& cfg,
                                                       std::size_t max_length);

std::string format_candidates(const std::vector<MetapathCandidate>& candidates);
json candidates_to_json(const std::vector<MetapathCandidate>& candidates);

// Parses "P=v1,v2,..." for cost sweeps.
std::pair<std::string, std::vector<double>> parse_sweep(const std::string& spec);

std::string format_stats(const GraphStats& s);
std::string format_report(const EvalReport& r);
std::string format_run(const RunResult& r);

// Metrics over a predictions CSV (labels taken from the CSV).
EvalReport eval_predictions_file(const std::filesystem::path& csv, double threshold);

}  // namespace dgp
