#pragma once

// Staged end-to-end run:
//
//   trim -> node_summaries -> metapath_summaries -> stats -> prompts
//        -> classify -> eval
//
// Each stage's output is cached under {cache_dir}/stages/ with a key that
// hashes the stage's own settings together with the keys of its inputs and
// the graph fingerprint, so a rerun recomputes only the stages whose inputs
// changed. Every run writes a fresh directory {runs_dir}/{timestamp}[-n]
// holding the resolved config and the artifacts of the stages it reached.

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dgp/classifier.hpp"
#include "dgp/config.hpp"
#include "dgp/graph_store.hpp"
#include "dgp/metapath.hpp"
#include "dgp/summarizer.hpp"

namespace dgp {

enum class Stage { kTrim, kNodeSummaries, kMetapathSummaries, kStats, kPrompts, kClassify, kEval };

std::string_view to_string(Stage s);
Stage stage_from_string(std::string_view name);

struct PipelineBackends {
  std::shared_ptr<SummarizerBackend> summarizer;
  std::shared_ptr<ClassifierBackend> classifier;
};

// Backends named by the config. Members already set in `given` are kept.
PipelineBackends make_backends(const PipelineConfig& cfg, PipelineBackends given = {});

// The bundle when it is complete, the raw dataset files otherwise.
HeteroGraph load_graph(const PipelineConfig& cfg);

// Configured metapaths, validated against g; the single-relation metapaths
// when none are configured.
std::vector<Metapath> resolve_metapaths(const PipelineConfig& cfg, const HeteroGraph& g);

struct StageRecord {
  Stage stage;
  bool cached = false;
  double seconds = 0.0;
  std::string key;
};

struct RunResult {
  std::filesystem::path run_dir;
  std::vector<StageRecord> stages;
  std::vector<Prediction> predictions;
  std::vector<ClassifyFailure> failures;
  std::optional<EvalReport> report;
  std::size_t summarizer_calls = 0;
  std::size_t summary_cache_hits = 0;
  std::size_t classifier_calls = 0;
};

// Runs every stage up to and including `until`. Stage failures raise
// StageError; earlier stages stay cached and their artifacts stay in the run
// directory. Configuration and data problems found before the first stage
// raise ValidationError.
RunResult run_pipeline(const PipelineConfig& cfg, Stage until = Stage::kEval,
                       PipelineBackends backends = {});

// "node,original_id,p_fraud,label", p_fraud printed with 17 significant
// digits, empty label for unlabeled nodes.
std::string predictions_csv(std::span<const Prediction> preds, const HeteroGraph& g);
std::vector<Prediction> predictions_from_csv(std::string_view csv);

// Creates {runs_dir}/{UTC timestamp}, adding -1, -2, ... if taken.
std::filesystem::path create_run_dir(const std::filesystem::path& runs_dir);

}  // namespace dgp
