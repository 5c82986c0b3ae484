#pragma once

// Pipeline configuration, read from a single TOML file (layout in README).
// Relative paths resolve against the config file's directory.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dgp/io.hpp"
#include "dgp/metapath.hpp"
#include "dgp/summarizer.hpp"

namespace dgp {

struct DatasetConfig {
  std::filesystem::path nodes;
  std::filesystem::path edges;
  std::filesystem::path splits;
  // Directory of a bundle written by `ingest`. Preferred over the raw files
  // when it holds a complete bundle.
  std::filesystem::path bundle;
  bool reject_self_loops = true;
};

struct BackendConfig {
  std::string kind;
  std::string endpoint;
  std::string identity;
  double timeout_s = 30.0;
  int max_retries = 3;
  std::int64_t backoff_ms = 200;

  HttpBackendOptions http_options() const;
};

struct SummarizerConfig : BackendConfig {
  SummarizerConfig() { kind = "extractive"; }

  std::string instruction = std::string(kDefaultInstruction);
  std::size_t budget_node = 10;  // B_node
  std::size_t budget_meta = 10;  // B_meta
};

struct ClassifierConfig : BackendConfig {
  ClassifierConfig() { kind = "mock-hash"; }

  std::string marker;  // keyword-oracle only
};

struct RunConfig {
  std::filesystem::path cache_dir = ".dgp-cache";
  std::filesystem::path runs_dir = "runs";
  std::size_t parallelism = 4;
  std::uint64_t seed = 0;
  std::size_t target_token_cap = 2048;
  double f1_threshold = 0.5;
  std::string split = "test";
  std::string tokenizer = "whitespace";
  bool include_neighbors = true;
  std::vector<std::string> feature_names;  // empty: f0, f1, ...
};

struct PipelineConfig {
  DatasetConfig dataset;
  // Empty: one single-relation metapath per relation of the graph.
  std::vector<Metapath> metapaths;
  DiffusionConfig diffusion;
  SummarizerConfig summarizer;
  ClassifierConfig classifier;
  RunConfig run;

  // Domain checks that need no graph. Throws ValidationError.
  void validate() const;
};

// `overrides` are "dotted.key=value" strings; the value is parsed as a TOML
// value and falls back to a bare string.
PipelineConfig load_config(const std::filesystem::path& path,
                           const std::vector<std::string>& overrides = {});

PipelineConfig parse_config(std::string_view toml_text, const std::filesystem::path& base_dir,
                            const std::vector<std::string>& overrides = {},
                            const std::string& source_name = "config");

// Fully resolved config as TOML; parse_config of the result yields the same
// config.
std::string to_toml(const PipelineConfig& cfg);

}  // namespace dgp
