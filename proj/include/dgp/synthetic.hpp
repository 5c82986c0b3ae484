#pragma once

// Small synthetic fraud datasets with known ground truth, for end-to-end
// checks with the keyword-oracle classifier.
//
// separable:        the marker leads every fraud node's own text; both
//                   relations only link nodes of the same class.
// neighbor-signal:  target texts never contain the marker. Each fraud target
//                   links through `uses_device` to unlabeled device nodes whose
//                   text starts with the marker; benign targets link to clean
//                   devices. `same_city` links random targets (noise).
//
// In both, node i is fraudulent iff i % 5 == 0, and consecutive blocks of
// five targets go to train (blocks 0-4 of every 10), val (5) and test (6-9).

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>

#include "dgp/config.hpp"

namespace dgp {

inline constexpr std::string_view kSyntheticMarker = "FRAUDMARK";

struct SyntheticOptions {
  std::size_t num_targets = 200;
  std::size_t out_degree = 4;      // same-class links per node (separable)
  std::size_t devices_per_target = 3;
  std::size_t noise_degree = 3;    // same_city links per target
  std::size_t text_tokens = 24;    // filler words per text
  std::uint64_t seed = 7;
};

enum class SyntheticKind { kSeparable, kNeighborSignal };

struct SyntheticDataset {
  std::filesystem::path nodes;
  std::filesystem::path edges;
  std::filesystem::path splits;
  SyntheticKind kind;
};

SyntheticDataset write_synthetic_dataset(const std::filesystem::path& dir, SyntheticKind kind,
                                         const SyntheticOptions& options = {});

// Extractive summarizer, keyword-oracle classifier on the marker, K = 1,
// M = 4, budgets 10, cache and runs under `work_dir`.
PipelineConfig synthetic_config(const SyntheticDataset& data, const std::filesystem::path& work_dir);

}  // namespace dgp
