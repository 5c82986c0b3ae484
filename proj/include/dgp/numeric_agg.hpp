#pragma once

// Per-metapath mean of the trimmed neighbors' numeric features, and its
// fixed-format text rendering for prompts.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dgp/graph_store.hpp"
#include "dgp/metapath.hpp"

namespace dgp {

struct MetapathStats {
  NodeId target = 0;
  Metapath metapath;
  std::vector<double> mean;  // zero vector when count == 0
  std::size_t count = 0;

  friend bool operator==(const MetapathStats&, const MetapathStats&) = default;
};

// Elementwise mean over the padded feature rows of the trimmed neighbors.
MetapathStats aggregate_numeric(const HeteroGraph& g, const TrimmedNeighborhood& trimmed);

// "n={count}, name=value, ..." with values fixed to 4 decimals (round half to
// even on the exact binary value). count == 0 renders as "n=0".
std::string render_stats(const MetapathStats& stats, std::span<const std::string> feature_names);

// f0, f1, ... f{width-1}
std::vector<std::string> default_feature_names(std::size_t width);

// Number of whitespace tokens render_stats produces for a width-d vector.
inline std::size_t max_stats_tokens(std::size_t width) { return 1 + width; }

}  // namespace dgp
