#pragma once

// Random instance generators and scratch directories for tests.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "dgp/graph_store.hpp"
#include "oracles.hpp"

namespace fixtures {

// Unique directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("dgp-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string node_name(std::size_t i) {
  std::string s = std::to_string(i);
  return "n" + std::string(3 - std::min<std::size_t>(3, s.size()), '0') + s;
}

struct RandomGraph {
  dgp::HeteroGraph graph;
  oracle::TypedGraph typed;  // same edges, indexed by dense id
  std::vector<std::string> relations;
};

// Node names are zero-padded so dense ids equal creation order.
// `clones` extra nodes copy the features and out-edges of random originals,
// which creates exact distance ties.
inline RandomGraph random_graph(std::mt19937_64& rng, std::size_t n, std::size_t num_rel,
                                double density, std::size_t dims = 2, std::size_t clones = 0,
                                bool self_loops = false) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  RandomGraph out;
  const std::size_t total = n + clones;
  out.typed.n = total;
  dgp::GraphBuilder b(dgp::IngestOptions{!self_loops});
  std::vector<std::vector<double>> feats(total);
  for (std::size_t i = 0; i < n; ++i) {
    feats[i].resize(dims);
    for (auto& x : feats[i]) x = gauss(rng);
  }
  std::vector<std::size_t> origin(total);
  for (std::size_t i = 0; i < n; ++i) origin[i] = i;
  for (std::size_t c = 0; c < clones; ++c) {
    origin[n + c] = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    feats[n + c] = feats[origin[n + c]];
  }
  for (std::size_t i = 0; i < total; ++i) {
    b.add_node(node_name(i), "t", "text " + std::to_string(i), feats[i], std::nullopt);
  }
  for (std::size_t r = 0; r < num_rel; ++r) {
    const std::string rel = "r" + std::to_string(r);
    out.relations.push_back(rel);
    b.add_relation(rel);
    auto& list = out.typed.edges[rel];
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t w = 0; w < total; ++w) {
        if (u == w && !self_loops) continue;
        if (w >= n && origin[w] == u) continue;
        if (unit(rng) < density) list.emplace_back(u, w);
      }
    }
    for (std::size_t c = 0; c < clones; ++c) {
      const std::size_t src = origin[n + c];
      std::vector<std::pair<std::size_t, std::size_t>> extra;
      for (const auto& [s, d] : list) {
        if (s == src && d != n + c) extra.emplace_back(n + c, d);
      }
      list.insert(list.end(), extra.begin(), extra.end());
    }
    for (const auto& [s, d] : list) b.add_edge(rel, node_name(s), node_name(d));
  }
  out.graph = std::move(b).build();
  return out;
}

inline std::vector<std::string> random_metapath(std::mt19937_64& rng,
                                                const std::vector<std::string>& relations,
                                                std::size_t max_len) {
  const std::size_t len = std::uniform_int_distribution<std::size_t>(1, max_len)(rng);
  std::vector<std::string> p;
  for (std::size_t i = 0; i < len; ++i) {
    p.push_back(relations[std::uniform_int_distribution<std::size_t>(0, relations.size() - 1)(rng)]);
  }
  return p;
}

}  // namespace fixtures
