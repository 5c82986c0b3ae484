#pragma once

// Metapath composition, Markov diffusion and neighbor trimming.
//
// For a metapath P = r1 o r2 o ... o rL the adjacency A_P is the ordered
// product of the typed adjacencies; its entry (u, w) counts the typed walks
// from u to w that follow P. Row-normalizing A_P gives the random-walk
// transition T_P; the diffusion operator averages its powers,
//
//   Z_P(K) = (1/K) * sum_{k=0..K} T_P^k,
//
// and nodes are embedded as rows of Z_P(K) X. Trimming keeps the M metapath
// neighbors whose embeddings are closest (Euclidean) to the target's.
//
// Note that the prefactor is 1/K over K+1 terms, so rows of Z that never
// reach an isolated node sum to (K+1)/K. A positive rescaling of Z scales
// every distance by the same factor and leaves the trimmed order unchanged.

#include <cstddef>
#include <functional>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "dgp/graph_store.hpp"
#include "dgp/sparse_matrix.hpp"

namespace dgp {

struct Metapath {
  std::vector<std::string> relations;
  std::string name;

  // Display name defaults to the relations joined with '/'.
  static Metapath of(std::vector<std::string> relations, std::string name = {});

  friend bool operator==(const Metapath&, const Metapath&) = default;
};

// Throws ValidationError if the metapath is empty or names an unknown relation.
void validate(const Metapath& p, const HeteroGraph& g);

struct DiffusionConfig {
  std::size_t hops = 1;                  // K
  std::size_t max_neighbors = 8;         // M
  std::size_t dense_threshold = 50'000;  // materialize embeddings up to this N

  void validate() const;
};

struct Neighbor {
  NodeId id = 0;
  double distance = 0.0;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

struct TrimmedNeighborhood {
  NodeId target = 0;
  Metapath metapath;
  std::vector<Neighbor> neighbors;  // ascending (distance, id)

  friend bool operator==(const TrimmedNeighborhood&, const TrimmedNeighborhood&) = default;
};

CountMatrix compose_metapath(const HeteroGraph& g, const Metapath& p);

// Column indices of the positive entries in row v.
std::vector<NodeId> metapath_neighborhood(const CountMatrix& a_p, NodeId v);

struct TransitionMatrix {
  SparseMatrix matrix;
  std::vector<NodeId> zero_rows;  // rows with no outgoing paths, kept all-zero
};

TransitionMatrix transition_matrix(const CountMatrix& a_p);
TransitionMatrix transition_matrix(const SparseMatrix& a_p);

// (1/K) * sum_{k=0..K} T^k by iterated sparse products. K = 0 is rejected.
SparseMatrix diffusion_operator(const SparseMatrix& t, std::size_t hops);

// Z X; row i is node i's embedding.
DenseMatrix diffusion_embeddings(const SparseMatrix& z, const DenseMatrix& x);

// Embedding rows of Z_P(K) X without materializing Z. Up to the dense
// threshold all rows are computed at construction by K sparse-dense products
// (T^k X); above it each requested row is built from K sparse
// vector-matrix products and memoized. Thread-safe.
class DiffusionEmbedder {
 public:
  DiffusionEmbedder(SparseMatrix transition, const DenseMatrix& features, std::size_t hops,
                    std::size_t dense_threshold);

  bool materialized() const { return materialized_; }
  std::vector<double> embedding(NodeId v) const;

 private:
  std::vector<double> compute_row(NodeId v) const;

  SparseMatrix transition_;
  const DenseMatrix* features_;
  std::size_t hops_;
  bool materialized_;
  DenseMatrix dense_;
  mutable std::shared_mutex memo_mu_;
  mutable std::unordered_map<NodeId, std::vector<double>> memo_;
};

// Keeps the `m` candidates closest to v (v itself is skipped), ordered by
// ascending distance and then ascending node id.
std::vector<Neighbor> select_nearest(
    const std::function<std::vector<double>(NodeId)>& embed, NodeId v,
    std::span<const NodeId> candidates, std::size_t m);

std::vector<Neighbor> select_nearest(const DenseMatrix& embeddings, NodeId v,
                                     std::span<const NodeId> candidates, std::size_t m);

// Holds A_P, T_P and the embedder for one metapath so that many targets can
// be trimmed without recomputing them. `features` must outlive the trimmer.
class MetapathTrimmer {
 public:
  MetapathTrimmer(const HeteroGraph& g, Metapath p, const DiffusionConfig& cfg,
                  const DenseMatrix& features);

  const Metapath& metapath() const { return metapath_; }
  const CountMatrix& adjacency() const { return adjacency_; }
  const TransitionMatrix& transition() const { return transition_; }

  TrimmedNeighborhood trim(NodeId v) const;

 private:
  Metapath metapath_;
  DiffusionConfig cfg_;
  CountMatrix adjacency_;
  TransitionMatrix transition_;
  std::unique_ptr<DiffusionEmbedder> embedder_;
};

TrimmedNeighborhood trim_neighborhood(const HeteroGraph& g, const Metapath& p, NodeId v,
                                      const DiffusionConfig& cfg, const DenseMatrix& features);

// All relation sequences of length 1..max_length, shortest first, each
// length in lexicographic relation order.
std::vector<Metapath> enumerate_metapaths(const HeteroGraph& g, std::size_t max_length);

struct MetapathCandidate {
  Metapath metapath;
  std::size_t nnz = 0;
  std::size_t nodes_with_neighbors = 0;
  double mean_neighborhood = 0.0;
  std::size_t max_neighborhood = 0;
};

std::vector<MetapathCandidate> metapath_candidates(const HeteroGraph& g,
                                                   std::size_t max_length);

}  // namespace dgp
