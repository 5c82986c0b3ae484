#include "dgp/metapath.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "dgp/error.hpp"

namespace dgp {

Metapath Metapath::of(std::vector<std::string> relations, std::string name) {
  Metapath p;
  p.relations = std::move(relations);
  if (name.empty()) {
    for (std::size_t i = 0; i < p.relations.size(); ++i) {
      if (i) name += '/';
      name += p.relations[i];
    }
  }
  p.name = std::move(name);
  return p;
}

void validate(const Metapath& p, const HeteroGraph& g) {
  if (p.relations.empty()) {
    throw ValidationError("metapath '" + p.name + "' has no relations");
  }
  for (const auto& r : p.relations) {
    if (!g.has_relation(r)) {
      throw ValidationError("metapath '" + p.name + "' references unknown relation '" + r + "'");
    }
  }
}

void DiffusionConfig::validate() const {
  if (hops < 1) throw ValidationError("diffusion hops K must be >= 1");
  if (max_neighbors < 1) throw ValidationError("neighbor truncation M must be >= 1");
}

CountMatrix compose_metapath(const HeteroGraph& g, const Metapath& p) {
  validate(p, g);
  CountMatrix a = typed_adjacency(g, p.relations.front());
  for (std::size_t i = 1; i < p.relations.size(); ++i) {
    try {
      a = multiply(a, typed_adjacency(g, p.relations[i]));
    } catch (const std::overflow_error&) {
      throw std::overflow_error("metapath '" + p.name +
                                "': path count exceeds 64-bit range at relation " +
                                std::to_string(i + 1));
    }
  }
  return a;
}

std::vector<NodeId> metapath_neighborhood(const CountMatrix& a_p, NodeId v) {
  const auto cols = a_p.row_cols(v);
  return {cols.begin(), cols.end()};
}

namespace {

template <typename T>
TransitionMatrix make_transition(const CsrMatrix<T>& a) {
  TransitionMatrix out;
  std::vector<double> values;
  values.reserve(a.nnz());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto vals = a.row_values(i);
    if (vals.empty()) {
      out.zero_rows.push_back(i);
      continue;
    }
    // Sum in long double so large integer counts normalize accurately.
    long double sum = 0;
    for (const T& v : vals) {
      if (v < T{}) throw std::invalid_argument("transition_matrix: negative entry in row " +
                                               std::to_string(i));
      sum += static_cast<long double>(v);
    }
    for (const T& v : vals) {
      values.push_back(static_cast<double>(static_cast<long double>(v) / sum));
    }
  }
  out.matrix = SparseMatrix::from_csr(a.rows(), a.cols(), a.row_ptr(), a.col_idx(),
                                      std::move(values));
  return out;
}

}  // namespace

TransitionMatrix transition_matrix(const CountMatrix& a_p) { return make_transition(a_p); }
TransitionMatrix transition_matrix(const SparseMatrix& a_p) { return make_transition(a_p); }

SparseMatrix diffusion_operator(const SparseMatrix& t, std::size_t hops) {
  if (hops == 0) throw ValidationError("diffusion_operator: K must be >= 1");
  if (t.rows() != t.cols()) throw std::invalid_argument("diffusion_operator: T must be square");
  SparseMatrix power = SparseMatrix::identity(t.rows());
  SparseMatrix sum = power;
  for (std::size_t k = 1; k <= hops; ++k) {
    power = multiply(power, t);
    sum = add(sum, power);
  }
  return scale(sum, 1.0 / static_cast<double>(hops));
}

DenseMatrix diffusion_embeddings(const SparseMatrix& z, const DenseMatrix& x) {
  if (z.rows() != z.cols() || z.cols() != x.rows()) {
    throw std::invalid_argument("diffusion_embeddings: Z is " + std::to_string(z.rows()) + "x" +
                                std::to_string(z.cols()) + " but X has " +
                                std::to_string(x.rows()) + " rows");
  }
  return multiply(z, x);
}

DiffusionEmbedder::DiffusionEmbedder(SparseMatrix transition, const DenseMatrix& features,
                                     std::size_t hops, std::size_t dense_threshold)
    : transition_(std::move(transition)),
      features_(&features),
      hops_(hops),
      materialized_(transition_.rows() <= dense_threshold) {
  if (hops_ == 0) throw ValidationError("diffusion hops K must be >= 1");
  if (transition_.cols() != features.rows()) {
    throw std::invalid_argument("DiffusionEmbedder: feature rows do not match graph size");
  }
  if (!materialized_) return;
  // H = (1/K) * (X + T X + T^2 X + ... + T^K X)
  DenseMatrix power = features;
  dense_ = features;
  for (std::size_t k = 1; k <= hops_; ++k) {
    power = multiply(transition_, power);
    for (std::size_t i = 0; i < dense_.rows(); ++i) {
      auto dst = dense_.row(i);
      const auto src = power.row(i);
      for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += src[c];
    }
  }
  const double inv = 1.0 / static_cast<double>(hops_);
  for (std::size_t i = 0; i < dense_.rows(); ++i) {
    for (double& v : dense_.row(i)) v *= inv;
  }
}

std::vector<double> DiffusionEmbedder::embedding(NodeId v) const {
  if (v >= transition_.rows()) {
    throw std::out_of_range("embedding: node " + std::to_string(v) + " out of range");
  }
  if (materialized_) {
    const auto row = dense_.row(v);
    return {row.begin(), row.end()};
  }
  {
    std::shared_lock lock(memo_mu_);
    if (const auto it = memo_.find(v); it != memo_.end()) return it->second;
  }
  auto row = compute_row(v);
  std::unique_lock lock(memo_mu_);
  return memo_.emplace(v, std::move(row)).first->second;
}

std::vector<double> DiffusionEmbedder::compute_row(NodeId v) const {
  // h = (1/K) * sum_k (e_v T^k) X, accumulated hop by hop like the dense
  // path so that nodes with equal features and equal transition rows get
  // bitwise-equal embeddings. Ordered maps fix the summation order.
  const std::size_t width = features_->cols();
  const auto xv = features_->row(v);
  std::vector<double> h(xv.begin(), xv.end());
  std::map<NodeId, double> walk{{v, 1.0}};
  std::vector<double> term(width);
  for (std::size_t k = 1; k <= hops_ && !walk.empty(); ++k) {
    std::map<NodeId, double> next;
    for (const auto& [i, w] : walk) {
      const auto cols = transition_.row_cols(i);
      const auto vals = transition_.row_values(i);
      for (std::size_t p = 0; p < cols.size(); ++p) next[cols[p]] += w * vals[p];
    }
    std::fill(term.begin(), term.end(), 0.0);
    for (const auto& [j, w] : next) {
      const auto x = features_->row(j);
      for (std::size_t c = 0; c < width; ++c) term[c] += w * x[c];
    }
    for (std::size_t c = 0; c < width; ++c) h[c] += term[c];
    walk = std::move(next);
  }
  const double inv = 1.0 / static_cast<double>(hops_);
  for (double& x : h) x *= inv;
  return h;
}

namespace {

double euclidean(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

bool closer(const Neighbor& a, const Neighbor& b) {
  return a.distance != b.distance ? a.distance < b.distance : a.id < b.id;
}

}  // namespace

std::vector<Neighbor> select_nearest(const std::function<std::vector<double>(NodeId)>& embed,
                                     NodeId v, std::span<const NodeId> candidates,
                                     std::size_t m) {
  const auto target = embed(v);
  std::vector<Neighbor> scored;
  scored.reserve(candidates.size());
  for (NodeId u : candidates) {
    if (u == v) continue;
    scored.push_back({u, euclidean(embed(u), target)});
  }
  const std::size_t keep = std::min(m, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep),
                    scored.end(), closer);
  scored.resize(keep);
  return scored;
}

std::vector<Neighbor> select_nearest(const DenseMatrix& embeddings, NodeId v,
                                     std::span<const NodeId> candidates, std::size_t m) {
  return select_nearest(
      [&](NodeId u) {
        const auto row = embeddings.row(u);
        return std::vector<double>(row.begin(), row.end());
      },
      v, candidates, m);
}

MetapathTrimmer::MetapathTrimmer(const HeteroGraph& g, Metapath p, const DiffusionConfig& cfg,
                                 const DenseMatrix& features)
    : metapath_(std::move(p)), cfg_(cfg) {
  cfg_.validate();
  if (features.rows() != g.num_nodes()) {
    throw std::invalid_argument("MetapathTrimmer: feature matrix has " +
                                std::to_string(features.rows()) + " rows, graph has " +
                                std::to_string(g.num_nodes()) + " nodes");
  }
  adjacency_ = compose_metapath(g, metapath_);
  transition_ = transition_matrix(adjacency_);
  embedder_ = std::make_unique<DiffusionEmbedder>(transition_.matrix, features, cfg_.hops,
                                                  cfg_.dense_threshold);
}

TrimmedNeighborhood MetapathTrimmer::trim(NodeId v) const {
  TrimmedNeighborhood out;
  out.target = v;
  out.metapath = metapath_;
  const auto candidates = metapath_neighborhood(adjacency_, v);
  out.neighbors = select_nearest([this](NodeId u) { return embedder_->embedding(u); }, v,
                                 candidates, cfg_.max_neighbors);
  return out;
}

TrimmedNeighborhood trim_neighborhood(const HeteroGraph& g, const Metapath& p, NodeId v,
                                      const DiffusionConfig& cfg, const DenseMatrix& features) {
  if (v >= g.num_nodes()) {
    throw std::out_of_range("trim_neighborhood: node " + std::to_string(v) + " out of range");
  }
  return MetapathTrimmer(g, p, cfg, features).trim(v);
}

std::vector<Metapath> enumerate_metapaths(const HeteroGraph& g, std::size_t max_length) {
  std::vector<Metapath> out;
  std::vector<std::vector<std::string>> frontier{{}};
  for (std::size_t len = 1; len <= max_length; ++len) {
    std::vector<std::vector<std::string>> next;
    for (const auto& prefix : frontier) {
      for (const auto& r : g.relations()) {
        auto seq = prefix;
        seq.push_back(r);
        out.push_back(Metapath::of(seq));
        next.push_back(std::move(seq));
      }
    }
    frontier = std::move(next);
  }
  return out;
}

std::vector<MetapathCandidate> metapath_candidates(const HeteroGraph& g,
                                                   std::size_t max_length) {
  std::vector<MetapathCandidate> out;
  for (auto& p : enumerate_metapaths(g, max_length)) {
    const CountMatrix a = compose_metapath(g, p);
    MetapathCandidate c;
    c.metapath = std::move(p);
    c.nnz = a.nnz();
    for (std::size_t v = 0; v < a.rows(); ++v) {
      const std::size_t size = a.row_cols(v).size();
      if (size > 0) ++c.nodes_with_neighbors;
      c.max_neighborhood = std::max(c.max_neighborhood, size);
    }
    c.mean_neighborhood = a.rows() ? static_cast<double>(c.nnz) / a.rows() : 0.0;
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace dgp
