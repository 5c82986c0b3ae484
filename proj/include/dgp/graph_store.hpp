#pragma once

// Heterogeneous graph data model and dataset ingestion.
//
// Nodes carry free text plus a numeric feature vector whose width is fixed
// per node type. Ingestion assigns dense ids 0..N-1 in lexicographic order of
// the original string ids, so identical inputs always produce identical
// graphs. A built HeteroGraph is immutable and safe to share across threads.

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dgp/sparse_matrix.hpp"

namespace dgp {

using NodeId = std::size_t;

struct NodeRecord {
  NodeId id = 0;
  std::string original_id;
  std::string node_type;
  std::string text;
  std::vector<double> num;
  std::optional<int> label;  // 1 = fraud, 0 = benign

  friend bool operator==(const NodeRecord&, const NodeRecord&) = default;
};

struct Edge {
  NodeId src = 0;
  NodeId dst = 0;

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

struct IngestOptions {
  bool reject_self_loops = true;
};

inline constexpr std::string_view kSplitNames[] = {"train", "val", "test"};

class HeteroGraph {
 public:
  HeteroGraph() = default;

  std::size_t num_nodes() const { return nodes_.size(); }
  std::span<const NodeRecord> nodes() const { return nodes_; }
  const NodeRecord& node(NodeId id) const;
  std::optional<NodeId> find(std::string_view original_id) const;

  const std::vector<std::string>& relations() const { return relations_; }
  bool has_relation(std::string_view rel) const;
  // Throws ValidationError for unknown relations.
  std::size_t relation_index(std::string_view rel) const;
  std::span<const Edge> edges(std::size_t relation) const;
  std::span<const Edge> edges(std::string_view rel) const {
    return edges(relation_index(rel));
  }
  std::size_t num_edges() const;

  // Split name -> sorted member ids. Always contains train, val and test.
  const std::map<std::string, std::vector<NodeId>>& splits() const {
    return splits_;
  }
  std::span<const NodeId> split(std::string_view name) const;

  // N x W matrix of numeric features, zero-padded to the widest node type.
  const DenseMatrix& features() const { return features_; }
  std::size_t feature_width() const { return features_.cols(); }

  // Non-fatal ingestion notes (filled-in features, dropped duplicate edges).
  const std::vector<std::string>& warnings() const { return warnings_; }

  // Equality over content; warnings are not part of a graph's identity.
  friend bool operator==(const HeteroGraph& a, const HeteroGraph& b) {
    return a.nodes_ == b.nodes_ && a.relations_ == b.relations_ &&
           a.edges_ == b.edges_ && a.splits_ == b.splits_;
  }

 private:
  friend class GraphBuilder;

  std::vector<NodeRecord> nodes_;
  std::vector<std::string> relations_;
  std::vector<std::vector<Edge>> edges_;
  std::map<std::string, std::vector<NodeId>> splits_;
  DenseMatrix features_;
  std::vector<std::string> warnings_;
};

// Accumulates nodes/edges/splits keyed by original ids and validates them in
// build(). The optional `where` argument (e.g. "edges.jsonl:12") is quoted in
// error messages.
class GraphBuilder {
 public:
  explicit GraphBuilder(IngestOptions options = {}) : options_(options) {}

  GraphBuilder& add_node(std::string id, std::string type, std::string text,
                         std::optional<std::vector<double>> num,
                         std::optional<int> label, std::string where = {});
  GraphBuilder& add_relation(std::string rel);
  GraphBuilder& add_edge(std::string rel, std::string src, std::string dst,
                         std::string where = {});
  GraphBuilder& set_split(std::string name, std::vector<std::string> members);

  HeteroGraph build() &&;

 private:
  struct PendingNode {
    std::string id;
    std::string type;
    std::string text;
    std::optional<std::vector<double>> num;
    std::optional<int> label;
    std::string where;
  };
  struct PendingEdge {
    std::string rel;
    std::string src;
    std::string dst;
    std::string where;
  };

  IngestOptions options_;
  std::vector<PendingNode> nodes_;
  std::map<std::string, std::string, std::less<>> seen_ids_;
  std::vector<std::string> relations_;
  std::vector<PendingEdge> edges_;
  std::map<std::string, std::vector<std::string>> splits_;
};

// Reads nodes.jsonl, edges.jsonl and splits.json (formats in README).
HeteroGraph ingest_dataset(const std::filesystem::path& nodes_path,
                           const std::filesystem::path& edges_path,
                           const std::filesystem::path& splits_path,
                           const IngestOptions& options = {});

// Canonical text of each file; re-ingesting them yields an equal graph.
std::string serialize_nodes(const HeteroGraph& g);
std::string serialize_edges(const HeteroGraph& g);
std::string serialize_splits(const HeteroGraph& g);

// Writes nodes.jsonl, edges.jsonl, splits.json into `dir`.
void export_dataset(const HeteroGraph& g, const std::filesystem::path& dir);

// Content hash of the canonical serialization.
std::string graph_fingerprint(const HeteroGraph& g);

// N x N binary matrix with a 1 at every edge of `rel`.
CountMatrix typed_adjacency(const HeteroGraph& g, std::string_view rel);

struct RelationStats {
  std::string relation;
  std::size_t edges = 0;
  double avg_out_degree = 0.0;
};

struct GraphStats {
  std::size_t num_nodes = 0;
  std::size_t num_labeled = 0;
  std::size_t num_fraud = 0;
  double fraud_ratio = 0.0;        // fraud / labeled
  double avg_text_tokens = 0.0;    // mean whitespace tokens per node text
  std::vector<RelationStats> relations;
  std::map<std::string, std::size_t> split_sizes;
};

GraphStats compute_stats(const HeteroGraph& g);

}  // namespace dgp
