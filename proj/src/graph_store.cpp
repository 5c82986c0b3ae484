#include "dgp/graph_store.hpp"

#include <algorithm>
#include <set>

#include "dgp/error.hpp"
#include "dgp/hash.hpp"
#include "dgp/io.hpp"
#include "dgp/tokenizer.hpp"

namespace dgp {
namespace {

std::string at(const std::string& where) {
  return where.empty() ? std::string() : where + ": ";
}

bool is_split_name(std::string_view name) {
  return std::find(std::begin(kSplitNames), std::end(kSplitNames), name) !=
         std::end(kSplitNames);
}

}  // namespace

const NodeRecord& HeteroGraph::node(NodeId id) const {
  if (id >= nodes_.size()) {
    throw std::out_of_range("node id " + std::to_string(id) + " out of range (N=" +
                            std::to_string(nodes_.size()) + ")");
  }
  return nodes_[id];
}

std::optional<NodeId> HeteroGraph::find(std::string_view original_id) const {
  // nodes_ is sorted by original id.
  const auto it = std::lower_bound(
      nodes_.begin(), nodes_.end(), original_id,
      [](const NodeRecord& n, std::string_view id) { return n.original_id < id; });
  if (it == nodes_.end() || it->original_id != original_id) return std::nullopt;
  return it->id;
}

bool HeteroGraph::has_relation(std::string_view rel) const {
  return std::find(relations_.begin(), relations_.end(), rel) != relations_.end();
}

std::size_t HeteroGraph::relation_index(std::string_view rel) const {
  const auto it = std::find(relations_.begin(), relations_.end(), rel);
  if (it == relations_.end()) {
    throw ValidationError("unknown relation '" + std::string(rel) + "'");
  }
  return static_cast<std::size_t>(it - relations_.begin());
}

std::span<const Edge> HeteroGraph::edges(std::size_t relation) const {
  if (relation >= edges_.size()) {
    throw std::out_of_range("relation index " + std::to_string(relation) + " out of range");
  }
  return edges_[relation];
}

std::size_t HeteroGraph::num_edges() const {
  std::size_t total = 0;
  for (const auto& e : edges_) total += e.size();
  return total;
}

std::span<const NodeId> HeteroGraph::split(std::string_view name) const {
  const auto it = splits_.find(std::string(name));
  if (it == splits_.end()) throw ValidationError("unknown split '" + std::string(name) + "'");
  return it->second;
}

GraphBuilder& GraphBuilder::add_node(std::string id, std::string type, std::string text,
                                     std::optional<std::vector<double>> num,
                                     std::optional<int> label, std::string where) {
  if (label && *label != 0 && *label != 1) {
    throw ValidationError(at(where) + "label of node '" + id + "' must be 0, 1 or null");
  }
  if (const auto it = seen_ids_.find(id); it != seen_ids_.end()) {
    throw ValidationError(at(where) + "duplicate node id '" + id + "'" +
                          (it->second.empty() ? "" : " (first seen at " + it->second + ")"));
  }
  seen_ids_.emplace(id, where);
  nodes_.push_back({std::move(id), std::move(type), std::move(text), std::move(num), label,
                    std::move(where)});
  return *this;
}

GraphBuilder& GraphBuilder::add_relation(std::string rel) {
  if (rel.empty()) throw ValidationError("relation identifier must be non-empty");
  if (std::find(relations_.begin(), relations_.end(), rel) == relations_.end()) {
    relations_.push_back(std::move(rel));
  }
  return *this;
}

GraphBuilder& GraphBuilder::add_edge(std::string rel, std::string src, std::string dst,
                                     std::string where) {
  if (rel.empty()) throw ValidationError(at(where) + "edge relation must be non-empty");
  add_relation(rel);
  edges_.push_back({std::move(rel), std::move(src), std::move(dst), std::move(where)});
  return *this;
}

GraphBuilder& GraphBuilder::set_split(std::string name, std::vector<std::string> members) {
  if (!is_split_name(name)) {
    throw ValidationError("unknown split '" + name + "' (expected train, val or test)");
  }
  splits_[std::move(name)] = std::move(members);
  return *this;
}

HeteroGraph GraphBuilder::build() && {
  HeteroGraph g;

  std::sort(nodes_.begin(), nodes_.end(),
            [](const PendingNode& a, const PendingNode& b) { return a.id < b.id; });

  // Feature width per node type comes from the first node that provides one.
  std::map<std::string, std::size_t> type_dim;
  for (const auto& n : nodes_) {
    if (!n.num) continue;
    const auto [it, inserted] = type_dim.emplace(n.type, n.num->size());
    if (!inserted && it->second != n.num->size()) {
      throw ValidationError(at(n.where) + "node '" + n.id + "' of type '" + n.type + "' has " +
                            std::to_string(n.num->size()) + " numeric features, expected " +
                            std::to_string(it->second));
    }
  }
  std::size_t width = 0;
  for (const auto& [type, d] : type_dim) width = std::max(width, d);

  g.nodes_.reserve(nodes_.size());
  for (auto& n : nodes_) {
    NodeRecord rec;
    rec.id = g.nodes_.size();
    rec.original_id = std::move(n.id);
    rec.node_type = std::move(n.type);
    rec.text = std::move(n.text);
    rec.label = n.label;
    if (n.num) {
      rec.num = std::move(*n.num);
    } else {
      const auto it = type_dim.find(rec.node_type);
      rec.num.assign(it == type_dim.end() ? 0 : it->second, 0.0);
      if (!rec.num.empty()) {
        g.warnings_.push_back("node '" + rec.original_id +
                              "' has no numeric features; filled with zeros");
      }
    }
    g.nodes_.push_back(std::move(rec));
  }

  g.features_ = DenseMatrix(g.nodes_.size(), width);
  for (const auto& rec : g.nodes_) {
    std::copy(rec.num.begin(), rec.num.end(), g.features_.row(rec.id).begin());
  }

  std::sort(relations_.begin(), relations_.end());
  g.relations_ = relations_;
  g.edges_.assign(relations_.size(), {});
  for (const auto& e : edges_) {
    const auto src = g.find(e.src);
    const auto dst = g.find(e.dst);
    if (!src || !dst) {
      throw ValidationError(at(e.where) + "edge endpoint '" + (src ? e.dst : e.src) +
                            "' is not a known node");
    }
    if (options_.reject_self_loops && *src == *dst) {
      throw ValidationError(at(e.where) + "self-loop on node '" + e.src + "' in relation '" +
                            e.rel + "' (self-loop rejection is enabled)");
    }
    g.edges_[g.relation_index(e.rel)].push_back({*src, *dst});
  }
  for (std::size_t r = 0; r < g.edges_.size(); ++r) {
    auto& list = g.edges_[r];
    std::sort(list.begin(), list.end());
    const auto before = list.size();
    list.erase(std::unique(list.begin(), list.end()), list.end());
    if (list.size() != before) {
      g.warnings_.push_back("relation '" + g.relations_[r] + "': dropped " +
                            std::to_string(before - list.size()) + " duplicate edge(s)");
    }
  }

  std::map<NodeId, std::string> owner;
  for (std::string_view name : kSplitNames) g.splits_[std::string(name)] = {};
  for (const auto& [name, members] : splits_) {
    auto& ids = g.splits_[name];
    for (const auto& m : members) {
      const auto id = g.find(m);
      if (!id) throw ValidationError("split '" + name + "' member '" + m + "' is not a known node");
      if (!g.nodes_[*id].label) {
        throw ValidationError("split '" + name + "' member '" + m + "' has no label");
      }
      const auto [it, inserted] = owner.emplace(*id, name);
      if (!inserted) {
        throw ValidationError("node '" + m + "' appears in splits '" + it->second + "' and '" +
                              name + "'");
      }
      ids.push_back(*id);
    }
    std::sort(ids.begin(), ids.end());
  }
  return g;
}

HeteroGraph ingest_dataset(const std::filesystem::path& nodes_path,
                           const std::filesystem::path& edges_path,
                           const std::filesystem::path& splits_path,
                           const IngestOptions& options) {
  for (const auto* p : {&nodes_path, &edges_path, &splits_path}) {
    if (!std::filesystem::exists(*p)) throw ValidationError("file not found: " + p->string());
  }
  GraphBuilder builder(options);

  auto string_field = [](const json& obj, const char* key, const std::string& where,
                         bool required) -> std::string {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) {
      if (required) throw ValidationError(where + ": missing field '" + key + "'");
      return {};
    }
    if (it->is_string()) return it->get<std::string>();
    if (it->is_number_integer()) return it->dump();
    throw ValidationError(where + ": field '" + key + "' must be a string");
  };

  for_each_jsonl(nodes_path, [&](const json& obj, const std::string& where) {
    std::optional<std::vector<double>> num;
    if (const auto it = obj.find("num"); it != obj.end() && !it->is_null()) {
      if (!it->is_array()) throw ValidationError(where + ": field 'num' must be an array");
      num.emplace();
      for (const auto& v : *it) {
        if (!v.is_number()) throw ValidationError(where + ": 'num' entries must be numbers");
        num->push_back(v.get<double>());
      }
    }
    std::optional<int> label;
    if (const auto it = obj.find("label"); it != obj.end() && !it->is_null()) {
      if (!it->is_number_integer() || (it->get<long long>() != 0 && it->get<long long>() != 1)) {
        throw ValidationError(where + ": 'label' must be 0, 1 or null");
      }
      label = it->get<int>();
    }
    builder.add_node(string_field(obj, "id", where, true), string_field(obj, "type", where, true),
                     string_field(obj, "text", where, false), std::move(num), label, where);
  });

  for_each_jsonl(edges_path, [&](const json& obj, const std::string& where) {
    builder.add_edge(string_field(obj, "rel", where, true), string_field(obj, "src", where, true),
                     string_field(obj, "dst", where, true), where);
  });

  json splits;
  try {
    splits = json::parse(read_file(splits_path));
  } catch (const json::parse_error& e) {
    throw ValidationError(splits_path.string() + ": malformed JSON: " + e.what());
  }
  if (!splits.is_object()) throw ValidationError(splits_path.string() + ": expected an object");
  for (const auto& [name, members] : splits.items()) {
    if (!members.is_array()) {
      throw ValidationError(splits_path.string() + ": split '" + name + "' must be an array");
    }
    std::vector<std::string> ids;
    for (const auto& m : members) {
      if (m.is_string()) {
        ids.push_back(m.get<std::string>());
      } else if (m.is_number_integer()) {
        ids.push_back(m.dump());
      } else {
        throw ValidationError(splits_path.string() + ": split '" + name +
                              "' members must be strings");
      }
    }
    builder.set_split(name, std::move(ids));
  }
  return std::move(builder).build();
}

std::string serialize_nodes(const HeteroGraph& g) {
  std::string out;
  for (const auto& n : g.nodes()) {
    json obj = {{"id", n.original_id}, {"type", n.node_type}, {"text", n.text}, {"num", n.num}};
    obj["label"] = n.label ? json(*n.label) : json(nullptr);
    out += obj.dump();
    out += '\n';
  }
  return out;
}

std::string serialize_edges(const HeteroGraph& g) {
  std::string out;
  for (std::size_t r = 0; r < g.relations().size(); ++r) {
    for (const auto& e : g.edges(r)) {
      const json obj = {{"rel", g.relations()[r]},
                        {"src", g.node(e.src).original_id},
                        {"dst", g.node(e.dst).original_id}};
      out += obj.dump();
      out += '\n';
    }
  }
  return out;
}

std::string serialize_splits(const HeteroGraph& g) {
  json obj = json::object();
  for (const auto& [name, ids] : g.splits()) {
    json members = json::array();
    for (NodeId id : ids) members.push_back(g.node(id).original_id);
    obj[name] = std::move(members);
  }
  return obj.dump() + "\n";
}

void export_dataset(const HeteroGraph& g, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / "nodes.jsonl", serialize_nodes(g));
  write_file_atomic(dir / "edges.jsonl", serialize_edges(g));
  write_file_atomic(dir / "splits.json", serialize_splits(g));
}

std::string graph_fingerprint(const HeteroGraph& g) {
  // Relations without edges do not appear in edges.jsonl; list them too.
  std::string rels;
  for (const auto& r : g.relations()) rels += r + '\n';
  return sha256_hex(serialize_nodes(g) + '\x1e' + serialize_edges(g) + '\x1e' +
                    serialize_splits(g) + '\x1e' + rels);
}

CountMatrix typed_adjacency(const HeteroGraph& g, std::string_view rel) {
  const auto edges = g.edges(rel);
  std::vector<CountMatrix::Entry> entries;
  entries.reserve(edges.size());
  for (const auto& e : edges) entries.push_back({e.src, e.dst, 1});
  return CountMatrix::from_entries(g.num_nodes(), g.num_nodes(), std::move(entries));
}

GraphStats compute_stats(const HeteroGraph& g) {
  GraphStats s;
  s.num_nodes = g.num_nodes();
  std::size_t tokens = 0;
  for (const auto& n : g.nodes()) {
    tokens += token_count(n.text);
    if (n.label) {
      ++s.num_labeled;
      if (*n.label == 1) ++s.num_fraud;
    }
  }
  s.fraud_ratio = s.num_labeled ? static_cast<double>(s.num_fraud) / s.num_labeled : 0.0;
  s.avg_text_tokens = s.num_nodes ? static_cast<double>(tokens) / s.num_nodes : 0.0;
  for (std::size_t r = 0; r < g.relations().size(); ++r) {
    const auto m = g.edges(r).size();
    s.relations.push_back({g.relations()[r], m,
                           s.num_nodes ? static_cast<double>(m) / s.num_nodes : 0.0});
  }
  for (const auto& [name, ids] : g.splits()) s.split_sizes[name] = ids.size();
  return s;
}

}  // namespace dgp
