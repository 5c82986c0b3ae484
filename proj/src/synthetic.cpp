#include "dgp/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

#include "dgp/error.hpp"
#include "dgp/io.hpp"

namespace dgp {
namespace fs = std::filesystem;
namespace {

constexpr const char* kVocab[] = {
    "order",   "shipped", "quickly", "great",  "service", "price",   "store",  "would",
    "again",   "staff",   "friendly", "box",   "arrived", "late",    "refund", "quality",
    "product", "works",   "fine",    "color",  "size",    "cheap",   "delivery", "item",
    "review",  "account", "payment", "card",   "seller",  "rating",  "visit",  "local"};

std::string pad_id(char prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%05zu", prefix, i);
  return buf;
}

std::string filler(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<std::size_t> pick(0, std::size(kVocab) - 1);
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) out += ' ';
    out += kVocab[pick(rng)];
  }
  return out;
}

std::vector<double> features(std::mt19937_64& rng, std::size_t d, double shift) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> v(d);
  for (auto& x : v) x = std::round((gauss(rng) + shift) * 1e4) / 1e4;
  return v;
}

bool is_fraud(std::size_t i) { return i % 5 == 0; }

const char* split_of(std::size_t i) {
  const std::size_t block = (i / 5) % 10;
  return block < 5 ? "train" : block == 5 ? "val" : "test";
}

// `count` distinct picks from pool \ {self}.
std::vector<std::size_t> sample(std::mt19937_64& rng, const std::vector<std::size_t>& pool,
                                std::size_t self, std::size_t count) {
  std::vector<std::size_t> c;
  for (auto p : pool) {
    if (p != self) c.push_back(p);
  }
  std::shuffle(c.begin(), c.end(), rng);
  c.resize(std::min(count, c.size()));
  std::sort(c.begin(), c.end());
  return c;
}

}  // namespace

SyntheticDataset write_synthetic_dataset(const fs::path& dir, SyntheticKind kind,
                                         const SyntheticOptions& o) {
  // Blocks 0-9 of five targets each cover every split.
  if (o.num_targets < 50) throw ValidationError("synthetic dataset needs at least 50 targets");
  fs::create_directories(dir);
  std::mt19937_64 rng(o.seed);
  std::string nodes, edges;
  json splits = {{"train", json::array()}, {"val", json::array()}, {"test", json::array()}};

  auto node_line = [](const std::string& id, const std::string& type, const std::string& text,
                      const std::vector<double>& num, std::optional<int> label) {
    json j = {{"id", id}, {"type", type}, {"text", text}, {"num", num}};
    j["label"] = label ? json(*label) : json(nullptr);
    return j.dump() + "\n";
  };
  auto edge_line = [](const std::string& rel, const std::string& src, const std::string& dst) {
    return json{{"src", src}, {"dst", dst}, {"rel", rel}}.dump() + "\n";
  };

  std::vector<std::size_t> fraud, benign, all;
  for (std::size_t i = 0; i < o.num_targets; ++i) {
    (is_fraud(i) ? fraud : benign).push_back(i);
    all.push_back(i);
    splits[split_of(i)].push_back(pad_id('t', i));
  }

  if (kind == SyntheticKind::kSeparable) {
    for (std::size_t i = 0; i < o.num_targets; ++i) {
      std::string text = filler(rng, o.text_tokens);
      if (is_fraud(i)) text = std::string(kSyntheticMarker) + " " + text;
      nodes += node_line(pad_id('t', i), "review", text, features(rng, 3, is_fraud(i) ? 1.5 : 0.0),
                         is_fraud(i) ? 1 : 0);
    }
    for (const char* rel : {"same_user", "same_store"}) {
      for (std::size_t i = 0; i < o.num_targets; ++i) {
        for (auto j : sample(rng, is_fraud(i) ? fraud : benign, i, o.out_degree)) {
          edges += edge_line(rel, pad_id('t', i), pad_id('t', j));
        }
      }
    }
  } else {
    for (std::size_t i = 0; i < o.num_targets; ++i) {
      nodes += node_line(pad_id('t', i), "account", filler(rng, o.text_tokens),
                         features(rng, 3, 0.0), is_fraud(i) ? 1 : 0);
      for (std::size_t k = 0; k < o.devices_per_target; ++k) {
        const std::string dev = pad_id('d', i * o.devices_per_target + k);
        std::string text = filler(rng, o.text_tokens / 2);
        if (is_fraud(i)) text = std::string(kSyntheticMarker) + " " + text;
        nodes += node_line(dev, "device", text, features(rng, 2, 0.0), std::nullopt);
        edges += edge_line("uses_device", pad_id('t', i), dev);
      }
      for (auto j : sample(rng, all, i, o.noise_degree)) {
        edges += edge_line("same_city", pad_id('t', i), pad_id('t', j));
      }
    }
  }

  SyntheticDataset out{dir / "nodes.jsonl", dir / "edges.jsonl", dir / "splits.json", kind};
  write_file_atomic(out.nodes, nodes);
  write_file_atomic(out.edges, edges);
  write_file_atomic(out.splits, splits.dump(2) + "\n");
  return out;
}

PipelineConfig synthetic_config(const SyntheticDataset& data, const fs::path& work_dir) {
  PipelineConfig cfg;
  cfg.dataset.nodes = data.nodes;
  cfg.dataset.edges = data.edges;
  cfg.dataset.splits = data.splits;
  if (data.kind == SyntheticKind::kSeparable) {
    cfg.metapaths = {Metapath::of({"same_user"}), Metapath::of({"same_store"})};
  } else {
    cfg.metapaths = {Metapath::of({"uses_device"}), Metapath::of({"same_city"})};
  }
  cfg.diffusion.hops = 1;
  cfg.diffusion.max_neighbors = 4;
  cfg.summarizer.kind = "extractive";
  cfg.summarizer.budget_node = 10;
  cfg.summarizer.budget_meta = 10;
  cfg.classifier.kind = "keyword-oracle";
  cfg.classifier.marker = std::string(kSyntheticMarker);
  cfg.run.cache_dir = work_dir / "cache";
  cfg.run.runs_dir = work_dir / "runs";
  cfg.run.split = "test";
  return cfg;
}

}  // namespace dgp
