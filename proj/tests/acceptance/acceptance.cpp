// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "dgp/classifier.hpp"
#include "dgp/cost_model.hpp"
#include "dgp/io.hpp"
#include "dgp/metapath.hpp"
#include "dgp/numeric_agg.hpp"
#include "dgp/pipeline.hpp"
#include "dgp/prompt.hpp"
#include "dgp/summarizer.hpp"
#include "dgp/synthetic.hpp"
#include "dgp/tokenizer.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace dgp;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

// Collects the first few failure messages of a criterion.
class Check {
 public:
  void expect(bool cond, const std::string& what) {
    ++checks_;
    if (cond) return;
    ++failures_;
    if (failures_ <= 3) messages_.push_back(what);
  }
  std::size_t checks() const { return checks_; }
  Outcome outcome(const std::string& summary) const {
    Outcome o{failures_ == 0, summary};
    if (failures_ > 0) {
      o.detail += "; " + std::to_string(failures_) + " failed";
      for (const auto& m : messages_) o.detail += "; " + m;
    }
    return o;
  }

 private:
  std::size_t checks_ = 0;
  std::size_t failures_ = 0;
  std::vector<std::string> messages_;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(3);
  s << x;
  return s.str();
}

oracle::Dense dense_features(const HeteroGraph& g) {
  oracle::Dense x(g.num_nodes(), std::vector<double>(g.feature_width()));
  for (std::size_t i = 0; i < g.num_nodes(); ++i) {
    for (std::size_t j = 0; j < g.feature_width(); ++j) x[i][j] = g.features()(i, j);
  }
  return x;
}

oracle::Dense to_double(const std::vector<std::vector<std::uint64_t>>& a) {
  oracle::Dense d(a.size(), std::vector<double>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < a.size(); ++j) d[i][j] = static_cast<double>(a[i][j]);
  }
  return d;
}

// Returns the input twice plus filler, whatever the budget.
class OvershootingBackend final : public SummarizerBackend {
 public:
  std::string identity() const override { return "overshooting"; }
  std::string summarize(const SummaryRequest& r) override {
    return r.text + "\n" + r.text + " and some more words for good measure";
  }
};

std::string random_text(std::mt19937_64& rng) {
  static const char* pieces[] = {"a", "bb", "  ", "\t", "\n", "word", "x,y", "|", "\r\n", "  zz "};
  const std::size_t n = rng() % 80;
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s += pieces[rng() % std::size(pieces)];
  return s;
}

// criterion 1
Outcome metapath_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  Check c;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng() % 9;
    const std::size_t num_rel = 1 + rng() % 3;
    const auto rg = fixtures::random_graph(rng, n, num_rel, 0.35, 2, 0, trial % 4 == 0);
    for (int q = 0; q < 4; ++q) {
      const auto rels = fixtures::random_metapath(rng, rg.relations, 3);
      const auto a = compose_metapath(rg.graph, Metapath::of(rels));
      const auto want = oracle::path_counts(rg.typed, rels);
      for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t w = 0; w < n; ++w) {
          c.expect(a.at(u, w) == want[u][w], "count mismatch in trial " + std::to_string(trial));
        }
        const auto got = metapath_neighborhood(a, u);
        const auto reach = oracle::reachable(rg.typed, rels, u);
        c.expect(std::set<std::size_t>(got.begin(), got.end()) == reach && got.size() == reach.size(),
                 "neighborhood mismatch in trial " + std::to_string(trial));
      }
    }
  }
  const double secs = seconds_since(t0);
  c.expect(secs < 10.0, "runtime " + fmt(secs) + " s");
  return c.outcome("50 graphs, " + std::to_string(c.checks()) + " checks, " + fmt(secs) + " s");
}

// criterion 2
Outcome diffusion_correctness() {
  std::mt19937_64 rng(202);
  Check c;
  std::size_t zero_rows = 0, full_rows = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 2 + rng() % 7;
    const auto rg = fixtures::random_graph(rng, n, 2, 0.3, 1, 0, trial % 3 == 0);
    const auto rels = fixtures::random_metapath(rng, rg.relations, 2);
    const auto t = transition_matrix(compose_metapath(rg.graph, Metapath::of(rels)));
    const auto t_ref = oracle::row_normalize(to_double(oracle::path_counts(rg.typed, rels)));

    std::vector<bool> nonzero(n, false);
    for (std::size_t i = 0; i < n; ++i) {
      double sum = 0.0;
      for (double x : t_ref[i]) sum += x;
      nonzero[i] = sum > 0;
      const bool flagged =
          std::find(t.zero_rows.begin(), t.zero_rows.end(), i) != t.zero_rows.end();
      c.expect(flagged == !nonzero[i], "zero-row flag");
      double row = 0.0;
      for (double x : t.matrix.row_values(i)) row += x;
      if (nonzero[i]) c.expect(std::abs(row - 1.0) <= 1e-9, "T row sum " + fmt(row));
      else c.expect(row == 0.0, "zero row not empty");
      zero_rows += !nonzero[i];
    }

    for (std::size_t k = 1; k <= 3; ++k) {
      const auto z = diffusion_operator(t.matrix, k);
      const auto z_ref = oracle::power_sum(t_ref, k);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          c.expect(std::abs(z.at(i, j) - z_ref[i][j]) <= 1e-12, "Z entry");
        }
      }
      // Full row: no walk of length < k from i reaches a zero row.
      for (std::size_t i = 0; i < n; ++i) {
        std::set<std::size_t> frontier{i}, seen{i};
        for (std::size_t step = 1; step < k; ++step) {
          std::set<std::size_t> next;
          for (std::size_t u : frontier) {
            for (std::size_t w = 0; w < n; ++w) {
              if (t_ref[u][w] > 0) next.insert(w);
            }
          }
          seen.insert(next.begin(), next.end());
          frontier = std::move(next);
        }
        bool full = true;
        for (std::size_t u : seen) full = full && nonzero[u];
        if (!full) continue;
        ++full_rows;
        double row = 0.0;
        for (double x : z.row_values(i)) row += x;
        c.expect(std::abs(row - double(k + 1) / double(k)) <= 1e-9, "Z row sum " + fmt(row));
      }
    }
  }
  c.expect(zero_rows > 0 && full_rows > 0, "degenerate sample");
  return c.outcome("60 matrices x K in {1,2,3}, " + std::to_string(full_rows) + " full rows, " +
                   std::to_string(zero_rows) + " zero rows");
}

// criterion 3
Outcome trimming_oracle() {
  std::mt19937_64 rng(303);
  Check c;
  std::size_t tied = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 4 + rng() % 12;
    const auto rg = fixtures::random_graph(rng, n, 2, 0.4, 1 + rng() % 3, rng() % 4);
    const std::size_t total = rg.typed.n;
    const auto rels = fixtures::random_metapath(rng, rg.relations, 2);
    DiffusionConfig cfg;
    cfg.hops = 1 + rng() % 3;
    cfg.max_neighbors = 1 + rng() % 5;
    cfg.dense_threshold = trial % 2 ? 0 : 50'000;
    const auto z = oracle::power_sum(oracle::row_normalize(to_double(oracle::path_counts(rg.typed, rels))),
                                     cfg.hops);
    const auto emb = oracle::matmul(z, dense_features(rg.graph));
    const MetapathTrimmer trimmer(rg.graph, Metapath::of(rels), cfg, rg.graph.features());
    for (std::size_t v = 0; v < total; ++v) {
      const auto got = trimmer.trim(v);
      const auto want = oracle::nearest(emb, v, oracle::reachable(rg.typed, rels, v), cfg.max_neighbors);
      bool same = got.neighbors.size() == want.size();
      for (std::size_t i = 0; same && i < want.size(); ++i) {
        same = got.neighbors[i].id == want[i].id &&
               std::abs(got.neighbors[i].distance - want[i].distance) <= 1e-9;
        if (i > 0 && want[i].distance == want[i - 1].distance) ++tied;
      }
      c.expect(same, "trial " + std::to_string(trial) + " node " + std::to_string(v));
    }
  }
  return c.outcome("100 instances, " + std::to_string(c.checks()) + " targets, " + std::to_string(tied) +
                   " tied positions");
}

// Orders candidates like the library but treats distances that differ only
// by rounding noise (relative 1e-9) as ties, then truncates to m.
std::vector<Neighbor> tie_normalized(std::vector<Neighbor> all, std::size_t m) {
  std::size_t start = 0;
  while (start < all.size()) {
    std::size_t end = start + 1;
    while (end < all.size() && all[end].distance - all[start].distance <= 1e-9 * (1.0 + all[start].distance)) ++end;
    std::sort(all.begin() + std::ptrdiff_t(start), all.begin() + std::ptrdiff_t(end),
              [](const Neighbor& a, const Neighbor& b) { return a.id < b.id; });
    start = end;
  }
  if (all.size() > m) all.resize(m);
  return all;
}

bool same_ids(const std::vector<Neighbor>& a, const std::vector<Neighbor>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].id != b[i].id) return false;
  }
  return true;
}

bool scaled_distances(const std::vector<Neighbor>& base, const std::vector<Neighbor>& scaled, double factor) {
  if (base.size() != scaled.size()) return false;
  for (std::size_t i = 0; i < base.size(); ++i) {
    const double want = factor * base[i].distance;
    if (std::abs(scaled[i].distance - want) > 1e-12 * (1.0 + want)) return false;
  }
  return true;
}

// criterion 4
Outcome scalar_invariance() {
  std::mt19937_64 rng(404);
  Check c;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 4 + rng() % 12;
    const auto rg = fixtures::random_graph(rng, n, 2, 0.4, 2, rng() % 3);
    const auto rels = fixtures::random_metapath(rng, rg.relations, 2);
    const auto p = Metapath::of(rels);
    DiffusionConfig cfg;
    cfg.hops = 1 + rng() % 3;
    cfg.max_neighbors = 1 + rng() % 5;
    cfg.dense_threshold = trial % 2 ? 0 : 50'000;
    const auto a = compose_metapath(rg.graph, p);
    const auto z = diffusion_operator(transition_matrix(a).matrix, cfg.hops);
    const auto& x = rg.graph.features();
    const auto base = diffusion_embeddings(z, x);
    const MetapathTrimmer trimmer(rg.graph, p, cfg, x);
    for (double factor : {0.5, 2.0, 10.0}) {
      // (cZ)X = Z(cX): the production trimmer sees the scaled operator
      // through scaled features.
      DenseMatrix cx(x.rows(), x.cols());
      for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t j = 0; j < x.cols(); ++j) cx(i, j) = factor * x(i, j);
      }
      const MetapathTrimmer scaled_trimmer(rg.graph, p, cfg, cx);
      const auto scaled = diffusion_embeddings(scale(z, factor), x);
      for (std::size_t v = 0; v < rg.typed.n; ++v) {
        const auto ref = trimmer.trim(v).neighbors;
        const auto got = scaled_trimmer.trim(v).neighbors;
        c.expect(same_ids(ref, got) && scaled_distances(ref, got, factor),
                 "trimmer, factor " + fmt(factor) + " trial " + std::to_string(trial));

        const auto cand = metapath_neighborhood(a, v);
        const auto b = tie_normalized(select_nearest(base, v, cand, cand.size()), cfg.max_neighbors);
        const auto s = tie_normalized(select_nearest(scaled, v, cand, cand.size()), cfg.max_neighbors);
        c.expect(same_ids(b, s) && same_ids(b, ref) && scaled_distances(b, s, factor),
                 "explicit Z, factor " + fmt(factor) + " trial " + std::to_string(trial));
      }
    }
  }
  return c.outcome("100 instances x {0.5, 2, 10}, " + std::to_string(c.checks()) +
                   " neighborhood checks, trimmer and explicit Z");
}

// Budget checks on every summary artifact of a pipeline run.
void check_run_budgets(Check& c, const fs::path& run_dir, const PipelineConfig& cfg, std::size_t& seen) {
  for (const auto& [file, budget] : {std::pair{"node_summaries.jsonl", cfg.summarizer.budget_node},
                                     std::pair{"metapath_summaries.jsonl", cfg.summarizer.budget_meta}}) {
    std::istringstream in(read_file(run_dir / file));
    for (std::string line; std::getline(in, line);) {
      if (line.empty()) continue;
      const auto s = json::parse(line).at("summary");
      const auto text = s.at("text").get<std::string>();
      ++seen;
      c.expect(oracle::count_tokens(text) <= budget && s.at("budget").get<std::size_t>() == budget,
               std::string(file) + ": " + text);
    }
  }
}

// criterion 5
Outcome budget_guarantee() {
  Check c;
  std::size_t seen = 0;
  for (auto kind : {SyntheticKind::kSeparable, SyntheticKind::kNeighborSignal}) {
    for (bool overshoot : {false, true}) {
      fixtures::TempDir dir;
      SyntheticOptions o;
      o.num_targets = 100;
      const auto data = write_synthetic_dataset(dir / "data", kind, o);
      auto cfg = synthetic_config(data, dir.path());
      cfg.summarizer.budget_node = 6;
      cfg.summarizer.budget_meta = 9;
      PipelineBackends backends;
      if (overshoot) backends.summarizer = std::make_shared<OvershootingBackend>();
      const auto r = run_pipeline(cfg, Stage::kPrompts, backends);
      check_run_budgets(c, r.run_dir, cfg, seen);
    }
  }

  std::vector<std::string> corpus;
  for (const auto& e : fs::recursive_directory_iterator(DGP_SOURCE_DIR "/examples")) {
    if (e.is_regular_file()) corpus.push_back(read_file(e.path()));
  }
  std::mt19937_64 rng(505);
  for (int i = 0; i < 2000; ++i) corpus.push_back(random_text(rng));

  Summarizer extractive(std::make_shared<ExtractiveSummarizer>());
  Summarizer overshooting(std::make_shared<OvershootingBackend>());
  for (const auto& text : corpus) {
    for (std::size_t budget : {std::size_t{1}, std::size_t{3}, std::size_t{10}, std::size_t{64}}) {
      for (auto* s : {&extractive, &overshooting}) {
        const auto out = s->summarize(text, budget);
        ++seen;
        c.expect(oracle::count_tokens(out.text) <= budget && out.measured_tokens == token_count(out.text),
                 "budget " + std::to_string(budget));
      }
    }
  }
  return c.outcome(std::to_string(seen) + " summaries, extractive and overshooting backends");
}

// Complete tree of the given depth where every node has `degree` children;
// child i hangs off relation "r{i % R}". Node texts are `L` distinct words.
struct Tree {
  HeteroGraph graph;
  std::vector<std::vector<std::size_t>> children;  // by creation index
};

Tree build_tree(std::size_t degree, std::size_t depth, std::size_t L, std::size_t R) {
  std::vector<std::size_t> level{0};
  std::vector<std::vector<std::size_t>> children(1);
  std::vector<std::tuple<std::string, std::size_t, std::size_t>> edges;
  for (std::size_t d = 0; d < depth; ++d) {
    std::vector<std::size_t> next;
    for (std::size_t parent : level) {
      for (std::size_t i = 0; i < degree; ++i) {
        const std::size_t child = children.size();
        children.emplace_back();
        children[parent].push_back(child);
        edges.emplace_back("r" + std::to_string(i % R), parent, child);
        next.push_back(child);
      }
    }
    level = std::move(next);
  }
  GraphBuilder b;
  for (std::size_t i = 0; i < children.size(); ++i) {
    std::string text;
    for (std::size_t w = 0; w < L; ++w) text += (w ? " w" : "w") + std::to_string(i) + "_" + std::to_string(w);
    b.add_node(fixtures::node_name(i), "t", text, std::vector<double>{double(i)}, std::nullopt);
  }
  for (std::size_t r = 0; r < R; ++r) b.add_relation("r" + std::to_string(r));
  for (const auto& [rel, s, d] : edges) b.add_edge(rel, fixtures::node_name(s), fixtures::node_name(d));
  return {std::move(b).build(), std::move(children)};
}

// criterion 6
Outcome token_formulas() {
  Check c;
  const std::size_t R = 2, B = 10;
  std::size_t exact = 0, configs = 0;
  for (std::size_t D : {2, 3}) {
    for (std::size_t K : {1, 2}) {
      for (std::size_t L : {5, 10}) {
        ++configs;
        const auto tree = build_tree(D, K, L, R);
        const auto& g = tree.graph;
        const std::string where = "D=" + std::to_string(D) + " K=" + std::to_string(K) + " L=" + std::to_string(L);

        // Concatenate the root and every node within K hops; one token per
        // neighbor for the vectorized prompt.
        std::vector<std::size_t> frontier{0}, within{0};
        for (std::size_t hop = 0; hop < K; ++hop) {
          std::vector<std::size_t> next;
          for (std::size_t u : frontier) {
            for (std::size_t w : tree.children[u]) next.push_back(w);
          }
          within.insert(within.end(), next.begin(), next.end());
          frontier = std::move(next);
        }
        std::string concat, vectorized = g.node(0).text;
        for (std::size_t u : within) concat += g.node(u).text + "\n";
        for (std::size_t i = 1; i < within.size(); ++i) vectorized += " <emb>";
        c.expect(oracle::count_tokens(concat) == full_neighbor_tokens(L, D, K), "full_neighbor " + where);
        c.expect(oracle::count_tokens(vectorized) == vectorized_tokens(L, D, K), "vectorized " + where);

        // Assembled DGP prompt over every metapath of length 1..K.
        const auto metapaths = enumerate_metapaths(g, K);
        c.expect(metapaths.size() == k_hop_size(R, K), "metapath count " + where);
        DiffusionConfig cfg;
        cfg.hops = K;
        cfg.max_neighbors = 16;
        Summarizer summarizer(std::make_shared<ExtractiveSummarizer>());
        std::map<NodeId, Summary> node_summaries;
        for (const auto& n : g.nodes()) node_summaries[n.id] = summarize_node(n, B, summarizer);
        std::vector<MetapathBlock> blocks;
        bool saturated = true;
        for (const auto& p : metapaths) {
          const auto t = trim_neighborhood(g, p, 0, cfg, g.features());
          auto s = summarize_metapath(0, p, t, node_summaries, B, summarizer);
          saturated = saturated && token_count(s.text) == B;
          blocks.push_back({p.name, std::move(s), aggregate_numeric(g, t)});
        }
        PromptTemplate tmpl;
        const auto doc = build_prompt(0, g.node(0).text, blocks, tmpl);
        std::size_t stats_tokens = 0;
        for (const auto& s : doc.sections) {
          if (s.kind == SectionKind::kMetapathStats) stats_tokens += oracle::count_tokens(s.body);
        }
        const std::size_t measured = oracle::count_tokens(serialize_prompt(doc));
        c.expect(measured == doc.token_count, "prompt token_count " + where);
        const std::size_t content = measured - template_overhead(tmpl, metapaths.size()) - stats_tokens;
        const std::size_t bound = dgp_final_tokens(L, R, K, B);
        c.expect(content <= bound, "dgp bound " + where + ": " + std::to_string(content) + " > " +
                                       std::to_string(bound));
        if (saturated) {
          ++exact;
          c.expect(content == bound, "saturated dgp " + where + ": " + std::to_string(content));
        }
      }
    }
  }
  c.expect(exact > 0, "no configuration saturated the budgets");

  // Dominance: R^K scaling of the summarization input against D^K.
  std::size_t grid = 0;
  for (std::uint64_t R2 = 2; R2 <= 5; ++R2) {
    for (std::uint64_t D = R2 + 1; D <= 40; ++D) {
      for (std::uint64_t K = 1; K <= 3; ++K) {
        for (std::uint64_t L : {5, 50, 170}) {
          for (std::uint64_t M : {1, 4, 16}) {
            for (std::uint64_t Bv : {5, 10, 40}) {
              if (Bv * M * k_hop_size(R2, K) >= L * k_hop_size(D, K)) continue;
              ++grid;
              c.expect(dgp_summarization_tokens(L, R2, K, M, Bv) < full_neighbor_tokens(L, D, K), "dominance");
            }
          }
        }
      }
    }
  }
  return c.outcome(std::to_string(configs) + " trees (" + std::to_string(exact) +
                   " saturated, exact), dominance on " + std::to_string(grid) + " grid points");
}

// criterion 7
Outcome attention_dilution() {
  std::mt19937_64 rng(707);
  Check c;
  for (int i = 0; i < 1000; ++i) {
    const std::uint64_t L = 1 + rng() % 400, m = 1 + rng() % 30, n = 1 + rng() % 300;
    const std::uint64_t j = rng() % (m * n + 1);
    const double p = double(j) / double(m * n);
    const auto a = verify_attention_mass(L, m, n, p, double(rng() % 7) - 3.0);
    const auto r = fraud_token_ratio(double(L), double(m), double(n), p);
    c.expect(!a.rounded, "non-integral draw");
    c.expect(std::abs(a.mass - r.ratio) <= 1e-12, "mass " + fmt(a.mass) + " vs " + fmt(r.ratio));
    c.expect(r.upper_bound && r.ratio <= *r.upper_bound, "upper bound");
  }
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const auto r = fraud_token_ratio(1 + 500 * u(rng), 1 + 30 * u(rng), 1e-3 + 1e4 * u(rng), u(rng));
    c.expect(r.ratio <= *r.upper_bound * (1 + 1e-15), "upper bound (real draw)");
  }
  for (double p : {0.0, 0.01, 0.1, 0.5, 0.9, 1.0}) {
    c.expect(std::abs(fraud_token_ratio(170, 10, 1e9, p).ratio - p) <= 1e-6, "limit at p=" + fmt(p));
  }
  return c.outcome("1000 integral draws, 1000 bound draws, limit at n_K=1e9");
}

// criterion 8
Outcome closed_form_constants() {
  Check c;
  c.expect(dgp_final_tokens(170, 3, 2, 10) == 290, "dgp_final_tokens(170,3,2,10)");
  c.expect(full_neighbor_tokens(170, 133, 1) == 22780, "full_neighbor_tokens(170,133,1)");
  c.expect(vectorized_tokens(170, 133, 2) == 17992, "vectorized_tokens(170,133,2)");
  c.expect(dgp_summarization_tokens(170, 3, 2, 4, 10) == 650, "dgp_summarization_tokens(170,3,2,4,10)");
  CostParams base;
  const auto t = sweep_cost(base, "K", {1, 2, 3});
  c.expect(t.rows.size() == 3 && t.rows[0].dgp_final == 200 && t.rows[1].dgp_final == 290 &&
               t.rows[2].dgp_final == 560,
           "K sweep");
  return c.outcome("290, 22780, 17992, 650, K sweep 200/290/560");
}

// criterion 9
Outcome metric_oracles() {
  std::mt19937_64 rng(909);
  Check c;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng() % 199;
    const int levels = trial % 2 == 0 ? 2 + int(rng() % 5) : 100000;
    std::vector<Prediction> p;
    std::vector<oracle::Scored> s;
    for (std::size_t i = 0; i < n; ++i) {
      const double score = double(rng() % levels) / double(levels - 1);
      const int label = i == 0 ? 1 : i == 1 ? 0 : int(rng() % 3 == 0);
      p.push_back({i, score, label});
      s.push_back({i, score, label});
    }
    const double threshold = trial % 3 == 0 ? 0.5 : double(rng() % 100) / 100.0;
    c.expect(std::abs(auroc(p) - oracle::auroc_pairs(s)) <= 1e-12, "auroc");
    c.expect(std::abs(auprc(p) - oracle::average_precision(s)) <= 1e-12, "auprc");
    c.expect(std::abs(macro_f1(p, threshold) - oracle::macro_f1(s, threshold)) <= 1e-12, "macro_f1");
  }
  const std::vector<Prediction> worked{{0, 0.9, 1}, {1, 0.8, 0}, {2, 0.7, 1}};
  c.expect(auprc(worked) == 5.0 / 6.0, "worked AUPRC example");
  return c.outcome("200 instances, AUPRC worked example = 5/6");
}

// criterion 10
Outcome probability_loss() {
  Check c;
  c.expect(fraud_probability({0, 0}) == 0.5, "p(0,0)");
  c.expect(std::abs(fraud_probability({std::log(2.0), 0}) - 2.0 / 3.0) <= 1e-12, "p(ln2,0)");
  for (const LogitPair lp : {LogitPair{1000, 0}, LogitPair{-1000, 0}, LogitPair{0, 1000}, LogitPair{0, -1000}}) {
    const double p = fraud_probability(lp);
    c.expect(std::isfinite(p) && p >= 0.0 && p <= 1.0, "extreme logit");
  }
  c.expect(fraud_probability({1000, 0}) == 1.0 && fraud_probability({-1000, 0}) == 0.0, "saturation");
  c.expect(std::abs(eval_loss(std::vector<Prediction>{{0, 0.5, 1}}) - std::log(2.0)) <= 1e-12, "loss");
  return c.outcome("p(0,0)=0.5, p(ln2,0)=2/3, |logit|=1000 finite, loss=ln2");
}

// criterion 11
Outcome determinism_and_caching() {
  const auto t0 = std::chrono::steady_clock::now();
  Check c;
  fixtures::TempDir dir;
  SyntheticOptions o;
  o.num_targets = 200;
  const auto data = write_synthetic_dataset(dir / "data", SyntheticKind::kSeparable, o);
  const auto cfg = synthetic_config(data, dir.path());
  const auto first = run_pipeline(cfg);
  const auto second = run_pipeline(cfg);
  const auto a = read_file(first.run_dir / "predictions.csv");
  const auto b = read_file(second.run_dir / "predictions.csv");
  c.expect(first.run_dir != second.run_dir, "distinct run dirs");
  c.expect(!a.empty() && a == b, "predictions differ");
  c.expect(first.summarizer_calls > 0 && first.classifier_calls > 0, "first run made no calls");
  c.expect(second.summarizer_calls == 0 && second.classifier_calls == 0,
           "second run calls: " + std::to_string(second.summarizer_calls) + " summarizer, " +
               std::to_string(second.classifier_calls) + " classifier");
  c.expect(first.report && first.report->auroc == 1.0, "AUROC");
  c.expect(second.report && first.report == second.report, "reports differ");
  const double secs = seconds_since(t0);
  c.expect(secs < 60.0, "runtime " + fmt(secs) + " s");
  return c.outcome("200 targets, " + std::to_string(first.summarizer_calls + first.classifier_calls) +
                   " calls then 0, AUROC " + fmt(first.report ? first.report->auroc : -1) + ", " + fmt(secs) +
                   " s");
}

// criterion 12
Outcome signal_propagation() {
  Check c;
  fixtures::TempDir dir;
  SyntheticOptions o;
  o.num_targets = 200;
  const auto data = write_synthetic_dataset(dir / "data", SyntheticKind::kNeighborSignal, o);
  std::ifstream nodes(data.nodes);
  for (std::string line; std::getline(nodes, line);) {
    const auto j = json::parse(line);
    if (!j.at("label").is_null()) {
      c.expect(j.at("text").get<std::string>().find(kSyntheticMarker) == std::string::npos, "marker in target");
    }
  }
  std::string detail;
  for (std::size_t m : {1, 4}) {
    auto cfg = synthetic_config(data, dir.path());
    cfg.diffusion.hops = 1;
    cfg.diffusion.max_neighbors = m;
    const auto r = run_pipeline(cfg);
    c.expect(r.report && r.report->auroc == 1.0, "M=" + std::to_string(m));
    detail += "M=" + std::to_string(m) + " AUROC " + fmt(r.report ? r.report->auroc : -1) + ", ";
  }
  auto cfg = synthetic_config(data, dir.path());
  cfg.diffusion.hops = 1;
  cfg.run.include_neighbors = false;
  const auto stripped = run_pipeline(cfg);
  c.expect(stripped.report && std::abs(stripped.report->auroc - 0.5) <= 0.05, "stripped");
  detail += "stripped AUROC " + fmt(stripped.report ? stripped.report->auroc : -1);
  return c.outcome(detail);
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"metapath oracle equivalence", metapath_oracle},
      {"diffusion correctness", diffusion_correctness},
      {"trimming oracle", trimming_oracle},
      {"scalar invariance of trimming", scalar_invariance},
      {"budget guarantee", budget_guarantee},
      {"token formulas vs materialization", token_formulas},
      {"attention dilution", attention_dilution},
      {"closed-form constants", closed_form_constants},
      {"metric oracles", metric_oracles},
      {"probability and loss", probability_loss},
      {"end-to-end determinism and caching", determinism_and_caching},
      {"end-to-end signal propagation", signal_propagation},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.ok;
    std::cout << (o.ok ? "[PASS]" : "[FAIL]") << " criterion " << i + 1 << ": " << criteria[i].first << " ("
              << o.detail << ")" << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
