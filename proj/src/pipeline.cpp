#include "dgp/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <set>

#include "dgp/error.hpp"
#include "dgp/hash.hpp"
#include "dgp/io.hpp"
#include "dgp/numeric_agg.hpp"
#include "dgp/parallel.hpp"
#include "dgp/prompt.hpp"

namespace dgp {
namespace fs = std::filesystem;
namespace {

constexpr std::string_view kStageNames[] = {"trim",  "node_summaries", "metapath_summaries",
                                            "stats", "prompts",        "classify",
                                            "eval"};

using Grid = std::vector<std::vector<TrimmedNeighborhood>>;  // [target][metapath]
template <typename T>
using PerPair = std::vector<std::vector<T>>;

struct PromptRecord {
  NodeId node = 0;
  std::string text;
  std::size_t tokens = 0;
};

std::string stage_key(Stage s, const json& inputs) {
  return sha256_hex(json::array({to_string(s), inputs}).dump());
}

class StageStore {
 public:
  explicit StageStore(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

  std::optional<json> load(Stage s, const std::string& key) const {
    const fs::path p = file(s, key);
    std::error_code ec;
    if (!fs::exists(p, ec)) return std::nullopt;
    try {
      return json::parse(read_file(p));
    } catch (const std::exception&) {
      fs::remove(p, ec);
      return std::nullopt;
    }
  }

  void store(Stage s, const std::string& key, const json& value) const {
    write_file_atomic(file(s, key), value.dump());
  }

 private:
  fs::path file(Stage s, const std::string& key) const {
    return dir_ / (std::string(to_string(s)) + "-" + key + ".json");
  }

  fs::path dir_;
};

std::string jsonl(const std::vector<json>& lines) {
  std::string out;
  for (const auto& l : lines) out += l.dump() + "\n";
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(std::string_view line, std::size_t line_no) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  if (quoted) throw ValidationError("predictions CSV line " + std::to_string(line_no) + ": unterminated quote");
  return fields;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

EvalReport report_from_json(const json& j) {
  EvalReport r;
  r.macro_f1 = j.at("macro_f1").get<double>();
  r.auroc = j.at("auroc").get<double>();
  r.auprc = j.at("auprc").get<double>();
  r.loss = j.at("loss").get<double>();
  r.n_pos = j.at("n_pos").get<std::size_t>();
  r.n_neg = j.at("n_neg").get<std::size_t>();
  r.n_failed = j.at("n_failed").get<std::size_t>();
  r.threshold = j.at("threshold").get<double>();
  return r;
}

class Runner {
 public:
  Runner(const PipelineConfig& cfg, RunResult& result)
      : result_(result), store_(cfg.run.cache_dir / "stages") {}

  // Loads `s` from the stage cache or computes it. Values rejected by
  // `keep` are returned but not cached.
  template <typename T, typename Compute, typename Encode, typename Decode, typename Keep>
  T stage(Stage s, const std::string& key, Compute&& compute, Encode&& encode, Decode&& decode,
          Keep&& keep) {
    const auto t0 = std::chrono::steady_clock::now();
    StageRecord rec{s, false, 0.0, key};
    std::optional<T> out;
    if (auto cached = store_.load(s, key)) {
      try {
        out = decode(*cached);
        rec.cached = true;
      } catch (const std::exception&) {
        out.reset();
      }
    }
    if (!out) {
      try {
        out = compute();
      } catch (const StageError&) {
        throw;
      } catch (const std::exception& e) {
        throw StageError(std::string(to_string(s)), e.what());
      }
      if (keep(*out)) store_.store(s, key, encode(*out));
    }
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result_.stages.push_back(rec);
    return std::move(*out);
  }

  template <typename T, typename Compute, typename Encode, typename Decode>
  T stage(Stage s, const std::string& key, Compute&& compute, Encode&& encode, Decode&& decode) {
    return stage<T>(s, key, compute, encode, decode, [](const T&) { return true; });
  }

  void artifact(const std::string& name, std::string_view content) const {
    write_file_atomic(result_.run_dir / name, content);
  }

 private:
  RunResult& result_;
  StageStore store_;
};

void write_run_info(const RunResult& r, const PipelineConfig& cfg, const std::string& fingerprint,
                    std::size_t num_targets, const std::string& status,
                    const std::string& error = {}) {
  json stages = json::array();
  for (const auto& s : r.stages) {
    stages.push_back(
        {{"stage", to_string(s.stage)}, {"cached", s.cached}, {"seconds", s.seconds}, {"key", s.key}});
  }
  json info = {{"status", status},
               {"stages", stages},
               {"summarizer_calls", r.summarizer_calls},
               {"summary_cache_hits", r.summary_cache_hits},
               {"classifier_calls", r.classifier_calls},
               {"graph_fingerprint", fingerprint},
               {"targets", num_targets},
               {"seed", cfg.run.seed}};
  if (!error.empty()) info["error"] = error;
  write_file_atomic(r.run_dir / "run_info.json", info.dump(2) + "\n");
}

}  // namespace

std::string_view to_string(Stage s) { return kStageNames[static_cast<std::size_t>(s)]; }

Stage stage_from_string(std::string_view name) {
  for (std::size_t i = 0; i < std::size(kStageNames); ++i) {
    if (kStageNames[i] == name) return static_cast<Stage>(i);
  }
  throw ValidationError("unknown stage '" + std::string(name) + "'");
}

PipelineBackends make_backends(const PipelineConfig& cfg, PipelineBackends given) {
  if (!given.summarizer) {
    if (cfg.summarizer.kind == "extractive") {
      given.summarizer = std::make_shared<ExtractiveSummarizer>();
    } else if (cfg.summarizer.kind == "http") {
      given.summarizer = std::make_shared<HttpSummarizer>(cfg.summarizer.http_options());
    } else {
      throw ValidationError("unknown summarizer kind '" + cfg.summarizer.kind + "'");
    }
  }
  if (!given.classifier) {
    if (cfg.classifier.kind == "mock-hash") {
      given.classifier = std::make_shared<HashClassifier>();
    } else if (cfg.classifier.kind == "keyword-oracle") {
      given.classifier = std::make_shared<KeywordOracleClassifier>(cfg.classifier.marker);
    } else if (cfg.classifier.kind == "http") {
      given.classifier = std::make_shared<HttpClassifier>(cfg.classifier.http_options());
    } else {
      throw ValidationError("unknown classifier kind '" + cfg.classifier.kind + "'");
    }
  }
  return given;
}

HeteroGraph load_graph(const PipelineConfig& cfg) {
  const IngestOptions options{cfg.dataset.reject_self_loops};
  const auto& b = cfg.dataset.bundle;
  if (!b.empty() && fs::exists(b / "nodes.jsonl") && fs::exists(b / "edges.jsonl") &&
      fs::exists(b / "splits.json")) {
    return ingest_dataset(b / "nodes.jsonl", b / "edges.jsonl", b / "splits.json", options);
  }
  const auto& d = cfg.dataset;
  if (d.nodes.empty() || d.edges.empty() || d.splits.empty()) {
    std::string msg = "dataset: set dataset.nodes, dataset.edges and dataset.splits";
    if (!b.empty()) msg += " (no complete bundle at " + b.string() + "; run `dgp ingest` first)";
    throw ValidationError(msg);
  }
  return ingest_dataset(d.nodes, d.edges, d.splits, options);
}

std::vector<Metapath> resolve_metapaths(const PipelineConfig& cfg, const HeteroGraph& g) {
  std::vector<Metapath> out = cfg.metapaths;
  if (out.empty()) {
    for (const auto& rel : g.relations()) out.push_back(Metapath::of({rel}));
  }
  if (out.empty()) throw ValidationError("the graph has no relations to build metapaths from");
  for (const auto& p : out) {
    validate(p, g);
    validate_section_title(p.name);
  }
  return out;
}

fs::path create_run_dir(const fs::path& runs_dir) {
  fs::create_directories(runs_dir);
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y%m%dT%H%M%SZ", &tm);
  for (int n = 0;; ++n) {
    const fs::path p = runs_dir / (n == 0 ? std::string(stamp) : std::string(stamp) + "-" + std::to_string(n));
    if (fs::create_directory(p)) return p;
  }
}

std::string predictions_csv(std::span<const Prediction> preds, const HeteroGraph& g) {
  std::string out = "node,original_id,p_fraud,label\n";
  for (const auto& p : preds) {
    out += std::to_string(p.node) + "," + csv_field(g.node(p.node).original_id) + "," +
           format_double(p.p_fraud) + "," + (p.label ? std::to_string(*p.label) : "") + "\n";
  }
  return out;
}

std::vector<Prediction> predictions_from_csv(std::string_view csv) {
  std::vector<Prediction> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool header = true;
  while (pos < csv.size()) {
    auto end = csv.find('\n', pos);
    if (end == std::string_view::npos) end = csv.size();
    std::string_view line = csv.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const auto f = split_csv_line(line, line_no);
    if (header) {
      if (f != std::vector<std::string>{"node", "original_id", "p_fraud", "label"}) {
        throw ValidationError("predictions CSV: expected header node,original_id,p_fraud,label");
      }
      header = false;
      continue;
    }
    if (f.size() != 4) {
      throw ValidationError("predictions CSV line " + std::to_string(line_no) + ": expected 4 fields");
    }
    Prediction p;
    try {
      std::size_t used = 0;
      p.node = std::stoull(f[0], &used);
      if (used != f[0].size()) throw std::invalid_argument("node");
      p.p_fraud = std::stod(f[2], &used);
      if (used != f[2].size()) throw std::invalid_argument("p_fraud");
    } catch (const std::exception&) {
      throw ValidationError("predictions CSV line " + std::to_string(line_no) + ": bad number");
    }
    if (!(p.p_fraud >= 0.0 && p.p_fraud <= 1.0)) {
      throw ValidationError("predictions CSV line " + std::to_string(line_no) + ": p_fraud outside [0, 1]");
    }
    if (f[3] == "0" || f[3] == "1") {
      p.label = f[3] == "1";
    } else if (!f[3].empty()) {
      throw ValidationError("predictions CSV line " + std::to_string(line_no) + ": label must be 0, 1 or empty");
    }
    out.push_back(p);
  }
  if (header) throw ValidationError("predictions CSV: missing header");
  return out;
}

RunResult run_pipeline(const PipelineConfig& cfg, Stage until, PipelineBackends backends) {
  cfg.validate();
  const HeteroGraph g = load_graph(cfg);
  const std::vector<Metapath> metapaths = resolve_metapaths(cfg, g);
  const auto split = g.split(cfg.run.split);
  const std::vector<NodeId> targets(split.begin(), split.end());
  if (!cfg.run.feature_names.empty() && cfg.run.feature_names.size() != g.feature_width()) {
    throw ValidationError("run.feature_names has " + std::to_string(cfg.run.feature_names.size()) +
                          " names but the graph has " + std::to_string(g.feature_width()) +
                          " numeric features");
  }
  backends = make_backends(cfg, std::move(backends));
  const std::string fingerprint = graph_fingerprint(g);
  const std::size_t width = cfg.run.parallelism;
  const std::size_t n_t = targets.size();
  const std::size_t n_p = metapaths.size();

  Summarizer summarizer(backends.summarizer, cfg.summarizer.instruction,
                        std::make_shared<SummaryCache>(cfg.run.cache_dir / "summaries"));

  RunResult result;
  result.run_dir = create_run_dir(cfg.run.runs_dir);
  write_file_atomic(result.run_dir / "config.toml", to_toml(cfg));
  Runner runner(cfg, result);

  auto sync_counters = [&] {
    result.summarizer_calls = summarizer.backend_calls();
    result.summary_cache_hits = summarizer.cache_hits();
  };

  json metapath_list = json::array();
  for (const auto& p : metapaths) metapath_list.push_back({{"name", p.name}, {"relations", p.relations}});

  try {
    // trim
    const std::string trim_key =
        stage_key(Stage::kTrim, {{"graph", fingerprint},
                                 {"metapaths", metapath_list},
                                 {"K", cfg.diffusion.hops},
                                 {"M", cfg.diffusion.max_neighbors},
                                 {"dense_threshold", cfg.diffusion.dense_threshold},
                                 {"split", cfg.run.split}});
    const Grid trimmed = runner.stage<Grid>(
        Stage::kTrim, trim_key,
        [&] {
          std::vector<std::unique_ptr<MetapathTrimmer>> trimmers;
          for (const auto& p : metapaths) {
            trimmers.push_back(std::make_unique<MetapathTrimmer>(g, p, cfg.diffusion, g.features()));
          }
          Grid out(n_t, std::vector<TrimmedNeighborhood>(n_p));
          parallel_for(n_t * n_p, width, [&](std::size_t k) {
            out[k / n_p][k % n_p] = trimmers[k % n_p]->trim(targets[k / n_p]);
          });
          return out;
        },
        [&](const Grid& grid) {
          json arr = json::array();
          for (const auto& row : grid) {
            for (const auto& t : row) {
              json ns = json::array();
              for (const auto& n : t.neighbors) ns.push_back({n.id, n.distance});
              arr.push_back({t.target, ns});
            }
          }
          return arr;
        },
        [&](const json& arr) {
          if (arr.size() != n_t * n_p) throw std::runtime_error("size mismatch");
          Grid grid(n_t, std::vector<TrimmedNeighborhood>(n_p));
          for (std::size_t k = 0; k < arr.size(); ++k) {
            auto& t = grid[k / n_p][k % n_p];
            t.target = arr[k].at(0).get<NodeId>();
            if (t.target != targets[k / n_p]) throw std::runtime_error("target mismatch");
            t.metapath = metapaths[k % n_p];
            for (const auto& n : arr[k].at(1)) {
              t.neighbors.push_back({n.at(0).get<NodeId>(), n.at(1).get<double>()});
            }
          }
          return grid;
        });
    {
      std::vector<json> lines;
      for (const auto& row : trimmed) {
        for (const auto& t : row) {
          json ns = json::array();
          for (const auto& n : t.neighbors) ns.push_back({{"id", n.id}, {"distance", n.distance}});
          lines.push_back({{"target", t.target}, {"metapath", t.metapath.name}, {"neighbors", ns}});
        }
      }
      runner.artifact("trimmed.jsonl", jsonl(lines));
    }
    if (until == Stage::kTrim) {
      write_run_info(result, cfg, fingerprint, n_t, "ok");
      return result;
    }

    // node summaries
    using NodeSummaries = std::map<NodeId, Summary>;
    const std::string node_key = stage_key(
        Stage::kNodeSummaries, {{"trim", trim_key},
                                {"backend", backends.summarizer->identity()},
                                {"instruction", cfg.summarizer.instruction},
                                {"B_node", cfg.summarizer.budget_node}});
    const NodeSummaries node_summaries = runner.stage<NodeSummaries>(
        Stage::kNodeSummaries, node_key,
        [&] {
          std::set<NodeId> wanted;
          for (const auto& row : trimmed) {
            for (const auto& t : row) {
              for (const auto& n : t.neighbors) wanted.insert(n.id);
            }
          }
          // One backend request per distinct text.
          std::map<std::string_view, std::vector<NodeId>> by_text;
          for (NodeId id : wanted) by_text[g.node(id).text].push_back(id);
          std::vector<const std::vector<NodeId>*> groups;
          for (const auto& [text, ids] : by_text) groups.push_back(&ids);
          std::vector<Summary> out(groups.size());
          parallel_for(groups.size(), width, [&](std::size_t k) {
            out[k] = summarize_node(g.node(groups[k]->front()), cfg.summarizer.budget_node, summarizer);
          });
          NodeSummaries m;
          for (std::size_t k = 0; k < groups.size(); ++k) {
            for (NodeId id : *groups[k]) m.emplace(id, out[k]);
          }
          return m;
        },
        [](const NodeSummaries& m) {
          json arr = json::array();
          for (const auto& [id, s] : m) arr.push_back({{"node", id}, {"summary", to_json(s)}});
          return arr;
        },
        [](const json& arr) {
          NodeSummaries m;
          for (const auto& e : arr) {
            m.emplace(e.at("node").get<NodeId>(), summary_from_json(e.at("summary")));
          }
          return m;
        });
    {
      std::vector<json> lines;
      for (const auto& [id, s] : node_summaries) {
        lines.push_back({{"node", id}, {"original_id", g.node(id).original_id}, {"summary", to_json(s)}});
      }
      runner.artifact("node_summaries.jsonl", jsonl(lines));
    }
    sync_counters();
    if (until == Stage::kNodeSummaries) {
      write_run_info(result, cfg, fingerprint, n_t, "ok");
      return result;
    }

    // metapath summaries
    const std::string meta_key = stage_key(
        Stage::kMetapathSummaries, {{"trim", trim_key},
                                    {"node_summaries", node_key},
                                    {"backend", backends.summarizer->identity()},
                                    {"instruction", cfg.summarizer.instruction},
                                    {"B_meta", cfg.summarizer.budget_meta}});
    const auto meta_summaries = runner.stage<PerPair<Summary>>(
        Stage::kMetapathSummaries, meta_key,
        [&] {
          // One backend request per distinct neighbor concatenation.
          std::map<std::pair<bool, std::string>, std::vector<std::size_t>> by_text;
          for (std::size_t k = 0; k < n_t * n_p; ++k) {
            const auto& t = trimmed[k / n_p][k % n_p];
            const bool empty = t.neighbors.empty();
            by_text[{empty, empty ? std::string() : join_neighbor_summaries(t, node_summaries)}].push_back(k);
          }
          std::vector<const std::vector<std::size_t>*> groups;
          for (const auto& [key, pairs] : by_text) groups.push_back(&pairs);
          std::vector<Summary> summaries(groups.size());
          parallel_for(groups.size(), width, [&](std::size_t q) {
            const std::size_t k = groups[q]->front();
            summaries[q] = summarize_metapath(targets[k / n_p], metapaths[k % n_p], trimmed[k / n_p][k % n_p],
                                              node_summaries, cfg.summarizer.budget_meta, summarizer);
          });
          PerPair<Summary> out(n_t, std::vector<Summary>(n_p));
          for (std::size_t q = 0; q < groups.size(); ++q) {
            for (std::size_t k : *groups[q]) out[k / n_p][k % n_p] = summaries[q];
          }
          return out;
        },
        [](const PerPair<Summary>& grid) {
          json arr = json::array();
          for (const auto& row : grid) {
            for (const auto& s : row) arr.push_back(to_json(s));
          }
          return arr;
        },
        [&](const json& arr) {
          if (arr.size() != n_t * n_p) throw std::runtime_error("size mismatch");
          PerPair<Summary> grid(n_t, std::vector<Summary>(n_p));
          for (std::size_t k = 0; k < arr.size(); ++k) grid[k / n_p][k % n_p] = summary_from_json(arr[k]);
          return grid;
        });
    {
      std::vector<json> lines;
      for (std::size_t i = 0; i < n_t; ++i) {
        for (std::size_t j = 0; j < n_p; ++j) {
          lines.push_back({{"node", targets[i]},
                           {"metapath", metapaths[j].name},
                           {"summary", to_json(meta_summaries[i][j])}});
        }
      }
      runner.artifact("metapath_summaries.jsonl", jsonl(lines));
    }
    sync_counters();
    if (until == Stage::kMetapathSummaries) {
      write_run_info(result, cfg, fingerprint, n_t, "ok");
      return result;
    }

    // numeric stats
    const std::string stats_key = stage_key(Stage::kStats, {{"trim", trim_key}});
    const auto stats = runner.stage<PerPair<MetapathStats>>(
        Stage::kStats, stats_key,
        [&] {
          PerPair<MetapathStats> out(n_t, std::vector<MetapathStats>(n_p));
          for (std::size_t i = 0; i < n_t; ++i) {
            for (std::size_t j = 0; j < n_p; ++j) out[i][j] = aggregate_numeric(g, trimmed[i][j]);
          }
          return out;
        },
        [](const PerPair<MetapathStats>& grid) {
          json arr = json::array();
          for (const auto& row : grid) {
            for (const auto& s : row) arr.push_back({s.count, s.mean});
          }
          return arr;
        },
        [&](const json& arr) {
          if (arr.size() != n_t * n_p) throw std::runtime_error("size mismatch");
          PerPair<MetapathStats> grid(n_t, std::vector<MetapathStats>(n_p));
          for (std::size_t k = 0; k < arr.size(); ++k) {
            auto& s = grid[k / n_p][k % n_p];
            s.target = targets[k / n_p];
            s.metapath = metapaths[k % n_p];
            s.count = arr[k].at(0).get<std::size_t>();
            s.mean = arr[k].at(1).get<std::vector<double>>();
          }
          return grid;
        });
    {
      std::vector<json> lines;
      for (const auto& row : stats) {
        for (const auto& s : row) {
          lines.push_back(
              {{"node", s.target}, {"metapath", s.metapath.name}, {"count", s.count}, {"mean", s.mean}});
        }
      }
      runner.artifact("stats.jsonl", jsonl(lines));
    }
    if (until == Stage::kStats) {
      write_run_info(result, cfg, fingerprint, n_t, "ok");
      return result;
    }

    // prompts
    PromptTemplate tmpl;
    tmpl.target_token_cap = cfg.run.target_token_cap;
    tmpl.feature_names = cfg.run.feature_names;
    tmpl.include_neighbors = cfg.run.include_neighbors;
    const std::string prompts_key =
        stage_key(Stage::kPrompts, {{"metapath_summaries", meta_key},
                                    {"stats", stats_key},
                                    {"graph", fingerprint},
                                    {"header", tmpl.header},
                                    {"question", tmpl.question},
                                    {"target_token_cap", tmpl.target_token_cap},
                                    {"feature_names", tmpl.feature_names},
                                    {"include_neighbors", tmpl.include_neighbors}});
    const auto prompts = runner.stage<std::vector<PromptRecord>>(
        Stage::kPrompts, prompts_key,
        [&] {
          std::vector<PromptRecord> out;
          for (std::size_t i = 0; i < n_t; ++i) {
            std::vector<MetapathBlock> blocks;
            for (std::size_t j = 0; j < n_p; ++j) {
              blocks.push_back({metapaths[j].name, meta_summaries[i][j], stats[i][j]});
            }
            const PromptDoc doc = build_prompt(targets[i], g.node(targets[i]).text, blocks, tmpl);
            out.push_back({targets[i], serialize_prompt(doc), doc.token_count});
          }
          return out;
        },
        [](const std::vector<PromptRecord>& v) {
          json arr = json::array();
          for (const auto& p : v) arr.push_back({{"node", p.node}, {"prompt", p.text}, {"tokens", p.tokens}});
          return arr;
        },
        [&](const json& arr) {
          if (arr.size() != n_t) throw std::runtime_error("size mismatch");
          std::vector<PromptRecord> v;
          for (const auto& e : arr) {
            v.push_back({e.at("node").get<NodeId>(), e.at("prompt").get<std::string>(),
                         e.at("tokens").get<std::size_t>()});
          }
          return v;
        });
    {
      std::vector<json> lines;
      for (const auto& p : prompts) lines.push_back({{"node", p.node}, {"prompt", p.text}, {"tokens", p.tokens}});
      runner.artifact("prompts.jsonl", jsonl(lines));
    }
    if (until == Stage::kPrompts) {
      write_run_info(result, cfg, fingerprint, n_t, "ok");
      return result;
    }

    // classify
    const std::string classify_key = stage_key(
        Stage::kClassify, {{"prompts", prompts_key}, {"backend", backends.classifier->identity()}});
    auto batch = runner.stage<BatchResult>(
        Stage::kClassify, classify_key,
        [&] {
          std::vector<PromptInput> inputs;
          for (const auto& p : prompts) inputs.push_back({p.node, p.text});
          BatchResult b = classify_batch(inputs, *backends.classifier, width);
          result.classifier_calls += b.backend_calls;
          return b;
        },
        [](const BatchResult& b) {
          json preds = json::array();
          for (const auto& p : b.predictions) preds.push_back({p.node, p.p_fraud});
          return json{{"predictions", preds}};
        },
        [](const json& j) {
          BatchResult b;
          for (const auto& p : j.at("predictions")) {
            b.predictions.push_back({p.at(0).get<NodeId>(), p.at(1).get<double>(), std::nullopt});
          }
          return b;
        },
        // A batch with failures is retried on the next run.
        [](const BatchResult& b) { return b.failures.empty(); });
    for (auto& p : batch.predictions) p.label = g.node(p.node).label;
    result.predictions = batch.predictions;
    result.failures = batch.failures;
    runner.artifact("predictions.csv", predictions_csv(result.predictions, g));
    {
      std::vector<json> lines;
      for (const auto& f : result.failures) {
        lines.push_back({{"node", f.node}, {"original_id", g.node(f.node).original_id}, {"error", f.message}});
      }
      runner.artifact("failures.jsonl", jsonl(lines));
    }
    if (until == Stage::kClassify) {
      write_run_info(result, cfg, fingerprint, n_t, "ok");
      return result;
    }

    // eval
    const std::string eval_key = stage_key(
        Stage::kEval, {{"classify", classify_key},
                       {"threshold", cfg.run.f1_threshold},
                       {"failed", result.failures.size()}});
    result.report = runner.stage<EvalReport>(
        Stage::kEval, eval_key,
        [&] { return evaluate(result.predictions, cfg.run.f1_threshold, result.failures.size()); },
        [](const EvalReport& r) { return to_json(r); }, report_from_json,
        [&](const EvalReport&) { return result.failures.empty(); });
    runner.artifact("report.json", to_json(*result.report).dump(2) + "\n");
    sync_counters();
    write_run_info(result, cfg, fingerprint, n_t, "ok");
    return result;
  } catch (const std::exception& e) {
    sync_counters();
    write_run_info(result, cfg, fingerprint, n_t, "failed", e.what());
    throw;
  }
}

}  // namespace dgp
