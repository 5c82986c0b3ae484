#include "dgp/commands.hpp"

#include <cstdio>
#include <sstream>

#include "dgp/error.hpp"
#include "dgp/io.hpp"

namespace dgp {
namespace fs = std::filesystem;
namespace {

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

}  // namespace

json to_json(const GraphStats& s) {
  json rels = json::array();
  for (const auto& r : s.relations) {
    rels.push_back({{"relation", r.relation}, {"edges", r.edges}, {"avg_out_degree", r.avg_out_degree}});
  }
  return {{"num_nodes", s.num_nodes},
          {"num_labeled", s.num_labeled},
          {"num_fraud", s.num_fraud},
          {"fraud_ratio", s.fraud_ratio},
          {"avg_text_tokens", s.avg_text_tokens},
          {"relations", rels},
          {"split_sizes", s.split_sizes}};
}

IngestResult cmd_ingest(const PipelineConfig& cfg, fs::path out_dir) {
  const auto& d = cfg.dataset;
  for (const auto& [key, path] : {std::pair{"dataset.nodes", &d.nodes},
                                  std::pair{"dataset.edges", &d.edges},
                                  std::pair{"dataset.splits", &d.splits}}) {
    if (path->empty()) throw ValidationError(std::string(key) + " is not set");
  }
  if (out_dir.empty()) out_dir = d.bundle;
  if (out_dir.empty()) throw ValidationError("no output directory: pass --out or set dataset.bundle");

  IngestResult r;
  r.graph = ingest_dataset(d.nodes, d.edges, d.splits, IngestOptions{d.reject_self_loops});
  r.stats = compute_stats(r.graph);
  r.bundle = out_dir;
  export_dataset(r.graph, out_dir);
  write_file_atomic(out_dir / "stats.json", to_json(r.stats).dump(2) + "\n");
  return r;
}

std::vector<MetapathCandidate> cmd_enumerate_metapaths(const PipelineConfig& cfg,
                                                       std::size_t max_length) {
  if (max_length < 1) throw ValidationError("maximum metapath length must be >= 1");
  return metapath_candidates(load_graph(cfg), max_length);
}

std::string format_candidates(const std::vector<MetapathCandidate>& candidates) {
  std::ostringstream out;
  out << pad("metapath", 32) << pad("nnz", 10) << pad("nodes_with_nbrs", 17)
      << pad("mean_size", 12) << "max_size\n";
  for (const auto& c : candidates) {
    out << pad(c.metapath.name, 32) << pad(std::to_string(c.nnz), 10)
        << pad(std::to_string(c.nodes_with_neighbors), 17) << pad(fixed(c.mean_neighborhood, 3), 12)
        << c.max_neighborhood << "\n";
  }
  return out.str();
}

json candidates_to_json(const std::vector<MetapathCandidate>& candidates) {
  json arr = json::array();
  for (const auto& c : candidates) {
    arr.push_back({{"name", c.metapath.name},
                   {"relations", c.metapath.relations},
                   {"nnz", c.nnz},
                   {"nodes_with_neighbors", c.nodes_with_neighbors},
                   {"mean_neighborhood", c.mean_neighborhood},
                   {"max_neighborhood", c.max_neighborhood}});
  }
  return arr;
}

std::pair<std::string, std::vector<double>> parse_sweep(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
    throw ValidationError("sweep '" + spec + "' must look like PARAM=v1,v2,...");
  }
  std::vector<double> values;
  std::stringstream ss(spec.substr(eq + 1));
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError("sweep value '" + item + "' is not a number");
    }
  }
  return {spec.substr(0, eq), values};
}

std::string format_stats(const GraphStats& s) {
  std::ostringstream out;
  out << "nodes            " << s.num_nodes << "\n"
      << "labeled          " << s.num_labeled << "\n"
      << "fraud            " << s.num_fraud << "\n"
      << "fraud ratio p    " << fixed(s.fraud_ratio) << "\n"
      << "avg tokens L     " << fixed(s.avg_text_tokens, 2) << "\n";
  for (const auto& r : s.relations) {
    out << "relation " << pad(r.relation, 20) << " edges " << pad(std::to_string(r.edges), 10)
        << " avg out-degree " << fixed(r.avg_out_degree, 3) << "\n";
  }
  for (const auto& [name, size] : s.split_sizes) out << "split " << pad(name, 10) << " " << size << "\n";
  return out.str();
}

std::string format_report(const EvalReport& r) {
  std::ostringstream out;
  out << "macro_f1   " << fixed(r.macro_f1) << "\n"
      << "auroc      " << fixed(r.auroc) << "\n"
      << "auprc      " << fixed(r.auprc) << "\n"
      << "loss       " << fixed(r.loss) << "\n"
      << "n_pos      " << r.n_pos << "\n"
      << "n_neg      " << r.n_neg << "\n"
      << "n_failed   " << r.n_failed << "\n"
      << "threshold  " << fixed(r.threshold, 2) << "\n";
  return out.str();
}

std::string format_run(const RunResult& r) {
  std::ostringstream out;
  out << pad("stage", 22) << pad("status", 10) << "seconds\n";
  for (const auto& s : r.stages) {
    out << pad(std::string(to_string(s.stage)), 22) << pad(s.cached ? "cached" : "computed", 10)
        << fixed(s.seconds, 3) << "\n";
  }
  out << "\n";
  if (r.report) out << format_report(*r.report) << "\n";
  out << "summarizer calls   " << r.summarizer_calls << " (cache hits " << r.summary_cache_hits
      << ")\n"
      << "classifier calls   " << r.classifier_calls << "\n"
      << "run directory      " << r.run_dir.string() << "\n";
  return out.str();
}

EvalReport eval_predictions_file(const fs::path& csv, double threshold) {
  const auto preds = predictions_from_csv(read_file(csv));
  return evaluate(preds, threshold);
}

}  // namespace dgp
