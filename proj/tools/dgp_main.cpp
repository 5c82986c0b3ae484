// dgp: command-line front end for the fraud-detection prompt pipeline.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dgp/commands.hpp"
#include "dgp/config.hpp"
#include "dgp/cost_model.hpp"
#include "dgp/error.hpp"
#include "dgp/io.hpp"
#include "dgp/pipeline.hpp"
#include "dgp/synthetic.hpp"

namespace fs = std::filesystem;

namespace {

struct GlobalOptions {
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::size_t> hops;
  std::optional<std::size_t> neighbors;
  std::optional<double> threshold;
  std::optional<std::size_t> parallelism;
  std::string cache_dir;
  std::string runs_dir;
  std::string split;
};

dgp::PipelineConfig resolve_config(const GlobalOptions& g) {
  std::vector<std::string> sets = g.sets;
  auto quote = [](const std::string& s) { return dgp::json(s).dump(); };
  if (g.hops) sets.push_back("diffusion.K=" + std::to_string(*g.hops));
  if (g.neighbors) sets.push_back("diffusion.M=" + std::to_string(*g.neighbors));
  if (g.threshold) sets.push_back("run.f1_threshold=" + dgp::json(*g.threshold).dump());
  if (g.parallelism) sets.push_back("run.parallelism=" + std::to_string(*g.parallelism));
  if (!g.cache_dir.empty()) sets.push_back("run.cache_dir=" + quote(fs::absolute(g.cache_dir).string()));
  if (!g.runs_dir.empty()) sets.push_back("run.runs_dir=" + quote(fs::absolute(g.runs_dir).string()));
  if (!g.split.empty()) sets.push_back("run.split=" + quote(g.split));
  if (g.config.empty()) return dgp::parse_config("", fs::current_path(), sets, "<command line>");
  return dgp::load_config(g.config, sets);
}

int run_stage_command(const GlobalOptions& g, dgp::Stage until) {
  const auto result = dgp::run_pipeline(resolve_config(g), until);
  std::cout << dgp::format_run(result);
  if (!result.failures.empty()) {
    std::cerr << result.failures.size() << " prompt(s) failed to classify; see "
              << (result.run_dir / "failures.jsonl").string() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dual-granularity prompting for graph fraud detection"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("-c,--config", g.config, "TOML config file");
  app.add_option("--set", g.sets, "Override a config key, e.g. --set diffusion.K=2")
      ->take_all();
  app.add_option("--hops", g.hops, "Diffusion hops K (diffusion.K)");
  app.add_option("--neighbors", g.neighbors, "Neighbors kept per metapath M (diffusion.M)");
  app.add_option("--threshold", g.threshold, "Macro-F1 decision threshold (run.f1_threshold)");
  app.add_option("--parallelism", g.parallelism, "Backend calls in flight (run.parallelism)");
  app.add_option("--cache-dir", g.cache_dir, "Cache directory (run.cache_dir)");
  app.add_option("--runs-dir", g.runs_dir, "Run directory root (run.runs_dir)");
  app.add_option("--split", g.split, "Target split (run.split)");

  auto* ingest = app.add_subcommand("ingest", "Validate the dataset and write a bundle plus stats.json");
  std::string ingest_out;
  ingest->add_option("-o,--out", ingest_out, "Bundle directory (default dataset.bundle)");

  auto* enumerate = app.add_subcommand("enumerate-metapaths",
                                       "List relation sequences with neighborhood statistics");
  std::optional<std::size_t> max_length;
  std::string enum_format = "text";
  enumerate->add_option("--max-length", max_length, "Longest sequence (default diffusion.K)");
  enumerate->add_option("--format", enum_format)->check(CLI::IsMember({"text", "json"}));

  auto* trim = app.add_subcommand("trim", "Run the pipeline through neighbor trimming");
  auto* summarize = app.add_subcommand("summarize", "Run through node and metapath summaries");
  auto* assemble = app.add_subcommand("assemble", "Run through prompt assembly");
  auto* classify = app.add_subcommand("classify", "Run through classification");
  auto* run = app.add_subcommand("run", "Run every stage and print the evaluation");

  auto* eval = app.add_subcommand("eval", "Evaluate a run, or an existing predictions CSV");
  std::string predictions_path;
  eval->add_option("--predictions", predictions_path, "predictions.csv to score instead of running");

  auto* cost = app.add_subcommand("cost", "Tabulate prompt-size formulas over a parameter sweep");
  std::string sweep = "K=0,1,2,3";
  std::string cost_format = "text";
  std::string cost_out;
  dgp::CostParams params;
  cost->add_option("--sweep", sweep, "PARAM=v1,v2,... with PARAM one of L,D,R,B,K,M,m,p")
      ->capture_default_str();
  cost->add_option("--format", cost_format)->check(CLI::IsMember({"text", "csv"}))->capture_default_str();
  cost->add_option("-o,--out", cost_out, "Write the table to a file instead of stdout");
  cost->add_option("--L", params.L, "Tokens per node text")->capture_default_str();
  cost->add_option("--D", params.D, "Average out-degree")->capture_default_str();
  cost->add_option("--R", params.R, "Relation types")->capture_default_str();
  cost->add_option("--B", params.B, "Summary budget")->capture_default_str();
  cost->add_option("--K", params.K, "Hops")->capture_default_str();
  cost->add_option("--M", params.M, "Neighbors per metapath")->capture_default_str();
  cost->add_option("--m", params.m, "Tokens per neighbor (dilution model)")->capture_default_str();
  cost->add_option("--p", params.p, "Fraud ratio")->capture_default_str();

  auto* synth = app.add_subcommand("synth", "Write a synthetic dataset and a matching config");
  std::string synth_kind = "separable";
  std::string synth_out;
  dgp::SyntheticOptions synth_opts;
  synth->add_option("--kind", synth_kind)
      ->check(CLI::IsMember({"separable", "neighbor-signal"}))
      ->capture_default_str();
  synth->add_option("-o,--out", synth_out, "Output directory")->required();
  synth->add_option("--targets", synth_opts.num_targets, "Labeled nodes")->capture_default_str();
  synth->add_option("--seed", synth_opts.seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (ingest->parsed()) {
      const auto r = dgp::cmd_ingest(resolve_config(g), ingest_out);
      for (const auto& w : r.graph.warnings()) std::cerr << "warning: " << w << "\n";
      std::cout << dgp::format_stats(r.stats) << "bundle written to " << r.bundle.string() << "\n";
    } else if (enumerate->parsed()) {
      const auto cfg = resolve_config(g);
      const auto candidates = dgp::cmd_enumerate_metapaths(cfg, max_length.value_or(cfg.diffusion.hops));
      if (enum_format == "json") {
        std::cout << dgp::candidates_to_json(candidates).dump(2) << "\n";
      } else {
        std::cout << dgp::format_candidates(candidates);
      }
    } else if (trim->parsed()) {
      return run_stage_command(g, dgp::Stage::kTrim);
    } else if (summarize->parsed()) {
      return run_stage_command(g, dgp::Stage::kMetapathSummaries);
    } else if (assemble->parsed()) {
      return run_stage_command(g, dgp::Stage::kPrompts);
    } else if (classify->parsed()) {
      return run_stage_command(g, dgp::Stage::kClassify);
    } else if (run->parsed()) {
      return run_stage_command(g, dgp::Stage::kEval);
    } else if (eval->parsed()) {
      if (predictions_path.empty()) return run_stage_command(g, dgp::Stage::kEval);
      const double threshold = g.threshold.value_or(
          g.config.empty() ? 0.5 : resolve_config(g).run.f1_threshold);
      const auto report = dgp::eval_predictions_file(predictions_path, threshold);
      std::cout << dgp::format_report(report);
    } else if (cost->parsed()) {
      const auto [param, values] = dgp::parse_sweep(sweep);
      const auto table = dgp::sweep_cost(params, param, values);
      const std::string text = cost_format == "csv" ? dgp::to_csv(table) : dgp::to_text(table);
      if (cost_out.empty()) {
        std::cout << text;
      } else {
        dgp::write_file_atomic(cost_out, text);
      }
    } else if (synth->parsed()) {
      const fs::path out = fs::absolute(synth_out);
      const auto kind = synth_kind == "separable" ? dgp::SyntheticKind::kSeparable
                                                  : dgp::SyntheticKind::kNeighborSignal;
      const auto data = dgp::write_synthetic_dataset(out, kind, synth_opts);
      dgp::write_file_atomic(out / "config.toml", dgp::to_toml(dgp::synthetic_config(data, out)));
      std::cout << "dataset and config written to " << out.string() << "\n";
    }
    return 0;
  } catch (const dgp::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::overflow_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const dgp::StageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const dgp::BackendError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
