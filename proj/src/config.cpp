#include "dgp/config.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include <toml.hpp>

#include "dgp/error.hpp"
#include "dgp/prompt.hpp"
#include "dgp/tokenizer.hpp"

namespace dgp {
namespace fs = std::filesystem;
namespace {

// Typed reads from one TOML table; remembers which keys were consumed so
// that typos surface as errors instead of silently using defaults.
class Section {
 public:
  Section(const toml::table* table, std::string name) : table_(table), name_(std::move(name)) {}

  void string(std::string_view key, std::string& out) {
    if (const auto* n = fetch(key)) {
      const auto v = n->value<std::string>();
      if (!n->is_string() || !v) fail(key, "a string");
      out = *v;
    }
  }

  void path(std::string_view key, fs::path& out, const fs::path& base) {
    std::string s;
    if (!fetch(key)) return;
    string(key, s);
    out = resolve(s, base);
  }

  template <typename T>
  void integer(std::string_view key, T& out, std::int64_t min = 0) {
    if (const auto* n = fetch(key)) {
      if (!n->is_integer()) fail(key, "an integer");
      const std::int64_t v = n->as_integer()->get();
      if (v < min) {
        throw ValidationError(qualified(key) + " must be >= " + std::to_string(min) + ", got " +
                              std::to_string(v));
      }
      out = static_cast<T>(v);
    }
  }

  void real(std::string_view key, double& out) {
    if (const auto* n = fetch(key)) {
      if (!n->is_number()) fail(key, "a number");
      out = *n->value<double>();
    }
  }

  void boolean(std::string_view key, bool& out) {
    if (const auto* n = fetch(key)) {
      if (!n->is_boolean()) fail(key, "a boolean");
      out = n->as_boolean()->get();
    }
  }

  void strings(std::string_view key, std::vector<std::string>& out) {
    if (const auto* n = fetch(key)) {
      const auto* arr = n->as_array();
      if (!arr) fail(key, "an array of strings");
      out.clear();
      for (const auto& item : *arr) {
        if (!item.is_string()) fail(key, "an array of strings");
        out.push_back(*item.value<std::string>());
      }
    }
  }

  void finish() const {
    if (!table_) return;
    for (const auto& [k, v] : *table_) {
      if (!used_.count(std::string(k.str()))) {
        throw ValidationError("unknown config key '" + qualified(k.str()) + "'");
      }
    }
  }

  static fs::path resolve(const std::string& s, const fs::path& base) {
    if (s.empty()) return {};
    fs::path p(s);
    return (p.is_absolute() ? p : base / p).lexically_normal();
  }

 private:
  const toml::node* fetch(std::string_view key) {
    used_.insert(std::string(key));
    return table_ ? table_->get(key) : nullptr;
  }

  std::string qualified(std::string_view key) const {
    return name_.empty() ? std::string(key) : name_ + "." + std::string(key);
  }

  [[noreturn]] void fail(std::string_view key, const char* expected) const {
    throw ValidationError("config key '" + qualified(key) + "' must be " + expected);
  }

  const toml::table* table_;
  std::string name_;
  std::set<std::string> used_;
};

const toml::table* subtable(const toml::table& root, std::string_view name) {
  const auto* n = root.get(name);
  if (!n) return nullptr;
  if (!n->is_table()) throw ValidationError("config section [" + std::string(name) + "] must be a table");
  return n->as_table();
}

void read_backend(Section& s, BackendConfig& b) {
  s.string("kind", b.kind);
  s.string("endpoint", b.endpoint);
  s.string("identity", b.identity);
  s.real("timeout_s", b.timeout_s);
  s.integer("max_retries", b.max_retries);
  s.integer("backoff_ms", b.backoff_ms);
}

void apply_override(toml::table& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ValidationError("override '" + assignment + "' must look like key=value");
  }
  std::string key = assignment.substr(0, eq);
  key.erase(std::remove_if(key.begin(), key.end(), [](unsigned char c) { return std::isspace(c); }),
            key.end());
  const std::string value = assignment.substr(eq + 1);

  toml::table parsed;
  try {
    parsed = toml::parse("v = " + value);
  } catch (const toml::parse_error&) {
    parsed = toml::table{{"v", value}};
  }
  if (parsed.size() != 1) parsed = toml::table{{"v", value}};

  std::vector<std::string> parts;
  std::stringstream ss(key);
  for (std::string part; std::getline(ss, part, '.');) {
    if (part.empty()) throw ValidationError("override key '" + key + "' is malformed");
    parts.push_back(part);
  }
  toml::table* cur = &root;
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    if (!cur->get(parts[i])) cur->insert(parts[i], toml::table{});
    cur = cur->get(parts[i])->as_table();
    if (!cur) throw ValidationError("override key '" + key + "': '" + parts[i] + "' is not a table");
  }
  parsed.get("v")->visit([&](auto&& node) { cur->insert_or_assign(parts.back(), std::move(node)); });
}

PipelineConfig from_table(const toml::table& root, const fs::path& base) {
  PipelineConfig cfg;
  for (const auto& [k, v] : root) {
    static const std::set<std::string, std::less<>> known = {
        "dataset", "metapaths", "diffusion", "summarizer", "classifier", "run"};
    if (!known.count(k.str())) throw ValidationError("unknown config section '" + std::string(k.str()) + "'");
  }

  Section dataset(subtable(root, "dataset"), "dataset");
  dataset.path("nodes", cfg.dataset.nodes, base);
  dataset.path("edges", cfg.dataset.edges, base);
  dataset.path("splits", cfg.dataset.splits, base);
  dataset.path("bundle", cfg.dataset.bundle, base);
  dataset.boolean("reject_self_loops", cfg.dataset.reject_self_loops);
  dataset.finish();

  if (const auto* n = root.get("metapaths")) {
    const auto* arr = n->as_array();
    if (!arr) throw ValidationError("'metapaths' must be an array of tables");
    for (const auto& item : *arr) {
      if (!item.is_table()) throw ValidationError("'metapaths' must be an array of tables");
      Section s(item.as_table(), "metapaths");
      std::string name;
      std::vector<std::string> relations;
      s.string("name", name);
      s.strings("relations", relations);
      s.finish();
      if (relations.empty()) throw ValidationError("every metapath needs a non-empty 'relations' list");
      cfg.metapaths.push_back(Metapath::of(std::move(relations), std::move(name)));
    }
  }

  Section diffusion(subtable(root, "diffusion"), "diffusion");
  diffusion.integer("K", cfg.diffusion.hops);
  diffusion.integer("M", cfg.diffusion.max_neighbors);
  diffusion.integer("dense_threshold", cfg.diffusion.dense_threshold);
  diffusion.finish();

  Section summ(subtable(root, "summarizer"), "summarizer");
  read_backend(summ, cfg.summarizer);
  summ.string("instruction", cfg.summarizer.instruction);
  summ.integer("B_node", cfg.summarizer.budget_node);
  summ.integer("B_meta", cfg.summarizer.budget_meta);
  summ.finish();

  Section cls(subtable(root, "classifier"), "classifier");
  read_backend(cls, cfg.classifier);
  cls.string("marker", cfg.classifier.marker);
  cls.finish();

  Section run(subtable(root, "run"), "run");
  run.path("cache_dir", cfg.run.cache_dir, base);
  run.path("runs_dir", cfg.run.runs_dir, base);
  run.integer("parallelism", cfg.run.parallelism);
  run.integer("seed", cfg.run.seed);
  run.integer("target_token_cap", cfg.run.target_token_cap);
  run.real("f1_threshold", cfg.run.f1_threshold);
  run.string("split", cfg.run.split);
  run.string("tokenizer", cfg.run.tokenizer);
  run.boolean("include_neighbors", cfg.run.include_neighbors);
  run.strings("feature_names", cfg.run.feature_names);
  run.finish();

  if (cfg.run.cache_dir.is_relative()) cfg.run.cache_dir = (base / cfg.run.cache_dir).lexically_normal();
  if (cfg.run.runs_dir.is_relative()) cfg.run.runs_dir = (base / cfg.run.runs_dir).lexically_normal();
  cfg.validate();
  return cfg;
}

void validate_backend(const BackendConfig& b, const std::string& section,
                      std::initializer_list<std::string_view> kinds) {
  if (std::find(kinds.begin(), kinds.end(), b.kind) == kinds.end()) {
    std::string list;
    for (auto k : kinds) list += (list.empty() ? "" : ", ") + std::string(k);
    throw ValidationError(section + ".kind '" + b.kind + "' is not one of " + list);
  }
  if (b.kind == "http" && b.endpoint.empty()) {
    throw ValidationError(section + ".endpoint is required for kind 'http'");
  }
  if (!(b.timeout_s > 0) || !std::isfinite(b.timeout_s)) {
    throw ValidationError(section + ".timeout_s must be positive");
  }
  if (b.max_retries < 0) throw ValidationError(section + ".max_retries must be >= 0");
  if (b.backoff_ms < 0) throw ValidationError(section + ".backoff_ms must be >= 0");
}

}  // namespace

HttpBackendOptions BackendConfig::http_options() const {
  HttpBackendOptions o;
  o.endpoint = endpoint;
  o.timeout = std::chrono::milliseconds(static_cast<std::int64_t>(std::llround(timeout_s * 1000)));
  o.retry.max_retries = max_retries;
  o.retry.initial_backoff = std::chrono::milliseconds(backoff_ms);
  o.identity = identity;
  return o;
}

void PipelineConfig::validate() const {
  diffusion.validate();

  std::set<std::string> names;
  for (const auto& p : metapaths) {
    if (p.relations.empty()) throw ValidationError("metapath '" + p.name + "' has no relations");
    validate_section_title(p.name);
    if (!names.insert(p.name).second) {
      throw ValidationError("duplicate metapath name '" + p.name + "'");
    }
  }

  validate_backend(summarizer, "summarizer", {"extractive", "http"});
  if (summarizer.budget_node < 1) throw ValidationError("summarizer.B_node must be >= 1");
  if (summarizer.budget_meta < 1) throw ValidationError("summarizer.B_meta must be >= 1");
  if (summarizer.instruction.empty()) throw ValidationError("summarizer.instruction must be non-empty");

  validate_backend(classifier, "classifier", {"mock-hash", "keyword-oracle", "http"});
  if (classifier.kind == "keyword-oracle" && token_count(classifier.marker) != 1) {
    throw ValidationError("classifier.marker must be a single token for kind 'keyword-oracle'");
  }

  if (run.parallelism < 1) throw ValidationError("run.parallelism must be >= 1");
  if (run.target_token_cap < 1) throw ValidationError("run.target_token_cap must be >= 1");
  if (!(run.f1_threshold >= 0.0 && run.f1_threshold <= 1.0)) {
    throw ValidationError("run.f1_threshold must lie in [0, 1]");
  }
  if (std::find(std::begin(kSplitNames), std::end(kSplitNames), run.split) == std::end(kSplitNames)) {
    throw ValidationError("run.split '" + run.split + "' must be train, val or test");
  }
  if (run.tokenizer != "whitespace") {
    throw ValidationError("run.tokenizer '" + run.tokenizer + "' is not supported (only 'whitespace')");
  }
  if (run.seed > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
    throw ValidationError("run.seed is out of range");
  }
  for (const auto& f : run.feature_names) {
    if (token_count(f) != 1 || f.find_first_of("=,") != std::string::npos) {
      throw ValidationError("feature name '" + f + "' must be a single token without '=' or ','");
    }
  }
}

PipelineConfig parse_config(std::string_view toml_text, const fs::path& base_dir,
                            const std::vector<std::string>& overrides,
                            const std::string& source_name) {
  toml::table root;
  try {
    root = toml::parse(toml_text, source_name);
  } catch (const toml::parse_error& e) {
    const auto& where = e.source().begin;
    throw ValidationError(source_name + ":" + std::to_string(where.line) + ":" +
                          std::to_string(where.column) + ": " + std::string(e.description()));
  }
  for (const auto& o : overrides) apply_override(root, o);
  return from_table(root, base_dir);
}

PipelineConfig load_config(const fs::path& path, const std::vector<std::string>& overrides) {
  const std::string text = read_file(path);
  const fs::path base = fs::absolute(path).parent_path();
  return parse_config(text, base, overrides, path.string());
}

std::string to_toml(const PipelineConfig& cfg) {
  auto i64 = [](auto v) { return static_cast<std::int64_t>(v); };
  auto str_array = [](const std::vector<std::string>& v) {
    toml::array a;
    for (const auto& s : v) a.push_back(s);
    return a;
  };
  auto backend = [&](const BackendConfig& b) {
    return toml::table{{"kind", b.kind},
                       {"endpoint", b.endpoint},
                       {"identity", b.identity},
                       {"timeout_s", b.timeout_s},
                       {"max_retries", i64(b.max_retries)},
                       {"backoff_ms", i64(b.backoff_ms)}};
  };

  toml::table root;
  root.insert("dataset", toml::table{{"nodes", cfg.dataset.nodes.string()},
                                     {"edges", cfg.dataset.edges.string()},
                                     {"splits", cfg.dataset.splits.string()},
                                     {"bundle", cfg.dataset.bundle.string()},
                                     {"reject_self_loops", cfg.dataset.reject_self_loops}});
  toml::array metapaths;
  for (const auto& p : cfg.metapaths) {
    metapaths.push_back(toml::table{{"name", p.name}, {"relations", str_array(p.relations)}});
  }
  root.insert("metapaths", std::move(metapaths));
  root.insert("diffusion", toml::table{{"K", i64(cfg.diffusion.hops)},
                                       {"M", i64(cfg.diffusion.max_neighbors)},
                                       {"dense_threshold", i64(cfg.diffusion.dense_threshold)}});
  auto summ = backend(cfg.summarizer);
  summ.insert("instruction", cfg.summarizer.instruction);
  summ.insert("B_node", i64(cfg.summarizer.budget_node));
  summ.insert("B_meta", i64(cfg.summarizer.budget_meta));
  root.insert("summarizer", std::move(summ));
  auto cls = backend(cfg.classifier);
  cls.insert("marker", cfg.classifier.marker);
  root.insert("classifier", std::move(cls));
  root.insert("run", toml::table{{"cache_dir", cfg.run.cache_dir.string()},
                                 {"runs_dir", cfg.run.runs_dir.string()},
                                 {"parallelism", i64(cfg.run.parallelism)},
                                 {"seed", i64(cfg.run.seed)},
                                 {"target_token_cap", i64(cfg.run.target_token_cap)},
                                 {"f1_threshold", cfg.run.f1_threshold},
                                 {"split", cfg.run.split},
                                 {"tokenizer", cfg.run.tokenizer},
                                 {"include_neighbors", cfg.run.include_neighbors},
                                 {"feature_names", str_array(cfg.run.feature_names)}});
  std::ostringstream out;
  out << root << "\n";
  return out.str();
}

}  // namespace dgp
