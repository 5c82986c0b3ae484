#include "dgp/summarizer.hpp"

#include "dgp/error.hpp"
#include "dgp/hash.hpp"
#include "dgp/tokenizer.hpp"

namespace dgp {

void SummaryRequest::validate() const {
  if (budget < 1) throw ValidationError("summary budget must be >= 1");
  if (instruction.empty()) throw ValidationError("summary instruction must be non-empty");
}

json to_json(const Summary& s) {
  return {{"text", s.text},
          {"measured_tokens", s.measured_tokens},
          {"budget", s.budget},
          {"source_hash", s.source_hash}};
}

Summary summary_from_json(const json& j) {
  Summary s;
  s.text = j.at("text").get<std::string>();
  s.measured_tokens = j.at("measured_tokens").get<std::size_t>();
  s.budget = j.at("budget").get<std::size_t>();
  s.source_hash = j.at("source_hash").get<std::string>();
  return s;
}

std::string render_instruction(std::string_view instruction_template, std::size_t budget) {
  std::string out;
  const std::string b = std::to_string(budget);
  std::size_t pos = 0;
  for (;;) {
    const auto hit = instruction_template.find("{B}", pos);
    out.append(instruction_template.substr(pos, hit - pos));
    if (hit == std::string_view::npos) break;
    out += b;
    pos = hit + 3;
  }
  return out;
}

std::string summary_cache_key(std::string_view backend_identity, std::string_view instruction,
                              std::size_t budget, std::string_view text) {
  const json key = json::array({backend_identity, instruction, budget, text});
  return sha256_hex(key.dump());
}

std::string ExtractiveSummarizer::summarize(const SummaryRequest& request) {
  return enforce_budget(request.text, request.budget);
}

HttpSummarizer::HttpSummarizer(HttpBackendOptions options)
    : client_(options.endpoint, options.timeout, options.retry),
      identity_(options.identity.empty() ? "http:" + options.endpoint : options.identity) {}

std::string HttpSummarizer::summarize(const SummaryRequest& request) {
  const json body = {{"text", request.text},
                     {"budget_tokens", request.budget},
                     {"instruction", request.instruction}};
  const json res = client_.post("/summarize", body, [](const json& r) {
    if (!r.is_object() || !r.contains("summary") || !r["summary"].is_string()) {
      throw std::runtime_error("response lacks a string 'summary' field");
    }
  });
  return res["summary"].get<std::string>();
}

SummaryCache::SummaryCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::optional<Summary> SummaryCache::get(const std::string& key) const {
  const auto path = dir_ / key;
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) return std::nullopt;
  try {
    Summary s = summary_from_json(json::parse(read_file(path)));
    if (s.source_hash == key && s.measured_tokens == token_count(s.text) &&
        s.measured_tokens <= s.budget) {
      return s;
    }
  } catch (const std::exception&) {
    // fall through: unreadable entry
  }
  std::filesystem::remove(path, ec);
  ++discarded_;
  return std::nullopt;
}

void SummaryCache::put(const std::string& key, const Summary& summary) const {
  write_file_atomic(dir_ / key, to_json(summary).dump());
}

Summarizer::Summarizer(std::shared_ptr<SummarizerBackend> backend,
                       std::string instruction_template,
                       std::shared_ptr<const SummaryCache> cache)
    : backend_(std::move(backend)),
      instruction_template_(std::move(instruction_template)),
      cache_(std::move(cache)) {
  if (!backend_) throw std::invalid_argument("Summarizer: null backend");
}

Summary Summarizer::summarize(std::string_view text, std::size_t budget) {
  SummaryRequest request{std::string(text), budget,
                         render_instruction(instruction_template_, budget)};
  request.validate();
  const std::string key =
      summary_cache_key(backend_->identity(), request.instruction, budget, text);
  if (cache_) {
    if (auto hit = cache_->get(key)) {
      ++cache_hits_;
      return *hit;
    }
  }
  ++backend_calls_;
  std::string raw = backend_->summarize(request);
  Summary s;
  s.text = enforce_budget(raw, budget);
  s.measured_tokens = token_count(s.text);
  s.budget = budget;
  s.source_hash = key;
  if (cache_) cache_->put(key, s);
  return s;
}

Summary marker_summary(std::string_view marker, std::size_t budget) {
  if (budget < 1) throw ValidationError("summary budget must be >= 1");
  Summary s;
  s.text = enforce_budget(marker, budget);
  s.measured_tokens = token_count(s.text);
  s.budget = budget;
  s.source_hash = summary_cache_key("builtin", "", budget, marker);
  return s;
}

Summary summarize_node(const NodeRecord& node, std::size_t budget, Summarizer& summarizer) {
  if (token_count(node.text) == 0) return marker_summary(kNoTextMarker, budget);
  try {
    return summarizer.summarize(node.text, budget);
  } catch (const BackendError& e) {
    throw BackendError("node '" + node.original_id + "' (id " + std::to_string(node.id) +
                       "): " + e.what());
  }
}

std::string join_neighbor_summaries(const TrimmedNeighborhood& trimmed,
                                    const std::map<NodeId, Summary>& node_summaries) {
  std::string joined;
  for (std::size_t i = 0; i < trimmed.neighbors.size(); ++i) {
    const NodeId u = trimmed.neighbors[i].id;
    const auto it = node_summaries.find(u);
    if (it == node_summaries.end()) {
      throw std::logic_error("metapath summary for node " + std::to_string(trimmed.target) +
                             " on '" + trimmed.metapath.name + "': neighbor " +
                             std::to_string(u) + " has no node summary");
    }
    if (i) joined += kNeighborSeparator;
    joined += it->second.text;
  }
  return joined;
}

Summary summarize_metapath(NodeId target, const Metapath& p, const TrimmedNeighborhood& trimmed,
                           const std::map<NodeId, Summary>& node_summaries, std::size_t budget,
                           Summarizer& summarizer) {
  if (trimmed.target != target || trimmed.metapath.name != p.name) {
    throw std::invalid_argument("summarize_metapath: trimmed neighborhood is for node " +
                                std::to_string(trimmed.target) + " / '" +
                                trimmed.metapath.name + "'");
  }
  if (trimmed.neighbors.empty()) return marker_summary(kNoNeighborsMarker, budget);
  const std::string joined = join_neighbor_summaries(trimmed, node_summaries);
  try {
    return summarizer.summarize(joined, budget);
  } catch (const BackendError& e) {
    throw BackendError("metapath '" + p.name + "' of node " + std::to_string(target) + ": " +
                       e.what());
  }
}

}  // namespace dgp
