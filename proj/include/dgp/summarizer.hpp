#pragma once

// Budgeted two-level summarization.
//
// Node summaries condense each node's own text to at most B_node tokens.
// Metapath summaries condense the " | "-joined node summaries of a target's
// trimmed neighbors to at most B_meta tokens. Backends are pluggable; every
// backend output passes through enforce_budget, so the token cap holds no
// matter what the backend returns. Results are memoized in a
// content-addressed on-disk cache keyed by (backend identity, instruction,
// budget, input text).

#include <atomic>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "dgp/graph_store.hpp"
#include "dgp/http_client.hpp"
#include "dgp/io.hpp"
#include "dgp/metapath.hpp"

namespace dgp {

inline constexpr std::string_view kDefaultInstruction = "Summarize the text within {B} tokens";
inline constexpr std::string_view kNoTextMarker = "(no text)";
inline constexpr std::string_view kNoNeighborsMarker = "(no neighbors)";
inline constexpr std::string_view kNeighborSeparator = " | ";

struct SummaryRequest {
  std::string text;
  std::size_t budget = 0;
  std::string instruction;

  void validate() const;
};

struct Summary {
  std::string text;
  std::size_t measured_tokens = 0;
  std::size_t budget = 0;
  std::string source_hash;

  friend bool operator==(const Summary&, const Summary&) = default;
};

json to_json(const Summary& s);
Summary summary_from_json(const json& j);

// Substitutes every "{B}" in the template with the budget.
std::string render_instruction(std::string_view instruction_template, std::size_t budget);

std::string summary_cache_key(std::string_view backend_identity, std::string_view instruction,
                              std::size_t budget, std::string_view text);

class SummarizerBackend {
 public:
  virtual ~SummarizerBackend() = default;
  // Part of every cache key: two backends that can produce different output
  // for the same request must report different identities.
  virtual std::string identity() const = 0;
  virtual std::string summarize(const SummaryRequest& request) = 0;
};

// Keeps the first `budget` whitespace tokens. Deterministic and offline.
class ExtractiveSummarizer final : public SummarizerBackend {
 public:
  std::string identity() const override { return "extractive-v1"; }
  std::string summarize(const SummaryRequest& request) override;
};

struct HttpBackendOptions {
  std::string endpoint;
  std::chrono::milliseconds timeout{30'000};
  RetryPolicy retry;
  std::string identity;  // defaults to "http:" + endpoint
};

// POST {endpoint}/summarize {"text", "budget_tokens", "instruction"} -> {"summary"}
class HttpSummarizer final : public SummarizerBackend {
 public:
  explicit HttpSummarizer(HttpBackendOptions options);

  std::string identity() const override { return identity_; }
  std::string summarize(const SummaryRequest& request) override;

 private:
  HttpJsonClient client_;
  std::string identity_;
};

// One JSON file per entry named by the hex key. Entries whose stored hash or
// token count does not check out are deleted and reported as misses.
class SummaryCache {
 public:
  explicit SummaryCache(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }
  std::optional<Summary> get(const std::string& key) const;
  void put(const std::string& key, const Summary& summary) const;
  std::size_t discarded() const { return discarded_.load(); }

 private:
  std::filesystem::path dir_;
  mutable std::atomic<std::size_t> discarded_{0};
};

// Backend + cache + instruction template. summarize() is thread-safe if the
// backend is.
class Summarizer {
 public:
  explicit Summarizer(std::shared_ptr<SummarizerBackend> backend,
                      std::string instruction_template = std::string(kDefaultInstruction),
                      std::shared_ptr<const SummaryCache> cache = nullptr);

  Summary summarize(std::string_view text, std::size_t budget);

  const SummarizerBackend& backend() const { return *backend_; }
  const std::string& instruction_template() const { return instruction_template_; }
  std::size_t backend_calls() const { return backend_calls_.load(); }
  std::size_t cache_hits() const { return cache_hits_.load(); }

 private:
  std::shared_ptr<SummarizerBackend> backend_;
  std::string instruction_template_;
  std::shared_ptr<const SummaryCache> cache_;
  std::atomic<std::size_t> backend_calls_{0};
  std::atomic<std::size_t> cache_hits_{0};
};

// Summary for a fixed marker string; never touches a backend.
Summary marker_summary(std::string_view marker, std::size_t budget);

// Empty (or all-whitespace) text yields the "(no text)" marker.
Summary summarize_node(const NodeRecord& node, std::size_t budget, Summarizer& summarizer);

// Joins neighbor summaries in trimmed order with " | ".
std::string join_neighbor_summaries(const TrimmedNeighborhood& trimmed,
                                    const std::map<NodeId, Summary>& node_summaries);

// An empty trimmed neighborhood yields "(no neighbors)" without a backend call.
// A neighbor without a node summary is a logic_error.
Summary summarize_metapath(NodeId target, const Metapath& p, const TrimmedNeighborhood& trimmed,
                           const std::map<NodeId, Summary>& node_summaries, std::size_t budget,
                           Summarizer& summarizer);

}  // namespace dgp
