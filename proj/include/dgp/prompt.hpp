#pragma once

// Dual-granularity prompt assembly.
//
// Serialized layout, one line per section, '\n' separated:
//
//   Target node:
//   <target text, capped at target_token_cap tokens>
//   [<metapath name>] summary: <metapath summary>
//   stats: <rendered numeric stats>
//   ... one summary/stats pair per metapath, in configured order ...
//   Is this node fraudulent? Answer Yes or No.
//
// Line breaks inside bodies are replaced by spaces, which leaves whitespace
// token counts unchanged and keeps the layout parseable.

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dgp/graph_store.hpp"
#include "dgp/numeric_agg.hpp"
#include "dgp/summarizer.hpp"

namespace dgp {

enum class SectionKind { kTargetText, kMetapathSummary, kMetapathStats, kQuestion };

std::string_view to_string(SectionKind kind);

struct PromptSection {
  SectionKind kind;
  std::string title;
  std::string body;

  friend bool operator==(const PromptSection&, const PromptSection&) = default;
};

struct PromptDoc {
  NodeId target = 0;
  std::vector<PromptSection> sections;
  std::size_t token_count = 0;

  friend bool operator==(const PromptDoc&, const PromptDoc&) = default;
};

struct PromptTemplate {
  std::string header = "Target node:";
  std::string question = "Is this node fraudulent? Answer Yes or No.";
  std::size_t target_token_cap = 2048;
  std::vector<std::string> feature_names;
  // false drops every metapath section (target text + question only).
  bool include_neighbors = true;

  void validate() const;
};

struct MetapathBlock {
  std::string name;
  Summary summary;
  MetapathStats stats;
};

PromptDoc build_prompt(NodeId v, std::string_view target_text,
                       std::span<const MetapathBlock> per_metapath, const PromptTemplate& tmpl);

// Structural checks: target first, question last, summary/stats pairs with
// matching titles in between, no line breaks in bodies or titles.
void validate(const PromptDoc& doc);

std::string serialize_prompt(const PromptDoc& doc);

PromptDoc parse_prompt(std::string_view text, NodeId target);

// Tokens contributed by the template itself for a prompt with
// `num_metapaths` metapath blocks: header + question + 3 per metapath
// ("[name]", "summary:", "stats:").
std::size_t template_overhead(const PromptTemplate& tmpl, std::size_t num_metapaths);

// Metapath display names are used as section titles and must be one token
// without ']'.
void validate_section_title(std::string_view name);

}  // namespace dgp
