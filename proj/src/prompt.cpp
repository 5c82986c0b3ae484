#include "dgp/prompt.hpp"

#include <algorithm>

#include "dgp/error.hpp"
#include "dgp/tokenizer.hpp"

namespace dgp {
namespace {

constexpr std::string_view kSummaryTag = " summary: ";
constexpr std::string_view kStatsTag = "stats: ";

std::string single_line(std::string_view text) {
  std::string out(text);
  std::replace(out.begin(), out.end(), '\n', ' ');
  std::replace(out.begin(), out.end(), '\r', ' ');
  return out;
}

bool has_line_break(std::string_view s) {
  return s.find_first_of("\r\n") != std::string_view::npos;
}

}  // namespace

std::string_view to_string(SectionKind kind) {
  switch (kind) {
    case SectionKind::kTargetText:
      return "target_text";
    case SectionKind::kMetapathSummary:
      return "metapath_summary";
    case SectionKind::kMetapathStats:
      return "metapath_stats";
    case SectionKind::kQuestion:
      return "question";
  }
  return "unknown";
}

void PromptTemplate::validate() const {
  if (header.empty() || has_line_break(header)) {
    throw ValidationError("prompt header must be a non-empty single line");
  }
  if (question.empty() || has_line_break(question)) {
    throw ValidationError("prompt question must be a non-empty single line");
  }
  if (target_token_cap < 1) throw ValidationError("target token cap must be >= 1");
}

void validate_section_title(std::string_view name) {
  if (name.empty() || token_count(name) != 1 || name.find(']') != std::string_view::npos ||
      name.find('[') != std::string_view::npos) {
    throw ValidationError("metapath name '" + std::string(name) +
                          "' must be a single token without brackets");
  }
}

PromptDoc build_prompt(NodeId v, std::string_view target_text,
                       std::span<const MetapathBlock> per_metapath, const PromptTemplate& tmpl) {
  tmpl.validate();
  PromptDoc doc;
  doc.target = v;
  doc.sections.push_back({SectionKind::kTargetText, tmpl.header,
                          single_line(enforce_budget(target_text, tmpl.target_token_cap))});
  if (tmpl.include_neighbors) {
    for (const auto& block : per_metapath) {
      validate_section_title(block.name);
      if (block.stats.target != v || block.stats.metapath.name != block.name) {
        throw ValidationError("prompt for node " + std::to_string(v) + ": stats block for '" +
                              block.stats.metapath.name + "' does not match '" + block.name + "'");
      }
      const auto names = tmpl.feature_names.empty()
                             ? default_feature_names(block.stats.mean.size())
                             : tmpl.feature_names;
      doc.sections.push_back(
          {SectionKind::kMetapathSummary, block.name, single_line(block.summary.text)});
      doc.sections.push_back(
          {SectionKind::kMetapathStats, block.name, render_stats(block.stats, names)});
    }
  }
  doc.sections.push_back({SectionKind::kQuestion, "", tmpl.question});
  doc.token_count = token_count(serialize_prompt(doc));
  return doc;
}

void validate(const PromptDoc& doc) {
  const auto& s = doc.sections;
  auto fail = [&](const std::string& why) {
    throw ValidationError("invalid prompt for node " + std::to_string(doc.target) + ": " + why);
  };
  if (s.size() < 2) fail("needs at least a target_text and a question section");
  if (s.front().kind != SectionKind::kTargetText) fail("first section must be target_text");
  if (s.back().kind != SectionKind::kQuestion) fail("last section must be question");
  if ((s.size() - 2) % 2 != 0) fail("metapath sections must come in summary/stats pairs");
  for (std::size_t i = 1; i + 1 < s.size(); i += 2) {
    if (s[i].kind != SectionKind::kMetapathSummary || s[i + 1].kind != SectionKind::kMetapathStats) {
      fail("section " + std::to_string(i) + " must be a metapath summary followed by its stats");
    }
    if (s[i].title != s[i + 1].title) {
      fail("summary '" + s[i].title + "' is followed by stats for '" + s[i + 1].title + "'");
    }
  }
  for (const auto& sec : s) {
    if (has_line_break(sec.body) || has_line_break(sec.title)) {
      fail("section bodies and titles must be single lines");
    }
  }
}

std::string serialize_prompt(const PromptDoc& doc) {
  validate(doc);
  std::string out;
  for (const auto& sec : doc.sections) {
    if (!out.empty()) out += '\n';
    switch (sec.kind) {
      case SectionKind::kTargetText:
        out += sec.title;
        out += '\n';
        out += sec.body;
        break;
      case SectionKind::kMetapathSummary:
        out += '[';
        out += sec.title;
        out += ']';
        out += kSummaryTag;
        out += sec.body;
        break;
      case SectionKind::kMetapathStats:
        out += kStatsTag;
        out += sec.body;
        break;
      case SectionKind::kQuestion:
        out += sec.body;
        break;
    }
  }
  return out;
}

PromptDoc parse_prompt(std::string_view text, NodeId target) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  for (;;) {
    const auto nl = text.find('\n', pos);
    lines.push_back(text.substr(pos, nl - pos));
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  auto fail = [&](const std::string& why) {
    throw ValidationError("cannot parse prompt for node " + std::to_string(target) + ": " + why);
  };
  if (lines.size() < 3 || (lines.size() - 3) % 2 != 0) fail("unexpected number of lines");
  PromptDoc doc;
  doc.target = target;
  doc.sections.push_back({SectionKind::kTargetText, std::string(lines[0]), std::string(lines[1])});
  for (std::size_t i = 2; i + 1 < lines.size(); i += 2) {
    const auto summary = lines[i];
    const auto close = summary.find(']');
    if (summary.empty() || summary.front() != '[' || close == std::string_view::npos ||
        summary.substr(close + 1, kSummaryTag.size()) != kSummaryTag) {
      fail("line " + std::to_string(i + 1) + " is not a metapath summary");
    }
    const auto stats = lines[i + 1];
    if (stats.substr(0, kStatsTag.size()) != kStatsTag) {
      fail("line " + std::to_string(i + 2) + " is not a stats line");
    }
    const std::string title(summary.substr(1, close - 1));
    doc.sections.push_back({SectionKind::kMetapathSummary, title,
                            std::string(summary.substr(close + 1 + kSummaryTag.size()))});
    doc.sections.push_back(
        {SectionKind::kMetapathStats, title, std::string(stats.substr(kStatsTag.size()))});
  }
  doc.sections.push_back({SectionKind::kQuestion, "", std::string(lines.back())});
  doc.token_count = token_count(text);
  return doc;
}

std::size_t template_overhead(const PromptTemplate& tmpl, std::size_t num_metapaths) {
  return token_count(tmpl.header) + token_count(tmpl.question) + 3 * num_metapaths;
}

}  // namespace dgp
