#include "dgp/numeric_agg.hpp"

#include <array>
#include <charconv>
#include <stdexcept>

namespace dgp {
namespace {

std::string fixed4(double v) {
  std::array<char, 64> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                                       std::chars_format::fixed, 4);
  if (ec != std::errc()) throw std::runtime_error("render_stats: value too large to format");
  std::string s(buf.data(), end);
  if (s == "-0.0000") s = "0.0000";
  return s;
}

}  // namespace

MetapathStats aggregate_numeric(const HeteroGraph& g, const TrimmedNeighborhood& trimmed) {
  MetapathStats out;
  out.target = trimmed.target;
  out.metapath = trimmed.metapath;
  out.count = trimmed.neighbors.size();
  const auto& x = g.features();
  out.mean.assign(x.cols(), 0.0);
  if (out.count == 0) return out;
  for (const auto& nb : trimmed.neighbors) {
    if (nb.id >= x.rows()) {
      throw std::out_of_range("aggregate_numeric: neighbor " + std::to_string(nb.id) +
                              " not in graph");
    }
    const auto row = x.row(nb.id);
    for (std::size_t c = 0; c < row.size(); ++c) out.mean[c] += row[c];
  }
  for (double& v : out.mean) v /= static_cast<double>(out.count);
  return out;
}

std::string render_stats(const MetapathStats& stats, std::span<const std::string> feature_names) {
  if (feature_names.size() != stats.mean.size()) {
    throw std::invalid_argument("render_stats: " + std::to_string(feature_names.size()) +
                                " feature names for " + std::to_string(stats.mean.size()) +
                                " features");
  }
  std::string out = "n=" + std::to_string(stats.count);
  if (stats.count == 0) return out;
  for (std::size_t i = 0; i < stats.mean.size(); ++i) {
    out += ", ";
    out += feature_names[i];
    out += '=';
    out += fixed4(stats.mean[i]);
  }
  return out;
}

std::vector<std::string> default_feature_names(std::size_t width) {
  std::vector<std::string> names;
  names.reserve(width);
  for (std::size_t i = 0; i < width; ++i) names.push_back("f" + std::to_string(i));
  return names;
}

}  // namespace dgp
