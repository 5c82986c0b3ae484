#include "dgp/cost_model.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "dgp/error.hpp"

namespace dgp {
namespace {

std::uint64_t mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out;
  if (__builtin_mul_overflow(a, b, &out)) throw std::overflow_error("cost model: token count overflow");
  return out;
}

std::uint64_t add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out;
  if (__builtin_add_overflow(a, b, &out)) throw std::overflow_error("cost model: token count overflow");
  return out;
}

std::uint64_t ipow(std::uint64_t base, std::uint64_t exp) {
  std::uint64_t out = 1;
  for (std::uint64_t i = 0; i < exp; ++i) out = mul(out, base);
  return out;
}

// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

constexpr std::uint64_t kMaxAttentionTokens = std::uint64_t{1} << 27;

}  // namespace

std::uint64_t geometric_sum(std::uint64_t base, std::uint64_t k) {
  if (base == 0) return 1;
  if (base == 1) return add(k, 1);
  return (ipow(base, add(k, 1)) - 1) / (base - 1);
}

std::uint64_t geometric_sum_from_one(std::uint64_t base, std::uint64_t k) {
  if (base == 0) return 0;
  if (base == 1) return k;
  return (ipow(base, add(k, 1)) - base) / (base - 1);
}

std::uint64_t full_neighbor_tokens(std::uint64_t L, std::uint64_t D, std::uint64_t K) {
  return mul(geometric_sum(D, K), L);
}

std::uint64_t vectorized_tokens(std::uint64_t L, std::uint64_t D, std::uint64_t K) {
  return add(L, geometric_sum_from_one(D, K));
}

std::uint64_t dgp_summarization_tokens(std::uint64_t L, std::uint64_t R, std::uint64_t K,
                                       std::uint64_t M, std::uint64_t B) {
  return add(L, mul(mul(geometric_sum_from_one(R, K), M), B));
}

std::uint64_t dgp_final_tokens(std::uint64_t L, std::uint64_t R, std::uint64_t K,
                               std::uint64_t B) {
  return add(L, mul(geometric_sum_from_one(R, K), B));
}

FraudTokenRatio fraud_token_ratio(double L, double m, double n_k, double p) {
  if (L < 0 || m < 0 || n_k < 0) {
    throw ValidationError("fraud_token_ratio: L, m and n_K must be non-negative");
  }
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("fraud_token_ratio: p must lie in [0, 1]");
  const double neighbor_tokens = m * n_k;
  if (L + neighbor_tokens <= 0) throw ValidationError("fraud_token_ratio: empty prompt");
  FraudTokenRatio out;
  out.ratio = (L + p * neighbor_tokens) / (L + neighbor_tokens);
  if (neighbor_tokens > 0) out.upper_bound = p + L * (1.0 - p) / neighbor_tokens;
  return out;
}

AttentionMass verify_attention_mass(std::uint64_t L, std::uint64_t m, std::uint64_t n_k, double p,
                                    double logit) {
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("verify_attention_mass: p must lie in [0, 1]");
  if (!std::isfinite(logit)) throw ValidationError("verify_attention_mass: logit must be finite");
  AttentionMass out;
  const std::uint64_t neighbor_tokens = mul(m, n_k);
  out.total_tokens = add(L, neighbor_tokens);
  if (out.total_tokens == 0) throw ValidationError("verify_attention_mass: empty prompt");
  if (out.total_tokens > kMaxAttentionTokens) {
    throw ValidationError("verify_attention_mass: sequence of " +
                          std::to_string(out.total_tokens) + " tokens is too long to materialize");
  }
  const double fraud_neighbors = p * static_cast<double>(neighbor_tokens);
  const auto rounded = static_cast<std::uint64_t>(std::llround(fraud_neighbors));
  out.exact_fraud_tokens = static_cast<double>(L) + fraud_neighbors;
  out.fraud_tokens = L + rounded;
  // p is usually a decimal such as j / (m n_K), so the product can miss the
  // integer by an ulp.
  out.rounded = std::abs(static_cast<double>(rounded) - fraud_neighbors) >
                1e-9 * std::max(1.0, fraud_neighbors);

  // Softmax over identical scores, computed literally.
  const std::vector<double> scores(out.total_tokens, logit);
  double max_score = scores.front();
  for (double s : scores) max_score = std::max(max_score, s);
  std::vector<double> weights(scores.size());
  CompensatedSum denom;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    weights[i] = std::exp(scores[i] - max_score);
    denom.add(weights[i]);
  }
  const double z = denom.value();
  // Fraud-related positions: the L target tokens, then the fraudulent
  // neighbors' tokens.
  CompensatedSum mass;
  for (std::uint64_t i = 0; i < out.fraud_tokens; ++i) mass.add(weights[i] / z);
  out.mass = mass.value();
  return out;
}

CostTable sweep_cost(const CostParams& base, const std::string& parameter,
                     const std::vector<double>& values) {
  CostTable table;
  for (double v : values) {
    CostParams c = base;
    auto as_count = [&](std::uint64_t& field) {
      if (v < 0 || v != std::floor(v)) {
        throw ValidationError("sweep value " + std::to_string(v) + " for '" + parameter +
                              "' must be a non-negative integer");
      }
      field = static_cast<std::uint64_t>(v);
    };
    if (parameter == "L") as_count(c.L);
    else if (parameter == "D") as_count(c.D);
    else if (parameter == "R") as_count(c.R);
    else if (parameter == "B") as_count(c.B);
    else if (parameter == "K") as_count(c.K);
    else if (parameter == "M") as_count(c.M);
    else if (parameter == "m") as_count(c.m);
    else if (parameter == "p") c.p = v;
    else throw ValidationError("unknown sweep parameter '" + parameter + "' (expected one of L, D, R, B, K, M, m, p)");

    CostRow row;
    row.parameter = parameter;
    row.value = v;
    row.full_neighbor = full_neighbor_tokens(c.L, c.D, c.K);
    row.vectorized = vectorized_tokens(c.L, c.D, c.K);
    row.dgp_summarization = dgp_summarization_tokens(c.L, c.R, c.K, c.M, c.B);
    row.dgp_final = dgp_final_tokens(c.L, c.R, c.K, c.B);
    row.n_k = k_hop_size(c.D, c.K);
    row.fraud_ratio_full = fraud_token_ratio(static_cast<double>(c.L), static_cast<double>(c.m),
                                             static_cast<double>(row.n_k), c.p)
                               .ratio;
    table.rows.push_back(row);
  }
  return table;
}

namespace {

constexpr const char* kCsvHeader =
    "parameter,value,full_neighbor,vectorized,dgp_summarization,dgp_final,n_k,fraud_ratio_full";

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
T parse_number(const std::string& field, std::size_t line) {
  T value{};
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw ValidationError("cost CSV line " + std::to_string(line) + ": bad number '" + field + "'");
  }
  return value;
}

}  // namespace

std::string to_csv(const CostTable& table) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& r : table.rows) {
    out += r.parameter + "," + fmt_double(r.value) + "," + std::to_string(r.full_neighbor) + "," +
           std::to_string(r.vectorized) + "," + std::to_string(r.dgp_summarization) + "," +
           std::to_string(r.dgp_final) + "," + std::to_string(r.n_k) + "," +
           fmt_double(r.fraud_ratio_full) + "\n";
  }
  return out;
}

CostTable cost_table_from_csv(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw ValidationError("cost CSV: unexpected header");
  }
  CostTable table;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 8) throw ValidationError("cost CSV line " + std::to_string(line_no) + ": expected 8 fields");
    CostRow r;
    r.parameter = f[0];
    r.value = parse_number<double>(f[1], line_no);
    r.full_neighbor = parse_number<std::uint64_t>(f[2], line_no);
    r.vectorized = parse_number<std::uint64_t>(f[3], line_no);
    r.dgp_summarization = parse_number<std::uint64_t>(f[4], line_no);
    r.dgp_final = parse_number<std::uint64_t>(f[5], line_no);
    r.n_k = parse_number<std::uint64_t>(f[6], line_no);
    r.fraud_ratio_full = parse_number<double>(f[7], line_no);
    table.rows.push_back(r);
  }
  return table;
}

std::string to_text(const CostTable& table) {
  std::ostringstream out;
  out << std::left << std::setw(10) << "param" << std::right << std::setw(12) << "value"
      << std::setw(22) << "full_neighbor" << std::setw(22) << "vectorized" << std::setw(22)
      << "dgp_summarization" << std::setw(14) << "dgp_final" << std::setw(22) << "n_K"
      << std::setw(14) << "r_full" << "\n";
  for (const auto& r : table.rows) {
    out << std::left << std::setw(10) << r.parameter << std::right << std::setw(12) << r.value
        << std::setw(22) << r.full_neighbor << std::setw(22) << r.vectorized << std::setw(22)
        << r.dgp_summarization << std::setw(14) << r.dgp_final << std::setw(22) << r.n_k
        << std::setw(14) << std::setprecision(6) << r.fraud_ratio_full << "\n";
  }
  return out.str();
}

}  // namespace dgp
