#pragma once

// Closed-form prompt-size and attention-dilution model.
//
// With L tokens per node text, out-degree D, R relation types, budget B,
// K hops and M neighbors kept per metapath:
//
//   full-neighbor prompt      L * (D^{K+1} - 1) / (D - 1)
//   fully vectorized prompt   L + (D^{K+1} - D) / (D - 1)
//   DGP summarization input   L + (R^{K+1} - R) / (R - 1) * M * B
//   DGP final prompt          L + (R^{K+1} - R) / (R - 1) * B
//
// The geometric factors are evaluated exactly in 64-bit integers (overflow
// throws std::overflow_error). D = 1 or R = 1 use the direct sums
// (K+1 resp. K terms) since the closed forms divide by zero there.
//
// Runtime big-O for reference, N nodes, E epochs, S = (R^{K+1}-R)/(R-1):
//   node summaries O((L+B)^2 N), metapath summaries O((S M B)^2 N),
//   finetuning O((L + S B)^2 E N), cached inference O((L + S B)^2 N).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dgp {

struct CostParams {
  std::uint64_t L = 170;  // tokens per node text
  std::uint64_t D = 133;  // average out-degree
  std::uint64_t R = 3;    // relation types
  std::uint64_t B = 10;   // summary budget
  std::uint64_t K = 2;    // hops
  std::uint64_t M = 4;    // neighbors per metapath
  std::uint64_t m = 10;   // tokens per neighbor in the dilution model
  double p = 0.1;         // global fraud ratio
};

// sum_{k=0..K} base^k
std::uint64_t geometric_sum(std::uint64_t base, std::uint64_t k);
// sum_{k=1..K} base^k, i.e. (base^{K+1} - base) / (base - 1)
std::uint64_t geometric_sum_from_one(std::uint64_t base, std::uint64_t k);

std::uint64_t full_neighbor_tokens(std::uint64_t L, std::uint64_t D, std::uint64_t K);
std::uint64_t vectorized_tokens(std::uint64_t L, std::uint64_t D, std::uint64_t K);
std::uint64_t dgp_summarization_tokens(std::uint64_t L, std::uint64_t R, std::uint64_t K,
                                       std::uint64_t M, std::uint64_t B);
std::uint64_t dgp_final_tokens(std::uint64_t L, std::uint64_t R, std::uint64_t K,
                               std::uint64_t B);

// K-hop neighborhood size (D^{K+1} - D) / (D - 1).
inline std::uint64_t k_hop_size(std::uint64_t D, std::uint64_t K) {
  return geometric_sum_from_one(D, K);
}

struct FraudTokenRatio {
  double ratio = 0.0;                 // (L + p m n_K) / (L + m n_K)
  std::optional<double> upper_bound;  // p + L (1 - p) / (m n_K), when m n_K > 0
};

// The target node is assumed fraudulent, so its L tokens count as
// fraud-related alongside a fraction p of the neighbor tokens.
FraudTokenRatio fraud_token_ratio(double L, double m, double n_k, double p);

struct AttentionMass {
  double mass = 0.0;                  // softmax mass on fraud-related tokens
  std::uint64_t total_tokens = 0;     // L + m n_K
  std::uint64_t fraud_tokens = 0;     // L + round(p m n_K)
  double exact_fraud_tokens = 0.0;    // L + p m n_K before rounding
  bool rounded = false;
};

// Builds a length-(L + m n_K) attention row with identical logits (`logit`),
// applies softmax and sums the weights of the fraud-related positions. With
// uniform logits this is a token count ratio and equals fraud_token_ratio
// whenever p m n_K is integral.
AttentionMass verify_attention_mass(std::uint64_t L, std::uint64_t m, std::uint64_t n_k, double p,
                                    double logit = 0.0);

// One row per value of the swept parameter.
struct CostRow {
  std::string parameter;
  double value = 0.0;
  std::uint64_t full_neighbor = 0;
  std::uint64_t vectorized = 0;
  std::uint64_t dgp_summarization = 0;
  std::uint64_t dgp_final = 0;
  std::uint64_t n_k = 0;
  double fraud_ratio_full = 0.0;  // dilution with every K-hop neighbor in the prompt

  friend bool operator==(const CostRow&, const CostRow&) = default;
};

struct CostTable {
  std::vector<CostRow> rows;

  friend bool operator==(const CostTable&, const CostTable&) = default;
};

inline const std::vector<std::string>& sweepable_parameters() {
  static const std::vector<std::string> names = {"L", "D", "R", "B", "K", "M", "m", "p"};
  return names;
}

// Sweeps `parameter` over `values` with the remaining fields fixed.
// Unknown parameter names raise ValidationError.
CostTable sweep_cost(const CostParams& base, const std::string& parameter,
                     const std::vector<double>& values);

std::string to_csv(const CostTable& table);
CostTable cost_table_from_csv(const std::string& csv);
std::string to_text(const CostTable& table);

}  // namespace dgp
