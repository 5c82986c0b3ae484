#pragma once

// Fraud scoring from Yes/No logits, and the evaluation metrics.
//
// Metric conventions (fixed so results are reproducible):
//   AUROC   P(score_pos > score_neg) over all pos/neg pairs, ties count 1/2.
//   AUPRC   average precision: predictions ordered by descending score, then
//           ascending node id; mean over positives of precision at their rank.
//   F1      predicted fraud iff p_fraud >= threshold; a class with no true
//           and no predicted members has F1 = 0. Macro-F1 averages the two.

#include <chrono>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dgp/graph_store.hpp"
#include "dgp/http_client.hpp"
#include "dgp/io.hpp"
#include "dgp/summarizer.hpp"

namespace dgp {

struct LogitPair {
  double logit_yes = 0.0;
  double logit_no = 0.0;

  friend bool operator==(const LogitPair&, const LogitPair&) = default;
};

struct Prediction {
  NodeId node = 0;
  double p_fraud = 0.0;
  std::optional<int> label;

  friend bool operator==(const Prediction&, const Prediction&) = default;
};

struct EvalReport {
  double macro_f1 = 0.0;
  double auroc = 0.0;
  double auprc = 0.0;
  double loss = 0.0;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  std::size_t n_failed = 0;
  double threshold = 0.5;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

json to_json(const EvalReport& r);

// exp(yes) / (exp(yes) + exp(no)), evaluated as a sigmoid of the difference.
// Non-finite logits raise ValidationError.
double fraud_probability(const LogitPair& lp);

inline constexpr double kLossEpsilon = 1e-12;

// Mean negative log-likelihood with probabilities clipped to [eps, 1 - eps].
double eval_loss(std::span<const Prediction> preds);

double auroc(std::span<const Prediction> preds);
double auprc(std::span<const Prediction> preds);
double macro_f1(std::span<const Prediction> preds, double threshold = 0.5);

// All metrics over the labeled predictions. Requires both classes present.
EvalReport evaluate(std::span<const Prediction> preds, double threshold = 0.5,
                    std::size_t n_failed = 0);

class ClassifierBackend {
 public:
  virtual ~ClassifierBackend() = default;
  virtual std::string identity() const = 0;
  virtual LogitPair classify(const std::string& prompt) = 0;
};

// Logits derived from a hash of the prompt, in [-4, 4]. Deterministic noise.
class HashClassifier final : public ClassifierBackend {
 public:
  std::string identity() const override { return "mock-hash-v1"; }
  LogitPair classify(const std::string& prompt) override;
};

// logit_yes > logit_no iff `marker` occurs as a whitespace token (or token
// prefix, so trailing punctuation does not hide it) in the prompt.
class KeywordOracleClassifier final : public ClassifierBackend {
 public:
  explicit KeywordOracleClassifier(std::string marker, double margin = 2.0);

  std::string identity() const override { return "keyword-oracle:" + marker_; }
  LogitPair classify(const std::string& prompt) override;

 private:
  std::string marker_;
  double margin_;
};

// POST {endpoint}/classify {"prompt"} -> {"logit_yes", "logit_no"}
class HttpClassifier final : public ClassifierBackend {
 public:
  explicit HttpClassifier(HttpBackendOptions options);

  std::string identity() const override { return identity_; }
  LogitPair classify(const std::string& prompt) override;

 private:
  HttpJsonClient client_;
  std::string identity_;
};

struct PromptInput {
  NodeId node = 0;
  std::string prompt;
};

struct ClassifyFailure {
  NodeId node = 0;
  std::string message;
};

struct BatchResult {
  std::vector<Prediction> predictions;  // input order, failures omitted
  std::vector<ClassifyFailure> failures;
  std::size_t backend_calls = 0;
};

// One backend call per prompt, at most `max_in_flight` concurrently. A
// failing prompt is recorded and does not abort the batch.
BatchResult classify_batch(std::span<const PromptInput> prompts, ClassifierBackend& backend,
                           std::size_t max_in_flight = 1);

}  // namespace dgp
