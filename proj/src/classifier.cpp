#include "dgp/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <mutex>

#include "dgp/error.hpp"
#include "dgp/hash.hpp"
#include "dgp/parallel.hpp"
#include "dgp/tokenizer.hpp"

namespace dgp {
namespace {

std::vector<Prediction> labeled(std::span<const Prediction> preds) {
  std::vector<Prediction> out;
  for (const auto& p : preds) {
    if (p.label) out.push_back(p);
  }
  return out;
}

void check_probability(const Prediction& p) {
  if (!(p.p_fraud >= 0.0 && p.p_fraud <= 1.0)) {
    throw ValidationError("prediction for node " + std::to_string(p.node) +
                          " has p_fraud outside [0, 1]");
  }
}

}  // namespace

json to_json(const EvalReport& r) {
  return {{"macro_f1", r.macro_f1}, {"auroc", r.auroc},         {"auprc", r.auprc},
          {"loss", r.loss},         {"n_pos", r.n_pos},         {"n_neg", r.n_neg},
          {"n_failed", r.n_failed}, {"threshold", r.threshold}};
}

double fraud_probability(const LogitPair& lp) {
  if (!std::isfinite(lp.logit_yes) || !std::isfinite(lp.logit_no)) {
    throw ValidationError("fraud_probability: logits must be finite");
  }
  const double d = lp.logit_yes - lp.logit_no;
  if (d >= 0) return 1.0 / (1.0 + std::exp(-d));
  const double e = std::exp(d);
  return e / (1.0 + e);
}

double eval_loss(std::span<const Prediction> preds) {
  if (preds.empty()) throw ValidationError("eval_loss: no predictions");
  double total = 0.0;
  for (const auto& p : preds) {
    if (!p.label) throw ValidationError("eval_loss: node " + std::to_string(p.node) + " is unlabeled");
    check_probability(p);
    const double q = std::clamp(p.p_fraud, kLossEpsilon, 1.0 - kLossEpsilon);
    total -= *p.label == 1 ? std::log(q) : std::log1p(-q);
  }
  return total / static_cast<double>(preds.size());
}

double auroc(std::span<const Prediction> preds) {
  auto v = labeled(preds);
  std::size_t n_pos = 0;
  for (const auto& p : v) {
    check_probability(p);
    n_pos += *p.label == 1;
  }
  const std::size_t n_neg = v.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw ValidationError("auroc: needs at least one positive and one negative label");
  }
  // Mann-Whitney U with midranks for tied scores.
  std::sort(v.begin(), v.end(),
            [](const Prediction& a, const Prediction& b) { return a.p_fraud < b.p_fraud; });
  double pos_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < v.size()) {
    std::size_t j = i;
    std::size_t pos_in_group = 0;
    while (j < v.size() && v[j].p_fraud == v[i].p_fraud) pos_in_group += *v[j++].label == 1;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);  // ranks i+1 .. j
    pos_rank_sum += midrank * static_cast<double>(pos_in_group);
    i = j;
  }
  const double np = static_cast<double>(n_pos);
  const double u = pos_rank_sum - np * (np + 1.0) / 2.0;
  return u / (np * static_cast<double>(n_neg));
}

double auprc(std::span<const Prediction> preds) {
  auto v = labeled(preds);
  for (const auto& p : v) check_probability(p);
  std::sort(v.begin(), v.end(), [](const Prediction& a, const Prediction& b) {
    return a.p_fraud != b.p_fraud ? a.p_fraud > b.p_fraud : a.node < b.node;
  });
  long double precision_sum = 0.0L;
  std::size_t hits = 0;
  for (std::size_t rank = 0; rank < v.size(); ++rank) {
    if (*v[rank].label == 1) {
      ++hits;
      precision_sum += static_cast<long double>(hits) / static_cast<long double>(rank + 1);
    }
  }
  if (hits == 0) throw ValidationError("auprc: needs at least one positive label");
  return static_cast<double>(precision_sum / static_cast<long double>(hits));
}

double macro_f1(std::span<const Prediction> preds, double threshold) {
  const auto v = labeled(preds);
  if (v.empty()) throw ValidationError("macro_f1: no labeled predictions");
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  for (const auto& p : v) {
    check_probability(p);
    const bool predicted = p.p_fraud >= threshold;
    const bool actual = *p.label == 1;
    if (predicted && actual) ++tp;
    else if (predicted) ++fp;
    else if (actual) ++fn;
    else ++tn;
  }
  auto f1 = [](std::size_t t, std::size_t false_pos, std::size_t false_neg) {
    const std::size_t denom = 2 * t + false_pos + false_neg;
    return denom == 0 ? 0.0 : 2.0 * static_cast<double>(t) / static_cast<double>(denom);
  };
  // The benign class swaps the roles of the off-diagonal cells.
  return 0.5 * (f1(tp, fp, fn) + f1(tn, fn, fp));
}

EvalReport evaluate(std::span<const Prediction> preds, double threshold, std::size_t n_failed) {
  const auto v = labeled(preds);
  EvalReport r;
  r.threshold = threshold;
  r.n_failed = n_failed;
  for (const auto& p : v) (*p.label == 1 ? r.n_pos : r.n_neg)++;
  r.auroc = auroc(v);
  r.auprc = auprc(v);
  r.macro_f1 = macro_f1(v, threshold);
  r.loss = eval_loss(v);
  return r;
}

LogitPair HashClassifier::classify(const std::string& prompt) {
  const std::string h = sha256_hex(prompt);
  auto unit = [&](std::size_t offset) {
    const auto bits = std::stoull(h.substr(offset, 12), nullptr, 16);  // 48 bits
    return static_cast<double>(bits) / static_cast<double>((std::uint64_t{1} << 48) - 1);
  };
  return {8.0 * unit(0) - 4.0, 8.0 * unit(12) - 4.0};
}

KeywordOracleClassifier::KeywordOracleClassifier(std::string marker, double margin)
    : marker_(std::move(marker)), margin_(margin) {
  if (marker_.empty() || token_count(marker_) != 1) {
    throw ValidationError("keyword oracle marker must be a single non-empty token");
  }
}

LogitPair KeywordOracleClassifier::classify(const std::string& prompt) {
  for (const auto tok : tokenize(prompt)) {
    if (tok.substr(0, marker_.size()) == marker_) return {margin_, 0.0};
  }
  return {0.0, margin_};
}

HttpClassifier::HttpClassifier(HttpBackendOptions options)
    : client_(options.endpoint, options.timeout, options.retry),
      identity_(options.identity.empty() ? "http:" + options.endpoint : options.identity) {}

LogitPair HttpClassifier::classify(const std::string& prompt) {
  const json res = client_.post("/classify", json{{"prompt", prompt}}, [](const json& r) {
    if (!r.is_object() || !r.contains("logit_yes") || !r.contains("logit_no") ||
        !r["logit_yes"].is_number() || !r["logit_no"].is_number()) {
      throw std::runtime_error("response lacks numeric 'logit_yes'/'logit_no'");
    }
  });
  return {res["logit_yes"].get<double>(), res["logit_no"].get<double>()};
}

BatchResult classify_batch(std::span<const PromptInput> prompts, ClassifierBackend& backend,
                           std::size_t max_in_flight) {
  std::vector<std::optional<Prediction>> slots(prompts.size());
  std::vector<std::optional<std::string>> errors(prompts.size());
  std::atomic<std::size_t> calls{0};
  parallel_for(prompts.size(), max_in_flight, [&](std::size_t i) {
    try {
      ++calls;
      const LogitPair lp = backend.classify(prompts[i].prompt);
      slots[i] = Prediction{prompts[i].node, fraud_probability(lp), std::nullopt};
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  BatchResult out;
  out.backend_calls = calls.load();
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    if (slots[i]) {
      out.predictions.push_back(*slots[i]);
    } else {
      out.failures.push_back({prompts[i].node, errors[i].value_or("unknown error")});
    }
  }
  return out;
}

}  // namespace dgp
