#include "smle/baselines/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace smle {

double r2(const Matrix& pred, const Matrix& truth) {
  require_dims(pred.rows() == truth.rows() && pred.cols() == truth.cols(), "r2: shape mismatch");
  if (truth.rows() == 0 || truth.cols() == 0) throw std::invalid_argument("r2: empty input");
  double total = 0.0;
  for (std::size_t c = 0; c < truth.cols(); ++c) {
    double mean = 0.0;
    for (std::size_t i = 0; i < truth.rows(); ++i) mean += truth(i, c);
    mean /= double(truth.rows());
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < truth.rows(); ++i) {
      ss_res += (truth(i, c) - pred(i, c)) * (truth(i, c) - pred(i, c));
      ss_tot += (truth(i, c) - mean) * (truth(i, c) - mean);
    }
    if (ss_tot == 0.0) throw std::invalid_argument("r2: constant target column " + std::to_string(c));
    total += 1.0 - ss_res / ss_tot;
  }
  return total / double(truth.cols());
}

double avg_acc(const Matrix& pred_labels, const Matrix& truth_labels) {
  require_dims(pred_labels.rows() == truth_labels.rows() && pred_labels.cols() == truth_labels.cols(),
               "avg_acc: shape mismatch");
  if (truth_labels.rows() == 0 || truth_labels.cols() == 0) throw std::invalid_argument("avg_acc: empty input");
  std::size_t hits = 0;
  for (std::size_t k = 0; k < truth_labels.data().size(); ++k) {
    const double p = pred_labels.data()[k], t = truth_labels.data()[k];
    if ((p != 0.0 && p != 1.0) || (t != 0.0 && t != 1.0)) throw std::invalid_argument("avg_acc: labels must be 0 or 1");
    hits += p == t;
  }
  // Every class column has the same row count, so the mean of per-class rates is the pooled rate.
  return double(hits) / double(truth_labels.data().size());
}

Matrix threshold_logits(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (std::size_t k = 0; k < out.data().size(); ++k) out.data()[k] = logits.data()[k] >= 0.0 ? 1.0 : 0.0;
  return out;
}

double violation_rate(const Matrix& outputs, const Matrix& x, const PropertySpec& prop, bool labels) {
  require_dims(outputs.rows() == x.rows(), "violation_rate: row mismatch");
  if (outputs.rows() == 0) throw std::invalid_argument("violation_rate: empty evaluation set");
  std::size_t eligible = 0, bad = 0;
  if (const auto* p = std::get_if<PolytopeProperty>(&prop)) {
    for (std::size_t i = 0; i < x.rows(); ++i) {
      if (!holds_q(*p, x.row(i))) continue;
      ++eligible;
      bad += !holds_r(*p, outputs.row(i));
    }
  } else {
    const auto& m = std::get<MutexProperty>(prop);
    Vector scores(outputs.cols());
    for (std::size_t i = 0; i < outputs.rows(); ++i) {
      const auto row = outputs.row(i);
      for (std::size_t k = 0; k < scores.size(); ++k) scores[k] = labels ? (row[k] >= 0.5 ? 1.0 : -1.0) : row[k];
      ++eligible;
      bad += !mutex_holds(m, scores);
    }
  }
  return eligible == 0 ? 0.0 : double(bad) / double(eligible);
}

std::string to_string(GuaranteeTag g) {
  switch (g) {
    case GuaranteeTag::Guaranteed: return "guaranteed";
    case GuaranteeTag::Unguaranteed: return "unguaranteed";
    case GuaranteeTag::NotApplicable: return "n/a";
  }
  return "n/a";
}

void Metrics::validate() const {
  if (r2 && !(*r2 <= 1.0)) throw std::logic_error("Metrics: r2 above 1");
  if (avg_acc && !(*avg_acc >= 0.0 && *avg_acc <= 1.0)) throw std::logic_error("Metrics: avg_acc outside [0,1]");
  if (!(violation_rate >= 0.0 && violation_rate <= 1.0)) throw std::logic_error("Metrics: violation_rate outside [0,1]");
}

}  // namespace smle
