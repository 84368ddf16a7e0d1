#pragma once

#include <optional>
#include <string>

#include "smle/core/linalg.hpp"
#include "smle/property/property.hpp"

namespace smle {

/// Coefficient of determination averaged over output columns.
double r2(const Matrix& pred, const Matrix& truth);
/// Mean per-class accuracy of binary label matrices.
double avg_acc(const Matrix& pred_labels, const Matrix& truth_labels);

/// Fraction of rows whose output falsifies the property. For polytopes only
/// rows with Q x <= q count (0 when there are none). Mutex outputs are
/// logits or {0,1} labels with labels read as "predicted" when >= 0.5.
double violation_rate(const Matrix& outputs, const Matrix& x, const PropertySpec& prop, bool labels = false);

/// Logit >= 0 rule.
Matrix threshold_logits(const Matrix& logits);

enum class GuaranteeTag { Guaranteed, Unguaranteed, NotApplicable };
std::string to_string(GuaranteeTag g);

struct Metrics {
  std::optional<double> r2;
  std::optional<double> avg_acc;
  double violation_rate = 0.0;
  double wall_time = 0.0;
  GuaranteeTag guarantee = GuaranteeTag::NotApplicable;

  void validate() const;
  bool operator==(const Metrics&) const = default;
};

}  // namespace smle
