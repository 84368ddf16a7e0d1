#include "smle/model/optimizer.hpp"

#include <cmath>
#include <stdexcept>

#include "smle/core/linalg.hpp"

namespace smle {

std::string to_string(OptimizerKind k) { return k == OptimizerKind::Sgd ? "sgd" : "adam"; }

OptimizerKind optimizer_from_string(const std::string& s) {
  if (s == "sgd") return OptimizerKind::Sgd;
  if (s == "adam") return OptimizerKind::Adam;
  throw std::invalid_argument("unknown optimizer: " + s);
}

Optimizer::Optimizer(OptimizerKind kind, double lr) : kind_(kind), lr_(lr) {
  if (!(lr > 0.0) || !std::isfinite(lr)) throw std::invalid_argument("Optimizer: learning rate must be positive");
}

void Optimizer::step(const std::vector<std::span<double>>& params, const std::vector<std::span<double>>& grads) {
  require_dims(params.size() == grads.size(), "Optimizer::step: block count mismatch");
  std::vector<std::size_t> shape(params.size());
  std::size_t total = 0;
  for (std::size_t b = 0; b < params.size(); ++b) {
    require_dims(params[b].size() == grads[b].size(), "Optimizer::step: block shape mismatch");
    shape[b] = params[b].size();
    total += shape[b];
  }
  if (t_ == 0) {
    shape_ = shape;
    m_.assign(total, 0.0);
    v_.assign(total, 0.0);
  }
  require_dims(shape == shape_, "Optimizer::step: parameter shapes changed between steps");
  ++t_;

  if (kind_ == OptimizerKind::Sgd) {
    for (std::size_t b = 0; b < params.size(); ++b)
      for (std::size_t i = 0; i < shape[b]; ++i) params[b][i] -= lr_ * grads[b][i];
    return;
  }
  const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
  std::size_t k = 0;
  for (std::size_t b = 0; b < params.size(); ++b) {
    for (std::size_t i = 0; i < shape[b]; ++i, ++k) {
      const double g = grads[b][i];
      m_[k] = kBeta1 * m_[k] + (1.0 - kBeta1) * g;
      v_[k] = kBeta2 * v_[k] + (1.0 - kBeta2) * g * g;
      params[b][i] -= lr_ * (m_[k] / c1) / (std::sqrt(v_[k] / c2) + kEps);
    }
  }
}

}  // namespace smle
