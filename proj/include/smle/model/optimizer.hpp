#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace smle {

enum class OptimizerKind { Sgd, Adam };

std::string to_string(OptimizerKind k);
OptimizerKind optimizer_from_string(const std::string& s);

/// First-order optimizer over a fixed list of parameter blocks. State is sized
/// on the first step and every later step must present the same shapes.
class Optimizer {
 public:
  explicit Optimizer(OptimizerKind kind, double lr = 1e-3);

  void step(const std::vector<std::span<double>>& params, const std::vector<std::span<double>>& grads);

  OptimizerKind kind() const { return kind_; }
  double lr() const { return lr_; }
  std::size_t steps() const { return t_; }

  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;

 private:
  OptimizerKind kind_;
  double lr_;
  std::size_t t_ = 0;
  std::vector<std::size_t> shape_;
  std::vector<double> m_;
  std::vector<double> v_;
};

}  // namespace smle
