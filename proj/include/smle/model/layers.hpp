#pragma once

#include <span>
#include <string>
#include <vector>

#include "smle/core/linalg.hpp"

namespace smle {

enum class Activation { Relu, Identity };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

struct AffineMap {
  Matrix weight;
  Vector bias;

  AffineMap() = default;
  AffineMap(Matrix w, Vector b);
  static AffineMap zeros(std::size_t in, std::size_t out);

  std::size_t in_dim() const { return weight.cols(); }
  std::size_t out_dim() const { return weight.rows(); }
  Vector apply(std::span<const double> x) const;
  void validate() const;

  friend bool operator==(const AffineMap&, const AffineMap&) = default;
};

struct Layer {
  AffineMap map;
  Activation act = Activation::Identity;

  friend bool operator==(const Layer&, const Layer&) = default;
};

/// Intermediate values of one Mlp evaluation, kept for the backward pass.
struct MlpTrace {
  std::vector<Vector> inputs;  // input to each layer
  std::vector<Vector> pre;     // pre-activation of each layer
};

class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(std::vector<Layer> layers);

  std::size_t in_dim() const;
  std::size_t out_dim() const;
  std::size_t depth() const { return layers_.size(); }
  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& layers() { return layers_; }

  Vector forward(std::span<const double> x) const;
  Vector forward(std::span<const double> x, MlpTrace& trace) const;

  /// Accumulates parameter gradients into `grads` (same shape) and returns the
  /// gradient with respect to the input.
  Vector backward(const MlpTrace& trace, std::span<const double> d_out, Mlp& grads) const;

  Mlp zeros_like() const;
  void validate() const;

  friend bool operator==(const Mlp&, const Mlp&) = default;

 private:
  std::vector<Layer> layers_;
};

/// Parameter blocks in a fixed order (weights then bias, layer by layer).
std::vector<std::span<double>> parameter_blocks(AffineMap& m);
std::vector<std::span<double>> parameter_blocks(Mlp& m);

}  // namespace smle
