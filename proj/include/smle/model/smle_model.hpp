#pragma once

#include <span>
#include <utility>
#include <vector>

#include "smle/core/interval.hpp"
#include "smle/model/layers.hpp"

namespace smle {

enum class AuxKind { Constant, Affine };

/// Bound network: either a constant vector or an affine function of x.
struct AuxModel {
  AuxKind kind = AuxKind::Constant;
  Vector constant;
  AffineMap affine;

  static AuxModel make_constant(Vector c);
  static AuxModel make_affine(AffineMap a);

  std::size_t out_dim() const;
  Vector eval(std::span<const double> x) const;
  /// Accumulates d(out)/d(params)ᵀ d_out into grads.
  void backward(std::span<const double> x, std::span<const double> d_out, AuxModel& grads) const;
  AuxModel zeros_like() const;
  void validate(std::size_t in_dim) const;

  friend bool operator==(const AuxModel&, const AuxModel&) = default;
};

std::vector<std::span<double>> parameter_blocks(AuxModel& m);

/// max(l, min(u, z)) elementwise; yields l when l > u.
Vector clip(std::span<const double> z, std::span<const double> l, std::span<const double> u);

struct SmleModel {
  Mlp h;
  AuxModel h_low;
  AuxModel h_up;
  AffineMap g;
  Box input_box;

  std::size_t input_dim() const { return input_box.size(); }
  std::size_t embed_dim() const { return g.in_dim(); }
  std::size_t output_dim() const { return g.out_dim(); }
  void validate() const;

  friend bool operator==(const SmleModel&, const SmleModel&) = default;
};

struct ForwardResult {
  Vector z;
  Vector z_bar;
  Vector y_hat;
};

ForwardResult forward(const SmleModel& model, std::span<const double> x);
/// Predictions for every row of x.
Matrix predict(const SmleModel& model, const Matrix& x);
Matrix predict(const Mlp& model, const Matrix& x);

/// (h_low(x), h_up(x)) with no ordering guarantee.
std::pair<Vector, Vector> embed_box(const SmleModel& model, std::span<const double> x);

struct Gradients {
  Mlp h;
  AuxModel h_low;
  AuxModel h_up;
  AffineMap g;

  static Gradients zeros_like(const SmleModel& m);
};

std::vector<std::span<double>> parameter_blocks(SmleModel& m);
std::vector<std::span<double>> parameter_blocks(Gradients& g);

enum class Loss { Mse, Bce };

/// Mean loss over every entry of the batch; bce acts on logits through a sigmoid.
double batch_loss(Loss loss, const Matrix& y_hat, const Matrix& y);

/// Exact reverse-mode gradient of the mean batch loss. Clip routing: a
/// coordinate with z <= l (or l > u) sends its gradient to h_low, z >= u to
/// h_up, everything else to h.
std::pair<double, Gradients> backward(const SmleModel& model, const Matrix& x, const Matrix& y, Loss loss);
std::pair<double, Mlp> backward(const Mlp& model, const Matrix& x, const Matrix& y, Loss loss);

}  // namespace smle
