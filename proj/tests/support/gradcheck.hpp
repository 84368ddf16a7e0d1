#pragma once

#include "smle/core/rng.hpp"
#include "smle/model/presets.hpp"
#include "smle/model/smle_model.hpp"

namespace smle::testing {

struct GradCheck {
  std::size_t checked = 0;
  std::size_t skipped = 0;  // coordinates whose ±step crosses a relu or clip kink
  std::size_t failures = 0;
  double worst_rel = 0.0;
};

/// Central finite differences on every parameter coordinate against backward().
/// A coordinate passes when |fd − an| <= rtol · max(|fd|, |an|, 1e-4).
GradCheck grad_check(const SmleModel& model, const Matrix& x, const Matrix& y, Loss loss, double step = 1e-5,
                     double rtol = 1e-4);
GradCheck grad_check(const Mlp& model, const Matrix& x, const Matrix& y, Loss loss, double step = 1e-5,
                     double rtol = 1e-4);

/// Preset model with perturbed biases and aux bounds chosen so that a sample
/// batch hits interior, clipped and degenerate (l > u) coordinates.
SmleModel random_clipping_model(const ArchSpec& arch, std::size_t n, std::size_t m, Rng& rng);

}  // namespace smle::testing
