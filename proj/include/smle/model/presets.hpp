#pragma once

#include <string>
#include <vector>

#include "smle/core/rng.hpp"
#include "smle/model/smle_model.hpp"

namespace smle {

/// Named backbone/aux combination. Backbones: "h1", "h2", "h4". Aux: "linear", "constant".
struct ArchSpec {
  std::string backbone = "h1";
  std::string aux = "linear";

  static ArchSpec synthetic() { return {"h1", "linear"}; }
  static ArchSpec classification() { return {"h4", "constant"}; }
};

/// Hidden widths of a backbone for input dim n and output dim m.
std::vector<std::size_t> backbone_widths(const std::string& backbone, std::size_t n, std::size_t m);

/// Glorot-uniform weights, zero biases.
AffineMap glorot_affine(std::size_t in, std::size_t out, Rng& rng);

/// Backbone layers are all relu; the head g is linear.
SmleModel build_smle(const ArchSpec& arch, const Box& input_box, std::size_t m, Rng& rng);
/// The same backbone followed by the head as a final identity layer.
Mlp build_plain(const ArchSpec& arch, std::size_t n, std::size_t m, Rng& rng);

/// Sets both aux models from the (p5, p95) percentiles of h over x, widened by
/// 10% of the range on each side. Affine aux get zero weights.
void init_aux_from_data(SmleModel& model, const Matrix& x);

}  // namespace smle
