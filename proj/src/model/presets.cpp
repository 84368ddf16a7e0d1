#include "smle/model/presets.hpp"

#include <algorithm>
#include <cmath>

namespace smle {

namespace {

std::size_t log_width(std::size_t factor, std::size_t nm) {
  const double w = std::floor(static_cast<double>(factor) * std::log2(static_cast<double>(nm)));
  return std::max<std::size_t>(1, static_cast<std::size_t>(w));
}

double percentile(std::vector<double>& v, double p) {
  std::sort(v.begin(), v.end());
  const double pos = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::vector<Layer> relu_stack(const std::vector<std::size_t>& widths, std::size_t in, Rng& rng) {
  std::vector<Layer> layers;
  for (std::size_t w : widths) {
    layers.push_back({glorot_affine(in, w, rng), Activation::Relu});
    in = w;
  }
  return layers;
}

}  // namespace

std::vector<std::size_t> backbone_widths(const std::string& backbone, std::size_t n, std::size_t m) {
  const std::size_t nm = n * m;
  if (nm == 0) throw std::invalid_argument("backbone_widths: zero dimension");
  if (backbone == "h1") return {nm, 2 * nm, nm};
  if (backbone == "h2") return {nm, 2 * nm, 3 * nm, 2 * nm, nm};
  if (backbone == "h4") return {log_width(4, nm), log_width(8, nm), log_width(4, nm)};
  throw std::invalid_argument("unknown backbone: " + backbone);
}

AffineMap glorot_affine(std::size_t in, std::size_t out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
  AffineMap a = AffineMap::zeros(in, out);
  for (double& w : a.weight.data()) w = rng.uniform(-limit, limit);
  return a;
}

SmleModel build_smle(const ArchSpec& arch, const Box& input_box, std::size_t m, Rng& rng) {
  const std::size_t n = input_box.size();
  SmleModel model;
  model.input_box = input_box;
  model.h = Mlp(relu_stack(backbone_widths(arch.backbone, n, m), n, rng));
  const std::size_t e = model.h.out_dim();
  model.g = glorot_affine(e, m, rng);
  if (arch.aux == "constant") {
    model.h_low = AuxModel::make_constant(Vector(e, -1.0));
    model.h_up = AuxModel::make_constant(Vector(e, 1.0));
  } else if (arch.aux == "linear") {
    model.h_low = AuxModel::make_affine({Matrix(e, n), Vector(e, -1.0)});
    model.h_up = AuxModel::make_affine({Matrix(e, n), Vector(e, 1.0)});
  } else {
    throw std::invalid_argument("unknown aux kind: " + arch.aux);
  }
  model.validate();
  return model;
}

Mlp build_plain(const ArchSpec& arch, std::size_t n, std::size_t m, Rng& rng) {
  std::vector<Layer> layers = relu_stack(backbone_widths(arch.backbone, n, m), n, rng);
  layers.push_back({glorot_affine(layers.back().map.out_dim(), m, rng), Activation::Identity});
  return Mlp(std::move(layers));
}

void init_aux_from_data(SmleModel& model, const Matrix& x) {
  require_dims(x.rows() > 0, "init_aux_from_data: empty warmup set");
  require_dims(x.cols() == model.input_dim(), "init_aux_from_data: input dim mismatch");
  const std::size_t e = model.embed_dim();
  std::vector<Vector> cols(e, Vector(x.rows()));
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const Vector z = model.h.forward(x.row(i));
    for (std::size_t j = 0; j < e; ++j) cols[j][i] = z[j];
  }
  Vector lo(e), hi(e);
  for (std::size_t j = 0; j < e; ++j) {
    const double p5 = percentile(cols[j], 0.05);
    const double p95 = percentile(cols[j], 0.95);
    const double pad = 0.1 * (p95 - p5);
    lo[j] = p5 - pad;
    hi[j] = p95 + pad;
  }
  if (model.h_low.kind == AuxKind::Constant) {
    model.h_low = AuxModel::make_constant(lo);
    model.h_up = AuxModel::make_constant(hi);
  } else {
    model.h_low = AuxModel::make_affine({Matrix(e, model.input_dim()), lo});
    model.h_up = AuxModel::make_affine({Matrix(e, model.input_dim()), hi});
  }
}

}  // namespace smle
