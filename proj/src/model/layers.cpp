#include "smle/model/layers.hpp"

#include <algorithm>

namespace smle {

std::string to_string(Activation a) { return a == Activation::Relu ? "relu" : "identity"; }

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::Relu;
  if (s == "identity" || s == "linear") return Activation::Identity;
  throw std::invalid_argument("unknown activation: " + s);
}

AffineMap::AffineMap(Matrix w, Vector b) : weight(std::move(w)), bias(std::move(b)) { validate(); }

AffineMap AffineMap::zeros(std::size_t in, std::size_t out) { return {Matrix(out, in), Vector(out, 0.0)}; }

Vector AffineMap::apply(std::span<const double> x) const {
  Vector y = matvec(weight, x);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += bias[i];
  return y;
}

void AffineMap::validate() const {
  require_dims(weight.rows() == bias.size(), "AffineMap: weight rows != |bias|");
}

Mlp::Mlp(std::vector<Layer> layers) : layers_(std::move(layers)) { validate(); }

std::size_t Mlp::in_dim() const { return layers_.empty() ? 0 : layers_.front().map.in_dim(); }
std::size_t Mlp::out_dim() const { return layers_.empty() ? 0 : layers_.back().map.out_dim(); }

void Mlp::validate() const {
  require_dims(!layers_.empty(), "Mlp: no layers");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    layers_[i].map.validate();
    if (i > 0) require_dims(layers_[i].map.in_dim() == layers_[i - 1].map.out_dim(), "Mlp: layer dims do not chain");
  }
}

Vector Mlp::forward(std::span<const double> x) const {
  Vector a(x.begin(), x.end());
  for (const Layer& l : layers_) {
    a = l.map.apply(a);
    if (l.act == Activation::Relu)
      for (double& v : a) v = std::max(v, 0.0);
  }
  return a;
}

Vector Mlp::forward(std::span<const double> x, MlpTrace& trace) const {
  trace.inputs.assign(layers_.size(), {});
  trace.pre.assign(layers_.size(), {});
  Vector a(x.begin(), x.end());
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    trace.inputs[i] = a;
    a = layers_[i].map.apply(a);
    trace.pre[i] = a;
    if (layers_[i].act == Activation::Relu)
      for (double& v : a) v = std::max(v, 0.0);
  }
  return a;
}

Vector Mlp::backward(const MlpTrace& trace, std::span<const double> d_out, Mlp& grads) const {
  Vector d(d_out.begin(), d_out.end());
  for (std::size_t i = layers_.size(); i-- > 0;) {
    const Layer& l = layers_[i];
    if (l.act == Activation::Relu)
      for (std::size_t k = 0; k < d.size(); ++k)
        if (trace.pre[i][k] <= 0.0) d[k] = 0.0;
    AffineMap& g = grads.layers_[i].map;
    const Vector& in = trace.inputs[i];
    for (std::size_t r = 0; r < d.size(); ++r) {
      if (d[r] == 0.0) continue;
      g.bias[r] += d[r];
      axpy(d[r], in, g.weight.row(r));
    }
    d = matvec_transposed(l.map.weight, d);
  }
  return d;
}

Mlp Mlp::zeros_like() const {
  Mlp out = *this;
  for (Layer& l : out.layers_) {
    std::fill(l.map.weight.data().begin(), l.map.weight.data().end(), 0.0);
    std::fill(l.map.bias.begin(), l.map.bias.end(), 0.0);
  }
  return out;
}

std::vector<std::span<double>> parameter_blocks(AffineMap& m) {
  return {std::span<double>(m.weight.data()), std::span<double>(m.bias)};
}

std::vector<std::span<double>> parameter_blocks(Mlp& m) {
  std::vector<std::span<double>> out;
  for (Layer& l : m.layers())
    for (auto b : parameter_blocks(l.map)) out.push_back(b);
  return out;
}

}  // namespace smle
