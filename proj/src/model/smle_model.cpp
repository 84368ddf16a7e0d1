#include "smle/model/smle_model.hpp"

#include <algorithm>
#include <cmath>

namespace smle {

AuxModel AuxModel::make_constant(Vector c) {
  AuxModel m;
  m.kind = AuxKind::Constant;
  m.constant = std::move(c);
  return m;
}

AuxModel AuxModel::make_affine(AffineMap a) {
  AuxModel m;
  m.kind = AuxKind::Affine;
  m.affine = std::move(a);
  return m;
}

std::size_t AuxModel::out_dim() const { return kind == AuxKind::Constant ? constant.size() : affine.out_dim(); }

Vector AuxModel::eval(std::span<const double> x) const {
  if (kind == AuxKind::Constant) return constant;
  return affine.apply(x);
}

void AuxModel::backward(std::span<const double> x, std::span<const double> d_out, AuxModel& grads) const {
  if (kind == AuxKind::Constant) {
    axpy(1.0, d_out, grads.constant);
    return;
  }
  for (std::size_t r = 0; r < d_out.size(); ++r) {
    if (d_out[r] == 0.0) continue;
    grads.affine.bias[r] += d_out[r];
    axpy(d_out[r], x, grads.affine.weight.row(r));
  }
}

AuxModel AuxModel::zeros_like() const {
  AuxModel out = *this;
  std::fill(out.constant.begin(), out.constant.end(), 0.0);
  std::fill(out.affine.weight.data().begin(), out.affine.weight.data().end(), 0.0);
  std::fill(out.affine.bias.begin(), out.affine.bias.end(), 0.0);
  return out;
}

void AuxModel::validate(std::size_t in_dim) const {
  if (kind == AuxKind::Affine) {
    affine.validate();
    require_dims(affine.in_dim() == in_dim, "AuxModel: affine input dim mismatch");
  }
}

std::vector<std::span<double>> parameter_blocks(AuxModel& m) {
  if (m.kind == AuxKind::Constant) return {std::span<double>(m.constant)};
  return parameter_blocks(m.affine);
}

Vector clip(std::span<const double> z, std::span<const double> l, std::span<const double> u) {
  require_dims(z.size() == l.size() && z.size() == u.size(), "clip: length mismatch");
  Vector out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = std::max(l[i], std::min(u[i], z[i]));
  return out;
}

void SmleModel::validate() const {
  h.validate();
  g.validate();
  require_dims(h.in_dim() == input_dim(), "SmleModel: backbone input dim != |input_box|");
  require_dims(h.out_dim() == g.in_dim(), "SmleModel: embedding dim mismatch between h and g");
  require_dims(h_low.kind == h_up.kind, "SmleModel: aux models differ in kind");
  h_low.validate(input_dim());
  h_up.validate(input_dim());
  require_dims(h_low.out_dim() == embed_dim() && h_up.out_dim() == embed_dim(), "SmleModel: aux output dim");
  if (!box_bounded(input_box)) throw std::invalid_argument("SmleModel: input box must be bounded");
}

ForwardResult forward(const SmleModel& model, std::span<const double> x) {
  require_dims(x.size() == model.input_dim(), "forward: |x| != input dim");
  ForwardResult r;
  r.z = model.h.forward(x);
  r.z_bar = clip(r.z, model.h_low.eval(x), model.h_up.eval(x));
  r.y_hat = model.g.apply(r.z_bar);
  return r;
}

Matrix predict(const SmleModel& model, const Matrix& x) {
  Matrix out(x.rows(), model.output_dim());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const Vector y = forward(model, x.row(i)).y_hat;
    std::copy(y.begin(), y.end(), out.row(i).begin());
  }
  return out;
}

Matrix predict(const Mlp& model, const Matrix& x) {
  require_dims(x.cols() == model.in_dim(), "predict: input dim mismatch");
  Matrix out(x.rows(), model.out_dim());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const Vector y = model.forward(x.row(i));
    std::copy(y.begin(), y.end(), out.row(i).begin());
  }
  return out;
}

std::pair<Vector, Vector> embed_box(const SmleModel& model, std::span<const double> x) {
  require_dims(x.size() == model.input_dim(), "embed_box: |x| != input dim");
  return {model.h_low.eval(x), model.h_up.eval(x)};
}

Gradients Gradients::zeros_like(const SmleModel& m) {
  return {m.h.zeros_like(), m.h_low.zeros_like(), m.h_up.zeros_like(), AffineMap::zeros(m.g.in_dim(), m.g.out_dim())};
}

std::vector<std::span<double>> parameter_blocks(SmleModel& m) {
  std::vector<std::span<double>> out = parameter_blocks(m.h);
  for (auto b : parameter_blocks(m.h_low)) out.push_back(b);
  for (auto b : parameter_blocks(m.h_up)) out.push_back(b);
  for (auto b : parameter_blocks(m.g)) out.push_back(b);
  return out;
}

std::vector<std::span<double>> parameter_blocks(Gradients& m) {
  std::vector<std::span<double>> out = parameter_blocks(m.h);
  for (auto b : parameter_blocks(m.h_low)) out.push_back(b);
  for (auto b : parameter_blocks(m.h_up)) out.push_back(b);
  for (auto b : parameter_blocks(m.g)) out.push_back(b);
  return out;
}

namespace {

double softplus(double a) { return std::max(a, 0.0) + std::log1p(std::exp(-std::abs(a))); }
double sigmoid(double a) {
  if (a >= 0) return 1.0 / (1.0 + std::exp(-a));
  const double e = std::exp(a);
  return e / (1.0 + e);
}

void check_batch(const Matrix& x, const Matrix& y, Loss loss) {
  require_dims(x.rows() > 0, "backward: empty batch");
  require_dims(x.rows() == y.rows(), "backward: x and y row counts differ");
  if (loss == Loss::Bce)
    for (double v : y.data())
      if (v != 0.0 && v != 1.0) throw std::invalid_argument("backward: bce labels must be 0 or 1");
}

// Loss of one row and its gradient, already divided by the entry count.
double row_loss(Loss loss, std::span<const double> y_hat, std::span<const double> y, double inv_count, Vector& d) {
  d.assign(y_hat.size(), 0.0);
  double total = 0.0;
  for (std::size_t k = 0; k < y_hat.size(); ++k) {
    if (loss == Loss::Mse) {
      const double e = y_hat[k] - y[k];
      total += e * e;
      d[k] = 2.0 * e * inv_count;
    } else {
      total += softplus(y_hat[k]) - y[k] * y_hat[k];
      d[k] = (sigmoid(y_hat[k]) - y[k]) * inv_count;
    }
  }
  return total * inv_count;
}

}  // namespace

double batch_loss(Loss loss, const Matrix& y_hat, const Matrix& y) {
  require_dims(y_hat.rows() == y.rows() && y_hat.cols() == y.cols(), "batch_loss: shape mismatch");
  require_dims(y.rows() > 0 && y.cols() > 0, "batch_loss: empty batch");
  const double inv = 1.0 / static_cast<double>(y.rows() * y.cols());
  double total = 0.0;
  Vector d;
  for (std::size_t i = 0; i < y.rows(); ++i) total += row_loss(loss, y_hat.row(i), y.row(i), inv, d);
  return total;
}

std::pair<double, Gradients> backward(const SmleModel& model, const Matrix& x, const Matrix& y, Loss loss) {
  check_batch(x, y, loss);
  require_dims(x.cols() == model.input_dim() && y.cols() == model.output_dim(), "backward: batch dims");
  Gradients grads = Gradients::zeros_like(model);
  const std::size_t n = model.embed_dim();
  const double inv = 1.0 / static_cast<double>(y.rows() * y.cols());
  double total = 0.0;
  MlpTrace trace;
  Vector d_y, d_z(n), d_l(n), d_u(n);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto xi = x.row(i);
    const Vector z = model.h.forward(xi, trace);
    const Vector l = model.h_low.eval(xi);
    const Vector u = model.h_up.eval(xi);
    const Vector z_bar = clip(z, l, u);
    const Vector y_hat = model.g.apply(z_bar);
    total += row_loss(loss, y_hat, y.row(i), inv, d_y);

    for (std::size_t k = 0; k < d_y.size(); ++k) {
      grads.g.bias[k] += d_y[k];
      axpy(d_y[k], z_bar, grads.g.weight.row(k));
    }
    const Vector d_zbar = matvec_transposed(model.g.weight, d_y);
    for (std::size_t j = 0; j < n; ++j) {
      d_z[j] = d_l[j] = d_u[j] = 0.0;
      if (l[j] > u[j] || z[j] <= l[j]) d_l[j] = d_zbar[j];
      else if (z[j] >= u[j]) d_u[j] = d_zbar[j];
      else d_z[j] = d_zbar[j];
    }
    model.h.backward(trace, d_z, grads.h);
    model.h_low.backward(xi, d_l, grads.h_low);
    model.h_up.backward(xi, d_u, grads.h_up);
  }
  return {total, std::move(grads)};
}

std::pair<double, Mlp> backward(const Mlp& model, const Matrix& x, const Matrix& y, Loss loss) {
  check_batch(x, y, loss);
  require_dims(x.cols() == model.in_dim() && y.cols() == model.out_dim(), "backward: batch dims");
  Mlp grads = model.zeros_like();
  const double inv = 1.0 / static_cast<double>(y.rows() * y.cols());
  double total = 0.0;
  MlpTrace trace;
  Vector d_y;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const Vector y_hat = model.forward(x.row(i), trace);
    total += row_loss(loss, y_hat, y.row(i), inv, d_y);
    model.backward(trace, d_y, grads);
  }
  return {total, std::move(grads)};
}

}  // namespace smle
