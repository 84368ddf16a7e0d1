#include "smle/model/trainer.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "smle/core/rng.hpp"

namespace smle {

void TrainConfig::validate() const {
  if (!(val_split > 0.0 && val_split < 1.0)) throw std::invalid_argument("TrainConfig: val_split must be in (0,1)");
  if (batch_size == 0) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
  if (!(lr > 0.0)) throw std::invalid_argument("TrainConfig: lr must be positive");
}

namespace {

template <typename Model, typename Grads>
TrainReport fit_impl(Model& model, const Dataset& data, const TrainConfig& cfg, const StepHook& hook) {
  cfg.validate();
  data.validate();
  TrainReport report;
  const auto n_val = static_cast<std::size_t>(std::floor(cfg.val_split * static_cast<double>(data.size())));
  const std::size_t n_train = data.size() - n_val;
  if (n_train == 0) throw std::invalid_argument("fit: no training rows after the validation split");
  const Dataset train = data.slice(0, n_train);
  const Dataset val = n_val > 0 ? data.slice(n_train, data.size()) : train;

  Rng rng(cfg.seed);
  Optimizer opt(cfg.optimizer, cfg.lr);
  std::vector<std::size_t> order(n_train);
  std::iota(order.begin(), order.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  std::size_t wait = 0;

  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < n_train; start += cfg.batch_size) {
      const std::size_t end = std::min(n_train, start + cfg.batch_size);
      const Dataset batch = train.subset(std::span<const std::size_t>(order).subspan(start, end - start));
      auto [loss, grads] = backward(model, batch.x, batch.y, cfg.loss);
      Grads& g = grads;
      opt.step(parameter_blocks(model), parameter_blocks(g));
      ++report.steps;
      if (hook) hook(report.steps);
    }
    ++report.epochs;
    const double v = batch_loss(cfg.loss, predict(model, val.x), val.y);
    report.val_loss.push_back(v);
    if (v < best) {
      best = v;
      wait = 0;
    } else if (++wait >= cfg.patience) {
      report.early_stopped = true;
      break;
    }
  }
  return report;
}

}  // namespace

TrainReport fit(SmleModel& model, const Dataset& data, const TrainConfig& cfg, const StepHook& hook) {
  require_dims(data.input_dim() == model.input_dim() && data.output_dim() == model.output_dim(), "fit: data dims");
  return fit_impl<SmleModel, Gradients>(model, data, cfg, hook);
}

TrainReport fit(Mlp& model, const Dataset& data, const TrainConfig& cfg) {
  require_dims(data.input_dim() == model.in_dim() && data.output_dim() == model.out_dim(), "fit: data dims");
  return fit_impl<Mlp, Mlp>(model, data, cfg, {});
}

}  // namespace smle
