#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "smle/core/dataset.hpp"
#include "smle/model/optimizer.hpp"
#include "smle/model/smle_model.hpp"

namespace smle {

struct TrainConfig {
  double val_split = 0.2;
  OptimizerKind optimizer = OptimizerKind::Adam;
  double lr = 1e-3;
  Loss loss = Loss::Mse;
  std::size_t batch_size = 128;
  std::size_t max_epochs = 1000;
  std::size_t patience = 5;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrainReport {
  std::size_t epochs = 0;
  std::size_t steps = 0;
  bool early_stopped = false;
  std::vector<double> val_loss;
};

/// Called after every optimizer step with the running step count.
using StepHook = std::function<void(std::size_t)>;

/// Minibatch training with early stopping on the trailing validation fraction.
/// Weights are not restored to the best epoch.
TrainReport fit(SmleModel& model, const Dataset& data, const TrainConfig& cfg, const StepHook& hook = {});
TrainReport fit(Mlp& model, const Dataset& data, const TrainConfig& cfg);

}  // namespace smle
