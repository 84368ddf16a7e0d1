#pragma once

#include <cstdint>
#include <vector>

#include "json.hpp"
#include "smle/core/dataset.hpp"

namespace smle {

struct SyntheticTask {
  std::size_t n = 2;
  std::vector<int> K{1, 2};
  std::size_t samples = 1000;
  std::uint64_t seed = 0;

  void validate() const;
};

/// ((Σ_j x_j)^k) for k in K.
Vector synthetic_target(std::span<const double> x, const std::vector<int>& K);

/// Per-column affine scaling fitted on one matrix and applied to others.
struct Standardizer {
  Vector mean;
  Vector scale;

  static Standardizer fit(const Matrix& m);
  Matrix apply(const Matrix& m) const;
  Matrix invert(const Matrix& m) const;
};

struct TaskData {
  Dataset train;
  Dataset test;
  Standardizer y_scale;  // identity for label data
};

/// X uniform in [−1,1]ⁿ. The trailing `test_fraction` rows form the test split.
Dataset gen_synthetic_raw(const SyntheticTask& task);
/// Raw data split in two with Y standardized by train-split statistics.
TaskData gen_synthetic(const SyntheticTask& task, double test_fraction = 0.2);

struct PlantedPair {
  std::size_t h = 0;
  std::size_t k = 0;
  double rate = 0.0;
};

/// Class j fires when (x_f + 1)/2 falls in a window of length `width` on one
/// feature f. Planted pairs share a feature and overlap by exactly `rate`.
struct MultilabelTask {
  std::size_t m = 6;
  std::size_t n = 8;
  std::size_t samples = 1000;
  std::uint64_t seed = 0;
  double width = 0.4;
  /// Empty means pairs (0,1), (2,3), ... with rates 0, 0.1, 0.2, 0, ...
  std::vector<PlantedPair> planted;

  std::vector<PlantedPair> resolved_pairs() const;
  void validate() const;
};

Dataset gen_multilabel_raw(const MultilabelTask& task);
TaskData gen_synthetic_multilabel(const MultilabelTask& task, double test_fraction = 0.2);

nlohmann::json to_json(const SyntheticTask& t);
nlohmann::json to_json(const MultilabelTask& t);
SyntheticTask synthetic_task_from_json(const nlohmann::json& j);
MultilabelTask multilabel_task_from_json(const nlohmann::json& j);

}  // namespace smle
