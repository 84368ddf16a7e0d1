#pragma once

#include <stdexcept>

#include "smle/baselines/metrics.hpp"
#include "smle/core/dataset.hpp"
#include "smle/model/smle_model.hpp"
#include "smle/opt/problem.hpp"
#include "smle/property/property.hpp"

namespace smle {

/// {y : R y <= r} is empty.
class MapInfeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Likelihood { GaussianMse, CategoricalBce };

struct MapConfig {
  Likelihood likelihood = Likelihood::GaussianMse;
  double clip_eps = 1e-6;

  void validate() const;
  static MapConfig for_property(const PropertySpec& prop);
};

/// Euclidean projection of y onto {y' : R y' <= r}.
Vector map_regression(std::span<const double> y, const PolytopeProperty& prop, const opt::SolverOptions& solver = {});

/// Most likely binary label vector without a forbidden pair. Ties go to the
/// lexicographically smallest vector.
Vector map_classification(std::span<const double> y_prob, const MutexProperty& prop, double clip_eps = 1e-6);

/// MAP on every target row. Polytope rows are only touched when Q x <= q.
Dataset preprocess_labels(const Dataset& data, const PropertySpec& prop, const MapConfig& cfg);

/// MAP on raw model outputs. For mutex properties the outputs are logits and
/// the result is a {0,1} label matrix.
Matrix postprocess_outputs(const Matrix& raw, const Matrix& x, const PropertySpec& prop, const MapConfig& cfg);
Matrix postprocess_predict(const Mlp& model, const Matrix& x, const PropertySpec& prop, const MapConfig& cfg);

/// Scores MAP(y_true) against y_true.
Metrics oracle_eval(const Dataset& data, const PropertySpec& prop, const MapConfig& cfg);

}  // namespace smle
