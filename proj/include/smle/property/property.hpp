#pragma once

#include <filesystem>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"
#include "smle/core/interval.hpp"
#include "smle/core/rng.hpp"

namespace smle {

/// Predicate slack, deliberately tighter than the solver tolerance.
inline constexpr double kPredicateTol = 1e-9;

/// Q(x): Q x <= q.  R(y): R y <= r.
struct PolytopeProperty {
  Matrix Q;
  Vector q;
  Matrix R;
  Vector r;

  std::size_t input_dim() const { return Q.cols(); }
  std::size_t output_dim() const { return R.cols(); }
  void validate() const;
};

/// No forbidden pair of classes may both be predicted (logit >= 0).
struct MutexProperty {
  std::size_t num_classes = 0;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;

  /// Normalizes pair order and validates.
  MutexProperty(std::size_t classes, std::vector<std::pair<std::size_t, std::size_t>> forbidden);
  void validate() const;
};

using PropertySpec = std::variant<PolytopeProperty, MutexProperty>;

bool holds_q(const PolytopeProperty& p, std::span<const double> x, double tol = kPredicateTol);
bool holds_r(const PolytopeProperty& p, std::span<const double> y, double tol = kPredicateTol);
/// Σ_k max(0, R_k y − r_k).
double violation(const PolytopeProperty& p, std::span<const double> y);
bool mutex_holds(const MutexProperty& p, std::span<const double> logits);

/// ceil(log2 n) + 2.
std::size_t polytope_rows(std::size_t n);

/// Q and R with polytope_rows rows, every coefficient uniform in [−1, 1].
/// Resamples until Q meets the input box and R is nonempty (both by LP).
PolytopeProperty gen_random_polytope(std::size_t n, std::size_t m, Rng& rng, const Box& input_box,
                                     std::size_t max_tries = 1000);
PolytopeProperty gen_random_polytope(std::size_t n, std::size_t m, Rng& rng);

/// Co-occurrence frequency of every class pair (h < k), row-major over pairs.
std::vector<double> pair_frequencies(const Matrix& labels);
/// Forbids every pair whose co-occurrence frequency is <= the q-quantile of all pair frequencies.
MutexProperty gen_mutex_property(const Matrix& labels, double quantile);

nlohmann::json to_json(const PropertySpec& p);
PropertySpec property_from_json(const nlohmann::json& j);
void save_property(const PropertySpec& p, const std::filesystem::path& path);
PropertySpec load_property(const std::filesystem::path& path);

}  // namespace smle
