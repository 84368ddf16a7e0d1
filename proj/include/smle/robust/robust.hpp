#pragma once

#include <deque>
#include <functional>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <variant>

#include "json.hpp"
#include "smle/core/dataset.hpp"
#include "smle/model/smle_model.hpp"
#include "smle/model/trainer.hpp"
#include "smle/opt/problem.hpp"
#include "smle/property/property.hpp"

namespace smle {

/// A solver hit its node/pivot budget; the verdict is unknown.
class SolverLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The linear projection has no solution ({y : R y <= r − ε} is empty).
class ProjectionInfeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Counterexample {
  Vector z_bar;
  Vector x;  // witness input; diagnostics only
  double strength = 0.0;
};

/// Bounded FIFO; pushing onto a full queue evicts the oldest entry.
class CeQueue {
 public:
  explicit CeQueue(std::size_t capacity);

  void push(Counterexample ce);
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return items_.empty(); }
  const std::deque<Counterexample>& items() const { return items_; }

 private:
  std::size_t capacity_;
  std::deque<Counterexample> items_;
};

struct PdcgConfig {
  std::size_t n_it = 200;
  std::size_t n_xs = 1;
  /// Projection margin. The mutex grounding scales it by M.
  double eps = 0.0;
  /// Floor on the big-M constant; the value used is max(big_m, big_m_for(model)).
  double big_m = 1.0;
  /// A linear counterexample must have objective above this.
  double ce_tol = 1e-9;
  /// Slack on the mutex indicator link; a pair counts when min logit > −tau/2.
  double mutex_tau = 1e-7;
  opt::SolverOptions solver = default_solver_options();

  static opt::SolverOptions default_solver_options();
  void validate(bool mutex) const;
};

struct Verified {};
struct Inconclusive {
  Counterexample witness;
};
using VerifyOutcome = std::variant<Verified, Inconclusive>;

inline bool is_verified(const VerifyOutcome& v) { return std::holds_alternative<Verified>(v); }

void check_dims(const SmleModel& model, const PropertySpec& prop);

/// Enclosure of the clipped embedding over the input box: [min l, max(max l, max u)].
Box reachable_z_box(const SmleModel& model);

/// 2 · max_k sup |ŷ_k| over the input box and the degeneracy-corrected z̄ box.
double big_m_for(const SmleModel& model);

std::optional<Counterexample> gen_ce_linear(const SmleModel& model, const PolytopeProperty& prop,
                                            const PdcgConfig& cfg = {});
std::optional<Counterexample> gen_ce_mutex(const SmleModel& model, const MutexProperty& prop,
                                           const PdcgConfig& cfg = {});

VerifyOutcome verify(const SmleModel& model, const PropertySpec& prop, const PdcgConfig& cfg = {});

struct Projection {
  AffineMap g;
  double objective = 0.0;  // ‖θ' − θ‖²
  opt::Status status = opt::Status::Optimal;
};

/// min ‖θ' − θ‖² s.t. R(θ'₀ + θ'₁ z̄_i) <= r − eps for every queued z̄_i.
Projection project_linear(const AffineMap& g, const CeQueue& queue, const PolytopeProperty& prop, double eps,
                          const opt::SolverOptions& solver = {});
/// min ‖θ' − θ‖² s.t. no forbidden pair is predicted on any queued z̄_i, with
/// non-predicted logits pushed to <= −eps·M.
Projection project_mutex(const AffineMap& g, const CeQueue& queue, const MutexProperty& prop, double eps,
                         double big_m, const opt::SolverOptions& solver = {});

/// Smallest translation moving ŷ onto {R_k y <= r_k}: zero when already satisfied.
Vector closed_form_translation(std::span<const double> r_row, double r_k, std::span<const double> y_hat);

/// Sink for JSON-lines diagnostics.
class RunLog {
 public:
  explicit RunLog(std::ostream* os = nullptr, bool log_steps = false) : os_(os), log_steps_(log_steps) {}
  void write(const nlohmann::json& j);
  bool enabled() const { return os_ != nullptr; }
  bool log_steps() const { return log_steps_; }

 private:
  std::ostream* os_;
  bool log_steps_;
};

enum class PdcgStatus { Success, Failure };

struct PdcgResult {
  PdcgStatus status = PdcgStatus::Failure;
  std::size_t iterations = 0;
  std::string diagnostics;
};

/// Alternates counterexample search and re-projection of g over a FIFO of
/// counterexamples. Only g is modified.
PdcgResult pdcg(SmleModel& model, const PropertySpec& prop, const PdcgConfig& cfg, RunLog* log = nullptr,
                const std::string& phase = "full");

enum class Guarantee { Guaranteed, Unguaranteed };
std::string to_string(Guarantee g);

struct RobustTrainResult {
  Guarantee guarantee = Guarantee::Unguaranteed;
  TrainReport report;
  std::size_t step_failures = 0;
  PdcgResult final;
};

/// Gradient training with one pdcg iteration after every update, then a full pdcg.
RobustTrainResult robust_train(SmleModel& model, const Dataset& data, const TrainConfig& train_cfg,
                               const PropertySpec& prop, const PdcgConfig& pdcg_cfg, RunLog* log = nullptr);

}  // namespace smle
