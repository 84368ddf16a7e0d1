#pragma once

#include <optional>
#include <string>
#include <variant>

#include "json.hpp"
#include "smle/baselines/baselines.hpp"
#include "smle/bench/tasks.hpp"
#include "smle/model/presets.hpp"
#include "smle/model/trainer.hpp"
#include "smle/robust/robust.hpp"

namespace smle {

enum class Method { Smle, Preprocess, Postprocess, Oracle, Unconstrained };
std::string to_string(Method m);
Method method_from_string(const std::string& s);

using TaskSpec = std::variant<SyntheticTask, MultilabelTask>;

/// Where the property comes from. Generated properties are resolved against
/// the task's training split.
struct RandomPolytopeSource {
  std::uint64_t seed = 0;
};
struct MutexQuantileSource {
  double quantile = 0.0;
};
using PropertySource = std::variant<PropertySpec, RandomPolytopeSource, MutexQuantileSource>;

struct RunConfig {
  TaskSpec task = SyntheticTask{};
  PropertySource property = RandomPolytopeSource{};
  ArchSpec arch = ArchSpec::synthetic();
  TrainConfig train;
  PdcgConfig pdcg;
  std::uint64_t seed = 0;

  /// Table defaults for the task family: architecture, loss, batch, patience, PDCG memory.
  static RunConfig defaults_for(const TaskSpec& task);
  void validate() const;
};

nlohmann::json to_json(const RunConfig& c);
/// Keys not present fall back to defaults_for(task). "task" and "seed" are required.
RunConfig run_config_from_json(const nlohmann::json& j);

TaskData make_task_data(const TaskSpec& task);
PropertySpec resolve_property(const PropertySource& src, const TaskData& data);

struct RunOutcome {
  Metrics metrics;
  PropertySpec property;
  std::optional<SmleModel> smle_model;
  std::optional<Mlp> plain_model;
  std::optional<RobustTrainResult> robust;
};

/// Full pipeline for one method. Metrics are scored on the test split against
/// the unmodified labels.
RunOutcome run_experiment(const RunConfig& cfg, Method method, RunLog* log = nullptr);

/// Same, reusing already generated data and property. Inner errors are
/// rethrown with the method, task and property in the message.
RunOutcome run_experiment(const RunConfig& cfg, Method method, const TaskData& data, const PropertySpec& prop,
                          RunLog* log = nullptr);

/// Short file-safe labels, e.g. "synthetic-n2-k12-s1" and "polytope3".
std::string describe(const TaskSpec& task);
std::string describe(const PropertySource& src);

nlohmann::json to_json(const Metrics& m);

}  // namespace smle
