#include <algorithm>

#include "smle/robust/robust.hpp"

namespace smle {

void RunLog::write(const nlohmann::json& j) {
  if (os_) *os_ << j.dump() << '\n';
}

std::string to_string(Guarantee g) { return g == Guarantee::Guaranteed ? "guaranteed" : "unguaranteed"; }

PdcgResult pdcg(SmleModel& model, const PropertySpec& prop, const PdcgConfig& cfg, RunLog* log,
                const std::string& phase) {
  const auto* linear = std::get_if<PolytopeProperty>(&prop);
  cfg.validate(linear == nullptr);
  check_dims(model, prop);
  const bool logging = log && log->enabled() && (phase != "step" || log->log_steps());

  CeQueue queue(cfg.n_xs);
  PdcgResult result;
  for (std::size_t it = 1; it <= cfg.n_it; ++it) {
    result.iterations = it;
    nlohmann::json entry{{"event", "pdcg"}, {"phase", phase}, {"iteration", it}};
    try {
      const std::optional<Counterexample> ce =
          linear ? gen_ce_linear(model, *linear, cfg) : gen_ce_mutex(model, std::get<MutexProperty>(prop), cfg);
      if (!ce) {
        if (logging) {
          entry["strength"] = nullptr;
          entry["queue_size"] = queue.size();
          entry["status"] = "verified";
          log->write(entry);
        }
        result.status = PdcgStatus::Success;
        return result;
      }
      queue.push(*ce);
      const Projection pr =
          linear ? project_linear(model.g, queue, *linear, cfg.eps, cfg.solver)
                 : project_mutex(model.g, queue, std::get<MutexProperty>(prop), cfg.eps,
                                 std::max(cfg.big_m, big_m_for(model)), cfg.solver);
      if (logging) {
        entry["strength"] = ce->strength;
        entry["queue_size"] = queue.size();
        entry["projection_objective"] = pr.objective;
        entry["status"] = opt::to_string(pr.status);
        entry["x"] = ce->x;
        log->write(entry);
      }
      if (pr.status != opt::Status::Optimal) {
        result.diagnostics = "projection ended with status " + opt::to_string(pr.status) + " at iteration " +
                             std::to_string(it);
        return result;
      }
      model.g = pr.g;
    } catch (const SolverLimitError& e) {
      result.diagnostics = e.what();
      if (logging) {
        entry["status"] = "solver_limit";
        log->write(entry);
      }
      return result;
    }
  }
  result.diagnostics = "iteration cap reached";
  return result;
}

RobustTrainResult robust_train(SmleModel& model, const Dataset& data, const TrainConfig& train_cfg,
                               const PropertySpec& prop, const PdcgConfig& pdcg_cfg, RunLog* log) {
  check_dims(model, prop);
  pdcg_cfg.validate(std::holds_alternative<MutexProperty>(prop));
  RobustTrainResult out;
  PdcgConfig step_cfg = pdcg_cfg;
  step_cfg.n_it = 1;
  const StepHook hook = [&](std::size_t) {
    if (pdcg(model, prop, step_cfg, log, "step").status == PdcgStatus::Failure) ++out.step_failures;
  };
  out.report = fit(model, data, train_cfg, hook);
  out.final = pdcg(model, prop, pdcg_cfg, log, "full");
  out.guarantee = out.final.status == PdcgStatus::Success ? Guarantee::Guaranteed : Guarantee::Unguaranteed;
  if (log && log->enabled())
    log->write({{"event", "robust_train"},
                {"guarantee", to_string(out.guarantee)},
                {"epochs", out.report.epochs},
                {"steps", out.report.steps},
                {"step_failures", out.step_failures},
                {"final_iterations", out.final.iterations},
                {"diagnostics", out.final.diagnostics}});
  return out;
}

}  // namespace smle
