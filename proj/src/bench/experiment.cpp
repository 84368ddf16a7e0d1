#include "smle/bench/experiment.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace smle {

std::string to_string(Method m) {
  switch (m) {
    case Method::Smle: return "smle";
    case Method::Preprocess: return "preprocess";
    case Method::Postprocess: return "postprocess";
    case Method::Oracle: return "oracle";
    case Method::Unconstrained: return "unconstrained";
  }
  return "smle";
}

Method method_from_string(const std::string& s) {
  for (Method m : {Method::Smle, Method::Preprocess, Method::Postprocess, Method::Oracle, Method::Unconstrained})
    if (to_string(m) == s) return m;
  throw std::invalid_argument("unknown method '" + s + "'");
}

namespace {

bool is_multilabel(const TaskSpec& t) { return std::holds_alternative<MultilabelTask>(t); }

nlohmann::json task_json(const TaskSpec& t) {
  return std::visit([](const auto& v) { return to_json(v); }, t);
}

TaskSpec task_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind");
  if (kind == "synthetic") return synthetic_task_from_json(j);
  if (kind == "multilabel") return multilabel_task_from_json(j);
  throw std::invalid_argument("unknown task kind '" + kind + "'");
}

nlohmann::json source_json(const PropertySource& s) {
  if (const auto* r = std::get_if<RandomPolytopeSource>(&s)) return {{"kind", "random_polytope"}, {"seed", r->seed}};
  if (const auto* q = std::get_if<MutexQuantileSource>(&s)) return {{"kind", "mutex_quantile"}, {"quantile", q->quantile}};
  return to_json(std::get<PropertySpec>(s));
}

PropertySource source_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind");
  if (kind == "random_polytope") return RandomPolytopeSource{j.at("seed").get<std::uint64_t>()};
  if (kind == "mutex_quantile") return MutexQuantileSource{j.at("quantile").get<double>()};
  return property_from_json(j);
}

Loss loss_from_string(const std::string& s) {
  if (s == "mse") return Loss::Mse;
  if (s == "bce") return Loss::Bce;
  throw std::invalid_argument("unknown loss '" + s + "'");
}

}  // namespace

RunConfig RunConfig::defaults_for(const TaskSpec& task) {
  RunConfig c;
  c.task = task;
  if (is_multilabel(task)) {
    c.property = MutexQuantileSource{0.0};
    c.arch = ArchSpec::classification();
    c.train.loss = Loss::Bce;
    c.train.batch_size = 32;
    c.train.patience = 30;
    c.pdcg.n_xs = 10;
    c.pdcg.eps = 1e-4;
  } else {
    c.arch = ArchSpec::synthetic();
    c.train.loss = Loss::Mse;
    c.train.batch_size = 128;
    c.train.patience = 5;
    c.pdcg.n_xs = 1;
    c.pdcg.eps = 0.0;
  }
  return c;
}

void RunConfig::validate() const {
  std::visit([](const auto& t) { t.validate(); }, task);
  train.validate();
  const bool mutex = is_multilabel(task);
  pdcg.validate(mutex);
  if (const auto* p = std::get_if<PropertySpec>(&property)) {
    if (mutex != std::holds_alternative<MutexProperty>(*p))
      throw std::invalid_argument("RunConfig: property kind does not match the task");
  } else if (mutex != std::holds_alternative<MutexQuantileSource>(property)) {
    throw std::invalid_argument("RunConfig: property source does not match the task");
  }
}

nlohmann::json to_json(const RunConfig& c) {
  return {{"task", task_json(c.task)},
          {"property", source_json(c.property)},
          {"arch", {{"backbone", c.arch.backbone}, {"aux", c.arch.aux}}},
          {"train",
           {{"val_split", c.train.val_split},
            {"optimizer", to_string(c.train.optimizer)},
            {"lr", c.train.lr},
            {"loss", c.train.loss == Loss::Mse ? "mse" : "bce"},
            {"batch_size", c.train.batch_size},
            {"max_epochs", c.train.max_epochs},
            {"patience", c.train.patience}}},
          {"pdcg", {{"n_it", c.pdcg.n_it}, {"n_xs", c.pdcg.n_xs}, {"eps", c.pdcg.eps}, {"big_m", c.pdcg.big_m}}},
          {"seed", c.seed}};
}

RunConfig run_config_from_json(const nlohmann::json& j) {
  RunConfig c = RunConfig::defaults_for(task_from_json(j.at("task")));
  c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("property")) c.property = source_from_json(j.at("property"));
  if (j.contains("arch")) {
    c.arch.backbone = j.at("arch").value("backbone", c.arch.backbone);
    c.arch.aux = j.at("arch").value("aux", c.arch.aux);
  }
  if (j.contains("train")) {
    const auto& t = j.at("train");
    c.train.val_split = t.value("val_split", c.train.val_split);
    if (t.contains("optimizer")) c.train.optimizer = optimizer_from_string(t.at("optimizer"));
    c.train.lr = t.value("lr", c.train.lr);
    if (t.contains("loss")) c.train.loss = loss_from_string(t.at("loss"));
    c.train.batch_size = t.value("batch_size", c.train.batch_size);
    c.train.max_epochs = t.value("max_epochs", c.train.max_epochs);
    c.train.patience = t.value("patience", c.train.patience);
  }
  if (j.contains("pdcg")) {
    const auto& p = j.at("pdcg");
    c.pdcg.n_it = p.value("n_it", c.pdcg.n_it);
    c.pdcg.n_xs = p.value("n_xs", c.pdcg.n_xs);
    c.pdcg.eps = p.value("eps", c.pdcg.eps);
    c.pdcg.big_m = p.value("big_m", c.pdcg.big_m);
  }
  c.validate();
  return c;
}

TaskData make_task_data(const TaskSpec& task) {
  if (const auto* s = std::get_if<SyntheticTask>(&task)) return gen_synthetic(*s);
  return gen_synthetic_multilabel(std::get<MultilabelTask>(task));
}

PropertySpec resolve_property(const PropertySource& src, const TaskData& data) {
  if (const auto* p = std::get_if<PropertySpec>(&src)) return *p;
  if (const auto* r = std::get_if<RandomPolytopeSource>(&src)) {
    Rng rng(r->seed);
    return gen_random_polytope(data.train.input_dim(), data.train.output_dim(), rng);
  }
  return gen_mutex_property(data.train.y, std::get<MutexQuantileSource>(src).quantile);
}

RunOutcome run_experiment(const RunConfig& cfg, Method method, RunLog* log) {
  cfg.validate();
  const TaskData data = make_task_data(cfg.task);
  return run_experiment(cfg, method, data, resolve_property(cfg.property, data), log);
}

namespace {

RunOutcome run_unchecked(const RunConfig& cfg, Method method, const TaskData& data, const PropertySpec& prop,
                         RunLog* log) {
  const auto t0 = std::chrono::steady_clock::now();
  const bool mutex = std::holds_alternative<MutexProperty>(prop);
  const MapConfig map_cfg = MapConfig::for_property(prop);
  const Box box(data.train.input_dim(), Interval(-1.0, 1.0));
  TrainConfig tc = cfg.train;
  tc.seed = cfg.seed;
  Rng rng(cfg.seed);

  RunOutcome out{{}, prop, std::nullopt, std::nullopt, std::nullopt};
  Matrix outputs;  // regression values, or {0,1} labels for mutex
  bool outputs_are_labels = false;

  switch (method) {
    case Method::Oracle: {
      out.metrics = oracle_eval(data.test, prop, map_cfg);
      break;
    }
    case Method::Smle: {
      SmleModel model = build_smle(cfg.arch, box, data.train.output_dim(), rng);
      init_aux_from_data(model, data.train.x);
      const Dataset enforced = preprocess_labels(data.train, prop, map_cfg);
      RobustTrainResult r = robust_train(model, enforced, tc, prop, cfg.pdcg, log);
      out.metrics.guarantee =
          r.guarantee == Guarantee::Guaranteed ? GuaranteeTag::Guaranteed : GuaranteeTag::Unguaranteed;
      outputs = predict(model, data.test.x);
      out.smle_model = std::move(model);
      out.robust = std::move(r);
      break;
    }
    case Method::Preprocess:
    case Method::Postprocess:
    case Method::Unconstrained: {
      Mlp net = build_plain(cfg.arch, data.train.input_dim(), data.train.output_dim(), rng);
      const Dataset train = method == Method::Preprocess ? preprocess_labels(data.train, prop, map_cfg) : data.train;
      const TrainReport report = fit(net, train, tc);
      if (log && log->enabled())
        log->write({{"event", "fit"}, {"method", to_string(method)}, {"epochs", report.epochs}, {"steps", report.steps}});
      outputs = predict(net, data.test.x);
      if (method == Method::Postprocess) {
        outputs = postprocess_outputs(outputs, data.test.x, prop, map_cfg);
        outputs_are_labels = mutex;
      }
      out.plain_model = std::move(net);
      break;
    }
  }

  if (method != Method::Oracle) {
    if (mutex) {
      const Matrix labels = outputs_are_labels ? outputs : threshold_logits(outputs);
      out.metrics.avg_acc = avg_acc(labels, data.test.y);
      out.metrics.violation_rate = violation_rate(labels, data.test.x, prop, true);
    } else {
      out.metrics.r2 = r2(outputs, data.test.y);
      out.metrics.violation_rate = violation_rate(outputs, data.test.x, prop);
    }
  }
  out.metrics.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out.metrics.validate();
  if (log && log->enabled()) {
    nlohmann::json m = to_json(out.metrics);
    m["event"] = "metrics";
    m["method"] = to_string(method);
    log->write(m);
  }
  return out;
}

}  // namespace

RunOutcome run_experiment(const RunConfig& cfg, Method method, const TaskData& data, const PropertySpec& prop,
                          RunLog* log) {
  cfg.validate();
  try {
    return run_unchecked(cfg, method, data, prop, log);
  } catch (const std::exception& e) {
    throw std::runtime_error(to_string(method) + " on " + describe(cfg.task) + " / " + describe(cfg.property) + ": " +
                             e.what());
  }
}

std::string describe(const TaskSpec& task) {
  if (const auto* s = std::get_if<SyntheticTask>(&task)) {
    std::string k;
    for (int v : s->K) k += std::to_string(v);
    return "synthetic-n" + std::to_string(s->n) + "-k" + k + "-s" + std::to_string(s->seed);
  }
  const auto& m = std::get<MultilabelTask>(task);
  return "multilabel-m" + std::to_string(m.m) + "-n" + std::to_string(m.n) + "-s" + std::to_string(m.seed);
}

std::string describe(const PropertySource& src) {
  if (const auto* r = std::get_if<RandomPolytopeSource>(&src)) return "polytope" + std::to_string(r->seed);
  if (const auto* q = std::get_if<MutexQuantileSource>(&src)) {
    const int pct = static_cast<int>(std::lround(q->quantile * 100.0));
    return "mutex-q" + std::to_string(pct);
  }
  return std::holds_alternative<PolytopeProperty>(std::get<PropertySpec>(src)) ? "inline-polytope" : "inline-mutex";
}

nlohmann::json to_json(const Metrics& m) {
  nlohmann::json j{{"violation_rate", m.violation_rate}, {"wall_time", m.wall_time}, {"guarantee", to_string(m.guarantee)}};
  if (m.r2) j["r2"] = *m.r2;
  if (m.avg_acc) j["avg_acc"] = *m.avg_acc;
  return j;
}

}  // namespace smle
