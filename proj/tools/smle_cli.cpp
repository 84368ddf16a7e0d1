#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "smle/bench/suite.hpp"
#include "smle/model/serialize.hpp"

using namespace smle;

namespace {

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config " + path);
  return run_config_from_json(nlohmann::json::parse(in));
}

std::unique_ptr<std::ofstream> open_log(const std::string& path) {
  if (path.empty()) return nullptr;
  auto f = std::make_unique<std::ofstream>(path);
  if (!*f) throw std::runtime_error("cannot write log " + path);
  return f;
}

int cmd_train(const std::string& config, const std::string& out, const std::string& property_out,
              const std::string& log_path) {
  const RunConfig cfg = load_config(config);
  auto log_file = open_log(log_path);
  RunLog log(log_file.get());
  RunOutcome o = run_experiment(cfg, Method::Smle, &log);
  save_model(*o.smle_model, out);
  if (!property_out.empty()) save_property(o.property, property_out);
  std::cout << to_json(o.metrics).dump() << '\n';
  return o.metrics.guarantee == GuaranteeTag::Guaranteed ? 0 : 1;
}

int cmd_verify(const std::string& model_path, const std::string& property_path) {
  const SmleModel model = load_model(model_path);
  const PropertySpec prop = load_property(property_path);
  const VerifyOutcome v = verify(model, prop);
  if (is_verified(v)) {
    std::cout << nlohmann::json{{"verdict", "verified"}}.dump() << '\n';
    return 0;
  }
  const Counterexample& w = std::get<Inconclusive>(v).witness;
  std::cout << nlohmann::json{{"verdict", "inconclusive"}, {"strength", w.strength}, {"x", w.x}, {"z_bar", w.z_bar}}
                   .dump()
            << '\n';
  return 1;
}

int cmd_benchmark(const std::string& suite, const std::string& out, std::size_t jobs, SuiteOptions opt) {
  const std::vector<Cell> cells = suite == "synthetic" ? synthetic_suite(opt) : mutex_suite(opt);
  std::cerr << cells.size() << " cells\n";
  const std::vector<CellResult> results = run_suite(cells, out, jobs);
  for (const auto& r : results)
    if (!r.error.empty()) std::cerr << r.cell.id << ": " << r.error << '\n';
  return suite_exit_code(results);
}

int cmd_baseline(const std::string& method, const std::string& config, const std::string& log_path) {
  const Method m = method_from_string(method);
  if (m == Method::Smle) throw std::invalid_argument("baseline: use 'train' for smle");
  const RunConfig cfg = load_config(config);
  auto log_file = open_log(log_path);
  RunLog log(log_file.get());
  const RunOutcome o = run_experiment(cfg, m, &log);
  std::cout << to_json(o.metrics).dump() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Safe ML via embedded overapproximation"};
  app.require_subcommand(1);

  std::string config, out, property_out, log_path, model, property, suite = "synthetic", method;
  std::size_t jobs = 1;
  SuiteOptions suite_opt;

  auto* train = app.add_subcommand("train", "Robust-train an SMLE model");
  train->add_option("--config", config, "RunConfig JSON")->required()->check(CLI::ExistingFile);
  train->add_option("--out", out, "Model output path")->required();
  train->add_option("--property-out", property_out, "Write the resolved property as JSON");
  train->add_option("--log", log_path, "JSON-lines run log");

  auto* ver = app.add_subcommand("verify", "Verify a model against a property");
  ver->add_option("--model", model)->required()->check(CLI::ExistingFile);
  ver->add_option("--property", property)->required()->check(CLI::ExistingFile);

  auto* bench = app.add_subcommand("benchmark", "Run a benchmark suite");
  bench->add_option("--suite", suite)->check(CLI::IsMember({"synthetic", "mutex"}));
  bench->add_option("--out", out)->required();
  bench->add_option("--jobs", jobs)->check(CLI::PositiveNumber);
  bench->add_flag("--quick", suite_opt.quick, "Reduced grid");
  bench->add_option("--pool", suite_opt.pool, "Random properties generated per synthetic task")->check(CLI::PositiveNumber);
  bench->add_option("--picks", suite_opt.picks, "Easiest properties run per synthetic task")->check(CLI::PositiveNumber);
  bench->add_option("--task-seed", suite_opt.task_seed);
  bench->add_option("--run-seed", suite_opt.run_seed);

  auto* base = app.add_subcommand("baseline", "Run a baseline method");
  base->add_option("--method", method)
      ->required()
      ->check(CLI::IsMember({"preprocess", "postprocess", "oracle", "unconstrained"}));
  base->add_option("--config", config)->required()->check(CLI::ExistingFile);
  base->add_option("--log", log_path, "JSON-lines run log");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*train) return cmd_train(config, out, property_out, log_path);
    if (*ver) return cmd_verify(model, property);
    if (*bench) return cmd_benchmark(suite, out, jobs, suite_opt);
    return cmd_baseline(method, config, log_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
