#include "smle/bench/suite.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "smle/model/serialize.hpp"

namespace smle {

std::vector<RankedProperty> rank_polytopes(const TaskData& data, std::size_t pool) {
  std::vector<RankedProperty> out;
  for (std::uint64_t s = 0; s < pool; ++s) {
    const PropertySpec prop = resolve_property(RandomPolytopeSource{s}, data);
    out.push_back({s, *oracle_eval(data.test, prop, MapConfig::for_property(prop)).r2});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const RankedProperty& a, const RankedProperty& b) { return a.oracle_r2 > b.oracle_r2; });
  return out;
}

namespace {

constexpr Method kMethods[] = {Method::Smle, Method::Preprocess, Method::Postprocess, Method::Oracle,
                               Method::Unconstrained};

void add_cells(std::vector<Cell>& cells, const RunConfig& cfg, std::size_t difficulty) {
  for (Method m : kMethods) {
    const std::string id = describe(cfg.task) + "_" + describe(cfg.property) + "_" + to_string(m);
    cells.push_back({id, cfg, m, difficulty});
  }
}

std::string quote(const std::string& s) {
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c == '\n' ? ' ' : c;
  }
  return q + "\"";
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(std::numeric_limits<double>::max_digits10);
  os << v;
  return os.str();
}

CellResult run_cell(const Cell& cell, const std::filesystem::path& out) {
  CellResult r{cell, std::nullopt, {}};
  std::ofstream log_file(out / "runs" / (cell.id + ".jsonl"));
  RunLog log(&log_file);
  try {
    RunOutcome o = run_experiment(cell.cfg, cell.method, &log);
    if (o.smle_model) save_model(*o.smle_model, out / "models" / (cell.id + ".smle"));
    r.metrics = o.metrics;
  } catch (const std::exception& e) {
    r.error = e.what();
    log.write({{"event", "error"}, {"message", r.error}});
  }
  return r;
}

}  // namespace

std::vector<Cell> synthetic_suite(const SuiteOptions& opt) {
  const std::vector<std::size_t> ns = opt.quick ? std::vector<std::size_t>{2, 4} : std::vector<std::size_t>{2, 4, 8};
  const std::vector<std::vector<int>> ks = opt.quick ? std::vector<std::vector<int>>{{1, 2}, {1, 2, 3, 4}}
                                                     : std::vector<std::vector<int>>{{1, 2}, {3, 4}, {1, 2, 3, 4}};
  const std::size_t pool = opt.quick ? std::min<std::size_t>(opt.pool, 6) : opt.pool;
  const std::size_t picks = std::min(pool, opt.quick ? std::min<std::size_t>(opt.picks, 3) : opt.picks);
  if (picks == 0) throw std::invalid_argument("synthetic_suite: pool and picks must be >= 1");

  std::vector<Cell> cells;
  for (std::size_t n : ns) {
    for (const auto& k : ks) {
      SyntheticTask task{n, k, 1000, opt.task_seed};
      RunConfig cfg = RunConfig::defaults_for(task);
      cfg.seed = opt.run_seed;
      const std::vector<RankedProperty> ranked = rank_polytopes(make_task_data(task), pool);
      for (std::size_t i = 0; i < picks; ++i) {
        cfg.property = RandomPolytopeSource{ranked[i].seed};
        add_cells(cells, cfg, i);
      }
    }
  }
  return cells;
}

std::vector<Cell> mutex_suite(const SuiteOptions& opt) {
  const std::vector<double> qs = opt.quick ? std::vector<double>{0.0, 0.3} : std::vector<double>{0.0, 0.3, 0.6};
  std::vector<Cell> cells;
  for (std::size_t m : {6, 8}) {
    MultilabelTask task;
    task.m = m;
    task.seed = opt.task_seed;
    RunConfig cfg = RunConfig::defaults_for(task);
    cfg.seed = opt.run_seed;
    for (std::size_t i = 0; i < qs.size(); ++i) {
      cfg.property = MutexQuantileSource{qs[i]};
      add_cells(cells, cfg, i);
    }
  }
  return cells;
}

std::string csv_header() {
  return "schema,cell,task,property,difficulty,method,seed,r2,avg_acc,violation_rate,wall_time,guarantee,error";
}

std::string csv_row(const CellResult& r) {
  std::ostringstream os;
  os << kMetricsSchema << ',' << r.cell.id << ',' << describe(r.cell.cfg.task) << ',' << describe(r.cell.cfg.property)
     << ',' << r.cell.difficulty << ',' << to_string(r.cell.method) << ',' << r.cell.cfg.seed << ',';
  if (r.metrics) {
    const Metrics& m = *r.metrics;
    os << (m.r2 ? num(*m.r2) : "") << ',' << (m.avg_acc ? num(*m.avg_acc) : "") << ',' << num(m.violation_rate) << ','
       << num(m.wall_time) << ',' << to_string(m.guarantee) << ',';
  } else {
    os << ",,,,,";
  }
  os << quote(r.error);
  return os.str();
}

std::vector<CellResult> run_suite(const std::vector<Cell>& cells, const std::filesystem::path& out, std::size_t jobs) {
  if (jobs == 0) throw std::invalid_argument("run_suite: jobs must be >= 1");
  std::filesystem::create_directories(out / "runs");
  std::filesystem::create_directories(out / "models");
  std::ofstream csv(out / "metrics.csv");
  if (!csv) throw std::runtime_error("run_suite: cannot write " + (out / "metrics.csv").string());
  csv << csv_header() << '\n' << std::flush;

  std::vector<std::optional<CellResult>> slots(cells.size());
  std::mutex mu;
  std::condition_variable cv;
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      CellResult r = run_cell(cells[i], out);
      {
        std::lock_guard lock(mu);
        slots[i] = std::move(r);
      }
      cv.notify_one();
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < std::min(jobs, std::max<std::size_t>(cells.size(), 1)); ++t) pool.emplace_back(worker);

  // Rows go out in cell order as soon as the prefix is complete.
  std::vector<CellResult> results;
  for (std::size_t written = 0; written < cells.size(); ++written) {
    std::unique_lock lock(mu);
    cv.wait(lock, [&] { return slots[written].has_value(); });
    results.push_back(std::move(*slots[written]));
    lock.unlock();
    csv << csv_row(results.back()) << '\n' << std::flush;
  }
  for (auto& t : pool) t.join();
  return results;
}

int suite_exit_code(const std::vector<CellResult>& results) {
  for (const auto& r : results) {
    if (!r.error.empty() || !r.metrics) return 1;
    if (r.cell.method == Method::Smle && r.metrics->guarantee != GuaranteeTag::Guaranteed) return 1;
  }
  return 0;
}

}  // namespace smle
