#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "smle/bench/experiment.hpp"

namespace smle {

/// Bumped whenever the column set or order changes.
inline constexpr const char* kMetricsSchema = "smle-metrics/1";

struct Cell {
  std::string id;  // file-safe, unique within a suite
  RunConfig cfg;
  Method method = Method::Smle;
  /// Position of the property in the pool ordered by decreasing oracle score.
  std::size_t difficulty = 0;
};

struct CellResult {
  Cell cell;
  std::optional<Metrics> metrics;
  std::string error;
};

struct RankedProperty {
  std::uint64_t seed = 0;
  double oracle_r2 = 0.0;
};

/// Random polytope seeds 0..pool-1 sorted by decreasing oracle R² on the test split.
std::vector<RankedProperty> rank_polytopes(const TaskData& data, std::size_t pool);

struct SuiteOptions {
  bool quick = false;
  std::uint64_t task_seed = 1;
  std::uint64_t run_seed = 7;
  /// Random polytopes generated per task, and how many of the easiest are run.
  std::size_t pool = 12;
  std::size_t picks = 6;
};

/// n ∈ {2,4,8} × K ∈ {{1,2},{3,4},{1,2,3,4}}. Quick: n ∈ {2,4},
/// K ∈ {{1,2},{1,2,3,4}}, at most three properties from a pool of at most six.
std::vector<Cell> synthetic_suite(const SuiteOptions& opt = {});
/// m ∈ {6,8} × q ∈ {0.0,0.3,0.6}; quick drops q = 0.6.
std::vector<Cell> mutex_suite(const SuiteOptions& opt = {});

std::string csv_header();
std::string csv_row(const CellResult& r);

/// Runs every cell on `jobs` worker threads. Writes out/metrics.csv in cell
/// order, out/runs/<id>.jsonl and out/models/<id>.smle for smle cells.
std::vector<CellResult> run_suite(const std::vector<Cell>& cells, const std::filesystem::path& out,
                                  std::size_t jobs = 1);

/// 0 when no cell failed and every smle cell is guaranteed, 1 otherwise.
int suite_exit_code(const std::vector<CellResult>& results);

}  // namespace smle
