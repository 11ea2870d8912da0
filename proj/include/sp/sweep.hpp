#pragma once

// Checkpointed parallel sweep runner: a fixed worker pool over an immutable
// point list, results stored by index so output is independent of scheduling.

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace sp {

struct SweepPoint {
  int index = 0;
  std::vector<double> params;
};

struct SweepResult {
  int index = 0;
  std::vector<double> values;
  bool failed = false;
  std::string error;
  bool completed = false;  // false when the run stopped before reaching it
};

struct SweepOptions {
  int parallelism = 1;
  std::string checkpoint_path;         // empty disables checkpointing/resume
  double checkpoint_interval_s = 30;   // flush cadence for partial results
  int max_points_this_run = -1;        // stop after N completions (staged runs)
};

using SweepWorker = std::function<std::vector<double>(const SweepPoint&)>;

// Runs worker over every point. With a checkpoint path, previously completed
// points are loaded and skipped, and progress is persisted so an interrupted
// sweep resumes without recomputation. Worker failures are recorded per point
// and do not stop the sweep.
std::vector<SweepResult> run_sweep(const std::vector<SweepPoint>& points,
                                   const SweepWorker& worker, const SweepOptions& opt = {});

// Deterministic CSV of the results, ordered by point index.
std::string sweep_results_to_csv(const std::vector<std::string>& param_names,
                                 const std::vector<std::string>& value_names,
                                 const std::vector<SweepPoint>& points,
                                 const std::vector<SweepResult>& results);

int thread_count_from_env(int fallback);  // SINGLET_PUMP_THREADS override

}  // namespace sp
