#include "sp/sweep.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "sp/io.hpp"

namespace sp {

namespace {

namespace fs = std::filesystem;

// checkpoint file: one JSON object per line, {"index":k,"values":[...]} or
// {"index":k,"failed":true,"error":...}
void load_checkpoint(const std::string& path, std::vector<SweepResult>& results) {
  std::ifstream in(path);
  if (!in) return;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("index")) continue;  // torn tail line
    const int idx = j["index"].get<int>();
    if (idx < 0 || idx >= static_cast<int>(results.size())) continue;
    SweepResult& r = results[idx];
    if (r.completed) continue;
    r.index = idx;
    r.completed = true;
    if (j.value("failed", false)) {
      r.failed = true;
      r.error = j.value("error", "");
    } else if (j.contains("values")) {
      r.values = j["values"].get<std::vector<double>>();
    }
  }
}

std::string result_line(const SweepResult& r) {
  nlohmann::json j;
  j["index"] = r.index;
  if (r.failed) {
    j["failed"] = true;
    j["error"] = r.error;
  } else {
    j["values"] = r.values;
  }
  return j.dump() + "\n";
}

}  // namespace

std::vector<SweepResult> run_sweep(const std::vector<SweepPoint>& points,
                                   const SweepWorker& worker, const SweepOptions& opt) {
  const int n = static_cast<int>(points.size());
  std::vector<SweepResult> results(n);
  for (int k = 0; k < n; ++k) results[k].index = points[k].index;

  if (!opt.checkpoint_path.empty()) load_checkpoint(opt.checkpoint_path, results);

  // pending work, in index order
  std::vector<int> pending;
  for (int k = 0; k < n; ++k)
    if (!results[k].completed) pending.push_back(k);

  const int budget = opt.max_points_this_run >= 0
                         ? std::min<int>(opt.max_points_this_run, pending.size())
                         : static_cast<int>(pending.size());

  std::atomic<int> cursor{0};
  std::mutex write_mutex;  // serializes all checkpoint writes
  std::ofstream ckpt;
  if (!opt.checkpoint_path.empty()) {
    fs::path p(opt.checkpoint_path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    ckpt.open(opt.checkpoint_path, std::ios::app);
  }
  auto last_flush = std::chrono::steady_clock::now();

  auto work = [&]() {
    std::ostringstream local;  // lines buffered until the flush window closes
    while (true) {
      const int slot = cursor.fetch_add(1);
      if (slot >= budget) break;
      const int k = pending[slot];
      SweepResult& r = results[k];
      try {
        r.values = worker(points[k]);
      } catch (const std::exception& e) {
        r.failed = true;
        r.error = e.what();
      }
      r.completed = true;
      if (ckpt.is_open()) {
        std::lock_guard<std::mutex> lock(write_mutex);
        local << result_line(r);
        const auto now = std::chrono::steady_clock::now();
        const double since = std::chrono::duration<double>(now - last_flush).count();
        if (since >= opt.checkpoint_interval_s) {
          ckpt << local.str();
          ckpt.flush();
          local.str("");
          last_flush = now;
        }
      }
    }
    if (ckpt.is_open()) {
      std::lock_guard<std::mutex> lock(write_mutex);
      ckpt << local.str();
      ckpt.flush();
    }
  };

  const int workers = std::max(1, opt.parallelism);
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  return results;
}

std::string sweep_results_to_csv(const std::vector<std::string>& param_names,
                                 const std::vector<std::string>& value_names,
                                 const std::vector<SweepPoint>& points,
                                 const std::vector<SweepResult>& results) {
  std::ostringstream out;
  for (size_t c = 0; c < param_names.size(); ++c) out << (c ? "," : "") << param_names[c];
  for (const auto& v : value_names) out << "," << v;
  out << "\n";
  char buf[64];
  // points are emitted in index order regardless of completion order
  std::vector<size_t> order(points.size());
  for (size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return points[a].index < points[b].index; });
  for (size_t k : order) {
    bool first = true;
    for (double p : points[k].params) {
      std::snprintf(buf, sizeof buf, "%.12g", p);
      out << (first ? "" : ",") << buf;
      first = false;
    }
    const SweepResult& r = results[k];
    if (r.failed) {
      for (size_t c = 0; c < value_names.size(); ++c) out << ",error";
    } else {
      for (double v : r.values) {
        std::snprintf(buf, sizeof buf, "%.12g", v);
        out << "," << buf;
      }
    }
    out << "\n";
  }
  return out.str();
}

int thread_count_from_env(int fallback) {
  const char* env = std::getenv("SINGLET_PUMP_THREADS");
  if (!env || !*env) return fallback;
  const int v = std::atoi(env);
  return v > 0 ? v : fallback;
}

}  // namespace sp
