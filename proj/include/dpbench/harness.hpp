// Copyright 2026 the dpbench authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"

#include "dpbench/accountant.hpp"
#include "dpbench/dataset.hpp"
#include "dpbench/dpml.hpp"
#include "dpbench/queries.hpp"
#include "dpbench/random.hpp"

namespace dpbench {

inline const std::vector<double>& default_epsilon_grid() {
  static const std::vector<double> grid = {0.1, 0.25, 0.5, 0.75, 1.0,
                                           1.25, 1.5, 1.75, 2.0, 2.25,
                                           2.5, 2.75, 3.0};
  return grid;
}

// ---------------------------------------------------------------------------
// Probes

/// Resident set size of this process, or nullopt where /proc is missing.
inline std::optional<std::size_t> resident_bytes() {
  std::ifstream in("/proc/self/status");
  if (!in) return std::nullopt;
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("VmRSS:", 0) == 0) {
      std::istringstream ss(line.substr(6));
      std::size_t kb = 0;
      ss >> kb;
      return kb * 1024;
    }
  }
  return std::nullopt;
}

/// Runs the critical section under a monotonic clock; setup and teardown
/// stay outside the caller's lambda.
template <typename F>
auto timed_run(F&& critical_section)
    -> std::pair<decltype(critical_section()), std::int64_t> {
  const auto start = std::chrono::steady_clock::now();
  auto output = critical_section();
  const auto stop = std::chrono::steady_clock::now();
  return {std::move(output),
          std::chrono::duration_cast<std::chrono::nanoseconds>(stop - start)
              .count()};
}

/// Samples resident memory at the given interval while the section runs.
/// Returns the peak growth over the pre-section baseline, floored at 0, or
/// nullopt where the probe is unavailable; the section's output is returned
/// either way.
template <typename F>
auto memory_probe(F&& critical_section,
                  std::chrono::milliseconds interval =
                      std::chrono::milliseconds(10))
    -> std::pair<decltype(critical_section()), std::optional<std::size_t>> {
  if (interval.count() <= 0) {
    throw std::invalid_argument("memory_probe: interval must be positive");
  }
  const auto baseline = resident_bytes();
  if (!baseline) {
    return {critical_section(), std::nullopt};
  }
  std::atomic<bool> done{false};
  std::atomic<std::size_t> peak{*baseline};
  std::thread sampler([&] {
    while (!done.load(std::memory_order_relaxed)) {
      if (auto rss = resident_bytes()) {
        std::size_t prev = peak.load(std::memory_order_relaxed);
        while (*rss > prev &&
               !peak.compare_exchange_weak(prev, *rss)) {
        }
      }
      std::this_thread::sleep_for(interval);
    }
  });
  decltype(critical_section()) output;
  try {
    output = critical_section();
  } catch (...) {
    done.store(true);
    sampler.join();
    throw;
  }
  done.store(true);
  sampler.join();
  if (auto rss = resident_bytes()) {
    std::size_t prev = peak.load(std::memory_order_relaxed);
    if (*rss > prev) peak.store(*rss);
  }
  const std::size_t growth =
      peak.load() > *baseline ? peak.load() - *baseline : 0;
  return {std::move(output), growth};
}

/// Combined probe for a measured critical section.
template <typename F>
struct ProbedRun {
  decltype(std::declval<F>()()) output;
  std::int64_t duration_ns;
  std::optional<std::size_t> peak_bytes;
};

template <typename F>
ProbedRun<F> probed_run(F&& critical_section,
                        std::chrono::milliseconds interval =
                            std::chrono::milliseconds(10)) {
  std::int64_t duration = 0;
  auto [output, peak] = memory_probe(
      [&] {
        auto [out, ns] = timed_run(critical_section);
        duration = ns;
        return out;
      },
      interval);
  return {std::move(output), duration, peak};
}

// ---------------------------------------------------------------------------
// Plan

struct QueryTaskSpec {
  QueryKind kind = QueryKind::kCount;
  std::string column;
};

struct MlTaskSpec {
  double learning_rate = 0.05;
  std::size_t epochs = 20;
  std::size_t batch_size = 64;
  double clip_norm = 1.0;
  double delta = 1e-5;
};

struct TaskSpec {
  enum class Type { kQuery, kMl };
  Type type = Type::kQuery;
  QueryTaskSpec query;
  MlTaskSpec ml;
  std::optional<std::size_t> repetitions;  // overrides the plan default

  std::string id() const {
    if (type == Type::kQuery) {
      return to_string(query.kind) + ":" + query.column;
    }
    return "ml:regression";
  }
};

/// The full sweep: epsilon grid x size grid x tasks x repetitions, plus
/// the per-tail trim count and master seed.
struct ExperimentPlan {
  std::vector<double> epsilons = default_epsilon_grid();
  std::vector<std::size_t> sizes;
  std::vector<TaskSpec> tasks;
  std::size_t repetitions = 20;
  std::size_t trim = 1;
  std::uint64_t master_seed = 0;

  std::size_t task_repetitions(const TaskSpec& task) const {
    return task.repetitions.value_or(repetitions);
  }

  void check() const {
    if (epsilons.empty() || sizes.empty()) {
      throw std::invalid_argument("ExperimentPlan: empty epsilon or size grid");
    }
    for (double eps : epsilons) {
      if (!(eps > 0.0)) {
        throw std::invalid_argument("ExperimentPlan: epsilon must be positive");
      }
    }
    for (const auto& task : tasks) {
      if (task_repetitions(task) <= 2 * trim) {
        throw std::invalid_argument(
            "ExperimentPlan: repetitions must exceed 2 * trim");
      }
    }
  }
};

namespace detail {

inline void reject_unknown_fields(const nlohmann::json& obj,
                                  const std::vector<std::string>& known,
                                  const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw std::runtime_error("plan: unknown field '" + key + "' in " +
                               where);
    }
  }
}

}  // namespace detail

inline ExperimentPlan plan_from_json(const nlohmann::json& j) {
  detail::reject_unknown_fields(
      j, {"epsilons", "sizes", "tasks", "repetitions", "trim", "master_seed"},
      "plan");
  ExperimentPlan plan;
  if (j.contains("epsilons")) {
    plan.epsilons = j.at("epsilons").get<std::vector<double>>();
  }
  plan.sizes = j.at("sizes").get<std::vector<std::size_t>>();
  if (j.contains("repetitions")) plan.repetitions = j.at("repetitions");
  if (j.contains("trim")) plan.trim = j.at("trim");
  if (j.contains("master_seed")) plan.master_seed = j.at("master_seed");
  for (const auto& jt : j.at("tasks")) {
    TaskSpec task;
    const std::string type = jt.at("type");
    if (type == "query") {
      detail::reject_unknown_fields(jt, {"type", "kind", "column",
                                         "repetitions"},
                                    "query task");
      task.type = TaskSpec::Type::kQuery;
      task.query.kind = query_kind_from_string(jt.at("kind"));
      task.query.column = jt.at("column");
    } else if (type == "ml") {
      detail::reject_unknown_fields(
          jt, {"type", "learning_rate", "epochs", "batch_size", "clip_norm",
               "delta", "repetitions"},
          "ml task");
      task.type = TaskSpec::Type::kMl;
      if (jt.contains("learning_rate")) task.ml.learning_rate = jt.at("learning_rate");
      if (jt.contains("epochs")) task.ml.epochs = jt.at("epochs");
      if (jt.contains("batch_size")) task.ml.batch_size = jt.at("batch_size");
      if (jt.contains("clip_norm")) task.ml.clip_norm = jt.at("clip_norm");
      if (jt.contains("delta")) task.ml.delta = jt.at("delta");
      if (!task.repetitions) task.repetitions = 10;
    } else {
      throw std::runtime_error("plan: unknown task type '" + type + "'");
    }
    if (jt.contains("repetitions")) {
      task.repetitions = jt.at("repetitions").get<std::size_t>();
    }
    plan.tasks.push_back(std::move(task));
  }
  plan.check();
  return plan;
}

inline ExperimentPlan load_plan(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("load_plan: cannot open '" + path + "'");
  }
  nlohmann::json j;
  in >> j;
  return plan_from_json(j);
}

// ---------------------------------------------------------------------------
// Run records

enum class RunStatus { kOk, kFailed, kSkipped };

inline std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::kOk: return "ok";
    case RunStatus::kFailed: return "failed";
    case RunStatus::kSkipped: return "skipped";
  }
  throw std::logic_error("unknown RunStatus");
}

inline RunStatus run_status_from_string(const std::string& s) {
  if (s == "ok") return RunStatus::kOk;
  if (s == "failed") return RunStatus::kFailed;
  if (s == "skipped") return RunStatus::kSkipped;
  throw std::runtime_error("unknown run status '" + s + "'");
}

/// One repetition's paired DP/NP outputs with wall-time and peak-memory
/// probes.
struct RunRecord {
  static constexpr int kSchemaVersion = 1;

  std::string task;
  double epsilon = 0.0;
  std::size_t size = 0;
  std::size_t rep = 0;
  RunStatus status = RunStatus::kOk;
  std::string reason;

  std::optional<double> np_value;
  std::optional<double> dp_value;
  std::optional<std::map<std::string, double>> np_bins;
  std::optional<std::map<std::string, double>> dp_bins;

  std::int64_t np_time_ns = 0;
  std::int64_t dp_time_ns = 0;
  std::optional<std::size_t> np_peak_bytes;
  std::optional<std::size_t> dp_peak_bytes;
};

inline nlohmann::json record_to_json(const RunRecord& r) {
  nlohmann::json j;
  j["v"] = RunRecord::kSchemaVersion;
  j["task"] = r.task;
  j["epsilon"] = r.epsilon;
  j["size"] = r.size;
  j["rep"] = r.rep;
  j["status"] = to_string(r.status);
  if (!r.reason.empty()) j["reason"] = r.reason;
  if (r.np_value) j["np_value"] = *r.np_value;
  if (r.dp_value) j["dp_value"] = *r.dp_value;
  if (r.np_bins) j["np_bins"] = *r.np_bins;
  if (r.dp_bins) j["dp_bins"] = *r.dp_bins;
  j["np_time_ns"] = r.np_time_ns;
  j["dp_time_ns"] = r.dp_time_ns;
  if (r.np_peak_bytes) j["np_peak_bytes"] = *r.np_peak_bytes;
  if (r.dp_peak_bytes) j["dp_peak_bytes"] = *r.dp_peak_bytes;
  return j;
}

inline RunRecord record_from_json(const nlohmann::json& j) {
  if (j.at("v").get<int>() != RunRecord::kSchemaVersion) {
    throw std::runtime_error("record: unsupported schema version");
  }
  RunRecord r;
  r.task = j.at("task");
  r.epsilon = j.at("epsilon");
  r.size = j.at("size");
  r.rep = j.at("rep");
  r.status = run_status_from_string(j.at("status"));
  if (j.contains("reason")) r.reason = j.at("reason");
  if (j.contains("np_value")) r.np_value = j.at("np_value").get<double>();
  if (j.contains("dp_value")) r.dp_value = j.at("dp_value").get<double>();
  if (j.contains("np_bins")) {
    r.np_bins = j.at("np_bins").get<std::map<std::string, double>>();
  }
  if (j.contains("dp_bins")) {
    r.dp_bins = j.at("dp_bins").get<std::map<std::string, double>>();
  }
  r.np_time_ns = j.at("np_time_ns");
  r.dp_time_ns = j.at("dp_time_ns");
  if (j.contains("np_peak_bytes")) {
    r.np_peak_bytes = j.at("np_peak_bytes").get<std::size_t>();
  }
  if (j.contains("dp_peak_bytes")) {
    r.dp_peak_bytes = j.at("dp_peak_bytes").get<std::size_t>();
  }
  return r;
}

/// Line-delimited persistence; one JSON record per line.
inline void persist_records(const std::vector<RunRecord>& records,
                            const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("persist_records: cannot write '" + path + "'");
  }
  for (const auto& r : records) {
    out << record_to_json(r).dump() << '\n';
  }
  if (!out) {
    throw std::runtime_error("persist_records: write failed for '" + path +
                             "'");
  }
}

inline std::vector<RunRecord> load_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("load_records: cannot open '" + path + "'");
  }
  std::vector<RunRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      records.push_back(record_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw std::runtime_error("load_records: malformed record at line " +
                               std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

// ---------------------------------------------------------------------------
// Plan execution

namespace detail {

inline std::uint64_t cell_seed(std::uint64_t master_seed,
                               const std::string& task_id,
                               std::size_t eps_index, std::size_t size_index,
                               std::size_t rep) {
  return SeedHasher()
      .mix(master_seed)
      .mix(task_id)
      .mix(eps_index)
      .mix(size_index)
      .mix(rep)
      .value();
}

inline void run_query_cell(const TaskSpec& task, double epsilon,
                           std::uint64_t seed, const Dataset& sub,
                           RunRecord& rec) {
  auto np = probed_run([&] { return np_query(task.query.kind, sub,
                                             task.query.column); });
  rec.np_time_ns = np.duration_ns;
  rec.np_peak_bytes = np.peak_bytes;

  const PrivacyParams budget(epsilon, 0.0);
  BudgetLedger ledger(budget);
  SeededNoise noise(SeedHasher().mix(seed).mix("noise").value());
  auto dp = probed_run([&] {
    return dp_query(task.query.kind, sub, task.query.column, budget, ledger,
                    noise);
  });
  rec.dp_time_ns = dp.duration_ns;
  rec.dp_peak_bytes = dp.peak_bytes;

  if (task.query.kind == QueryKind::kHistogram) {
    rec.np_bins = np.output.bins;
    rec.dp_bins = dp.output.bins;
  } else {
    rec.np_value = np.output.scalar;
    rec.dp_value = dp.output.scalar;
  }
}

inline void run_ml_cell(const TaskSpec& task, double epsilon,
                        std::uint64_t seed, const Dataset& sub,
                        std::map<std::pair<double, std::size_t>, double>&
                            sigma_cache,
                        RunRecord& rec) {
  auto [train, test] = split(sub, 0.8, SeedHasher().mix(seed).mix("split").value());

  SgdConfig cfg;
  cfg.learning_rate = task.ml.learning_rate;
  cfg.epochs = task.ml.epochs;
  cfg.batch_size = std::min(task.ml.batch_size, train.size());
  cfg.seed = SeedHasher().mix(seed).mix("sgd").value();

  const double q = static_cast<double>(cfg.batch_size) /
                   static_cast<double>(train.size());
  const std::size_t steps =
      cfg.epochs * std::max<std::size_t>(1, train.size() / cfg.batch_size);

  const auto cache_key = std::make_pair(epsilon, train.size());
  auto it = sigma_cache.find(cache_key);
  if (it == sigma_cache.end()) {
    const double sigma =
        calibrate_sigma(PrivacyParams(epsilon, task.ml.delta), q, steps);
    it = sigma_cache.emplace(cache_key, sigma).first;
  }

  DpSgdParams dp_params;
  dp_params.clip_norm = task.ml.clip_norm;
  dp_params.noise_multiplier = it->second;
  dp_params.target = PrivacyParams(epsilon, task.ml.delta);

  auto np = probed_run([&] { return np_sgd_train(train, cfg); });
  rec.np_time_ns = np.duration_ns;
  rec.np_peak_bytes = np.peak_bytes;

  auto dp = probed_run([&] { return dp_sgd_train(train, cfg, dp_params); });
  rec.dp_time_ns = dp.duration_ns;
  rec.dp_peak_bytes = dp.peak_bytes;

  // Held-out evaluation happens outside the measured critical sections.
  rec.np_value = test_rmse(np.output, test);
  rec.dp_value = test_rmse(dp.output, test);
}

}  // namespace detail

/// Runs every (task, epsilon, size, repetition) cell strictly serially.
/// NP runs before DP on the identical subsample; failing cells are recorded
/// with a reason, never dropped.
inline std::vector<RunRecord> execute_plan(const ExperimentPlan& plan,
                                           const Dataset& d) {
  plan.check();
  std::vector<RunRecord> records;
  std::map<std::pair<double, std::size_t>, double> sigma_cache;

  for (const auto& task : plan.tasks) {
    const std::size_t reps = plan.task_repetitions(task);
    for (std::size_t ei = 0; ei < plan.epsilons.size(); ++ei) {
      const double epsilon = plan.epsilons[ei];
      for (std::size_t si = 0; si < plan.sizes.size(); ++si) {
        const std::size_t size = plan.sizes[si];
        for (std::size_t rep = 0; rep < reps; ++rep) {
          RunRecord rec;
          rec.task = task.id();
          rec.epsilon = epsilon;
          rec.size = size;
          rec.rep = rep;
          if (size > d.size()) {
            rec.status = RunStatus::kSkipped;
            rec.reason = "dataset too small for requested size " +
                         std::to_string(size);
            records.push_back(std::move(rec));
            continue;
          }
          const std::uint64_t seed =
              detail::cell_seed(plan.master_seed, task.id(), ei, si, rep);
          try {
            const Dataset sub = subsample(d, size, seed);
            if (task.type == TaskSpec::Type::kQuery) {
              detail::run_query_cell(task, epsilon, seed, sub, rec);
            } else {
              detail::run_ml_cell(task, epsilon, seed, sub, sigma_cache, rec);
            }
          } catch (const std::exception& e) {
            rec.status = RunStatus::kFailed;
            rec.reason = e.what();
          }
          records.push_back(std::move(rec));
        }
      }
    }
  }
  return records;
}

}  // namespace dpbench
