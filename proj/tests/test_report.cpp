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

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dpbench/report.hpp"

using namespace dpbench;

namespace {

RunRecord ok_record(const std::string& task, double eps, std::size_t size,
                    std::size_t rep, double np, double dp,
                    std::int64_t np_ns = 100, std::int64_t dp_ns = 150) {
  RunRecord r;
  r.task = task;
  r.epsilon = eps;
  r.size = size;
  r.rep = rep;
  r.np_value = np;
  r.dp_value = dp;
  r.np_time_ns = np_ns;
  r.dp_time_ns = dp_ns;
  r.np_peak_bytes = 1000;
  r.dp_peak_bytes = 1200;
  return r;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count_lines(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

// Naive reference aggregation for the utility metric of a single scalar
// cell: sort per-rep errors, drop one from each end, plain loop RMSPE.
double naive_cell_utility(std::vector<RunRecord> cell) {
  std::sort(cell.begin(), cell.end(), [](const RunRecord& a,
                                         const RunRecord& b) {
    return (*a.dp_value - *a.np_value) < (*b.dp_value - *b.np_value);
  });
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 1; i + 1 < cell.size(); ++i) {
    const double rel =
        (*cell[i].np_value - *cell[i].dp_value) / *cell[i].np_value;
    sum += rel * rel;
    ++n;
  }
  return std::sqrt(sum / static_cast<double>(n)) * 100.0;
}

}  // namespace

TEST_CASE("aggregate trims 20 repetitions to 18") {
  std::vector<RunRecord> records;
  for (std::size_t rep = 0; rep < 20; ++rep) {
    records.push_back(ok_record("count:x0", 1.0, 100, rep, 100.0,
                                100.0 + static_cast<double>(rep)));
  }
  const auto summaries = aggregate(records, 1);
  REQUIRE(summaries.size() == 1);
  CHECK(summaries[0].n_ok == 20);
  CHECK(summaries[0].n_used == 18);
  CHECK(summaries[0].usable);
}

TEST_CASE("aggregate of identical DP and NP gives zero utility RMSPE") {
  std::vector<RunRecord> records;
  for (std::size_t rep = 0; rep < 10; ++rep) {
    records.push_back(ok_record("sum:v", 0.5, 50, rep, 42.0, 42.0));
  }
  const auto summaries = aggregate(records, 1);
  REQUIRE(summaries.size() == 1);
  CHECK(summaries[0].utility_rmspe == 0.0);
}

TEST_CASE("aggregate matches a naive reference on random records") {
  RandomStream rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<RunRecord> records;
    const std::size_t reps = 5 + rng.next_u64() % 46;  // up to 50
    for (std::size_t rep = 0; rep < reps; ++rep) {
      const double np = 50.0 + 100.0 * rng.uniform01();
      const double dp = np + 30.0 * (rng.uniform01() - 0.5);
      records.push_back(ok_record("avg:v", 1.0, 100, rep, np, dp));
    }
    const auto summaries = aggregate(records, 1);
    REQUIRE(summaries.size() == 1);
    const double expected = naive_cell_utility(records);
    CHECK(std::abs(summaries[0].utility_rmspe - expected) <=
          1e-9 * std::max(1.0, expected));
  }
}

TEST_CASE("aggregate is order invariant") {
  std::vector<RunRecord> records;
  RandomStream rng(13);
  for (std::size_t rep = 0; rep < 12; ++rep) {
    records.push_back(ok_record("count:x0", 2.0, 30, rep, 30.0,
                                30.0 + 4.0 * (rng.uniform01() - 0.5)));
  }
  auto shuffled = records;
  std::reverse(shuffled.begin(), shuffled.end());
  const auto a = aggregate(records, 1);
  const auto b = aggregate(shuffled, 1);
  REQUIRE(a.size() == b.size());
  CHECK(a[0].utility_rmspe == b[0].utility_rmspe);
  CHECK(a[0].runtime_rmspe == b[0].runtime_rmspe);
  CHECK(a[0].memory_delta == b[0].memory_delta);
}

TEST_CASE("aggregate marks cells with too few survivors unusable") {
  std::vector<RunRecord> records;
  for (std::size_t rep = 0; rep < 2; ++rep) {
    records.push_back(ok_record("count:x0", 1.0, 10, rep, 10.0, 11.0));
  }
  RunRecord failed;
  failed.task = "count:x0";
  failed.epsilon = 1.0;
  failed.size = 10;
  failed.rep = 2;
  failed.status = RunStatus::kFailed;
  failed.reason = "boom";
  records.push_back(failed);

  const auto summaries = aggregate(records, 1);
  REQUIRE(summaries.size() == 1);
  CHECK_FALSE(summaries[0].usable);
  CHECK(summaries[0].n_ok == 2);
  CHECK(summaries[0].n_failed == 1);
}

TEST_CASE("aggregate computes memory overhead from worst-case peaks") {
  std::vector<RunRecord> records;
  for (std::size_t rep = 0; rep < 5; ++rep) {
    auto r = ok_record("count:x0", 1.0, 10, rep, 10.0, 10.0);
    r.np_peak_bytes = 100 + rep;      // worst case 104
    r.dp_peak_bytes = 120 + 2 * rep;  // worst case 128
    records.push_back(r);
  }
  const auto summaries = aggregate(records, 1);
  REQUIRE(summaries.size() == 1);
  CHECK(summaries[0].memory_delta ==
        Catch::Approx((128.0 - 104.0) / 104.0 * 100.0));
}

TEST_CASE("aggregate expands histogram bins into Eq-1 pairs") {
  std::vector<RunRecord> records;
  for (std::size_t rep = 0; rep < 5; ++rep) {
    RunRecord r;
    r.task = "histogram:g";
    r.epsilon = 1.0;
    r.size = 10;
    r.rep = rep;
    r.np_bins = std::map<std::string, double>{{"A", 10.0}, {"B", 0.0}};
    r.dp_bins = std::map<std::string, double>{{"A", 9.0}, {"B", 0.5}};
    r.np_time_ns = 10;
    r.dp_time_ns = 12;
    records.push_back(r);
  }
  const auto summaries = aggregate(records, 1);
  REQUIRE(summaries.size() == 1);
  // Zero-NP bin B is excluded; every surviving pair is (10, 9).
  CHECK(summaries[0].utility_rmspe == Catch::Approx(10.0));
}

TEST_CASE("summary persistence round trip") {
  std::vector<RunRecord> records;
  for (std::size_t rep = 0; rep < 6; ++rep) {
    records.push_back(ok_record("count:x0", 1.5, 70, rep, 70.0,
                                70.0 + static_cast<double>(rep) - 3.0));
  }
  const auto summaries = aggregate(records, 1);
  const std::string path = "/tmp/dpbench_report_summaries.jsonl";
  persist_summaries(summaries, path);
  const auto loaded = load_summaries(path);
  REQUIRE(loaded.size() == summaries.size());
  CHECK(loaded[0].task == summaries[0].task);
  CHECK(loaded[0].utility_rmspe == summaries[0].utility_rmspe);
  CHECK(loaded[0].n_used == summaries[0].n_used);
  CHECK(loaded[0].usable == summaries[0].usable);
  std::remove(path.c_str());
}

TEST_CASE("emit_plot_data grid shape") {
  // Full 13 x 10 grid for one task: 130 value rows plus the header.
  std::vector<MetricSummary> summaries;
  for (double eps : default_epsilon_grid()) {
    for (std::size_t size = 1000; size <= 10000; size += 1000) {
      MetricSummary s;
      s.task = "count:x0";
      s.epsilon = eps;
      s.size = size;
      s.utility_rmspe = eps * size;
      s.n_ok = 20;
      s.n_used = 18;
      s.usable = true;
      summaries.push_back(s);
    }
  }
  const std::string path = "/tmp/dpbench_report_grid.tsv";
  emit_plot_data(summaries, Metric::kUtility, PlotShape::kGrid, path);
  const auto text = read_file(path);
  CHECK(count_lines(text) == 131);

  // Deterministic: re-emitting produces a byte-identical file.
  const std::string path2 = "/tmp/dpbench_report_grid2.tsv";
  emit_plot_data(summaries, Metric::kUtility, PlotShape::kGrid, path2);
  CHECK(read_file(path2) == text);
  std::remove(path.c_str());
  std::remove(path2.c_str());
}

TEST_CASE("emit_plot_data single summary and unusable marker") {
  MetricSummary s;
  s.task = "sum:v";
  s.epsilon = 0.1;
  s.size = 1000;
  s.n_ok = 1;
  s.usable = false;
  const std::string path = "/tmp/dpbench_report_single.tsv";
  emit_plot_data({s}, Metric::kUtility, PlotShape::kGrid, path);
  const auto text = read_file(path);
  CHECK(count_lines(text) == 2);
  CHECK(text.find(kUnusableMarker) != std::string::npos);
  std::remove(path.c_str());
}

TEST_CASE("emit_plot_data lines shape has one series per size") {
  std::vector<MetricSummary> summaries;
  for (double eps : {0.5, 1.0}) {
    for (std::size_t size : {100, 200, 300}) {
      MetricSummary s;
      s.task = "count:x0";
      s.epsilon = eps;
      s.size = size;
      s.runtime_rmspe = 10.0 * eps + size;
      s.n_ok = 20;
      s.usable = true;
      summaries.push_back(s);
    }
  }
  const std::string path = "/tmp/dpbench_report_lines.tsv";
  emit_plot_data(summaries, Metric::kRuntime, PlotShape::kLines, path);
  const auto text = read_file(path);
  CHECK(count_lines(text) == 4);  // header + 3 sizes
  std::remove(path.c_str());
}

TEST_CASE("emit_plot_data rejects an empty selection") {
  CHECK_THROWS(emit_plot_data({}, Metric::kUtility, PlotShape::kGrid,
                              "/tmp/never_written.tsv"));
}
