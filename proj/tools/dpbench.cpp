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

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dpbench/accountant.hpp"
#include "dpbench/dataset.hpp"
#include "dpbench/harness.hpp"
#include "dpbench/meta_io.hpp"
#include "dpbench/report.hpp"

namespace {

int run_command(const std::string& plan_path, const std::string& data_path,
                const std::string& meta_path, const std::string& out_path,
                std::optional<std::uint64_t> seed_override) {
  auto plan = dpbench::load_plan(plan_path);
  if (seed_override) plan.master_seed = *seed_override;
  const auto meta = dpbench::load_meta(meta_path);
  const auto dataset = dpbench::load_csv(data_path, meta.columns, meta.target);
  const auto records = dpbench::execute_plan(plan, dataset);
  dpbench::persist_records(records, out_path);
  std::size_t ok = 0, failed = 0, skipped = 0;
  for (const auto& r : records) {
    switch (r.status) {
      case dpbench::RunStatus::kOk: ++ok; break;
      case dpbench::RunStatus::kFailed: ++failed; break;
      case dpbench::RunStatus::kSkipped: ++skipped; break;
    }
  }
  std::cout << records.size() << " records written to " << out_path << " (ok "
            << ok << ", failed " << failed << ", skipped " << skipped
            << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differential-privacy benchmarking toolkit"};
  app.require_subcommand(1);

  // run
  std::string plan_path, data_path, meta_path, records_out;
  std::optional<std::uint64_t> seed_override;
  auto* run = app.add_subcommand("run", "Execute an experiment plan");
  run->add_option("--plan", plan_path, "Plan file (JSON)")->required();
  run->add_option("--data", data_path, "Dataset CSV")->required();
  run->add_option("--meta", meta_path, "Column metadata file (JSON)")
      ->required();
  run->add_option("--out", records_out, "Output records file (JSONL)")
      ->required();
  run->add_option("--seed", seed_override,
                  "Override the plan's master seed");

  // aggregate
  std::string agg_in, agg_out;
  std::size_t agg_trim = 1;
  auto* agg = app.add_subcommand("aggregate",
                                 "Aggregate run records into summaries");
  agg->add_option("--in", agg_in, "Records file (JSONL)")->required();
  agg->add_option("--out", agg_out, "Output summaries file (JSONL)")
      ->required();
  agg->add_option("--trim", agg_trim, "Repetitions trimmed per tail");

  // report
  std::string rep_in, rep_out, rep_metric = "utility", rep_shape = "grid";
  auto* rep = app.add_subcommand("report", "Emit plot-ready grid/line data");
  rep->add_option("--in", rep_in, "Summaries file (JSONL)")->required();
  rep->add_option("--metric", rep_metric, "utility|runtime|memory");
  rep->add_option("--shape", rep_shape, "grid|lines");
  rep->add_option("--out", rep_out, "Output file")->required();

  // calibrate
  double cal_epsilon = 1.0, cal_delta = 1e-5, cal_q = 0.01;
  std::size_t cal_steps = 1000;
  auto* cal = app.add_subcommand(
      "calibrate", "Noise multiplier for a target (epsilon, delta)");
  cal->add_option("--epsilon", cal_epsilon, "Target epsilon")->required();
  cal->add_option("--delta", cal_delta, "Target delta")->required();
  cal->add_option("--q", cal_q, "Poisson sampling rate")->required();
  cal->add_option("--steps", cal_steps, "Number of SGD steps")->required();

  // synth
  std::string synth_csv, synth_meta;
  std::size_t synth_n = 10000, synth_d = 4;
  double synth_noise = 0.1;
  std::uint64_t synth_seed = 1;
  auto* synth = app.add_subcommand(
      "synth", "Generate a synthetic regression dataset");
  synth->add_option("--n", synth_n, "Row count");
  synth->add_option("--d", synth_d, "Feature count");
  synth->add_option("--noise-std", synth_noise, "Target noise stdev");
  synth->add_option("--seed", synth_seed, "Generator seed");
  synth->add_option("--out-csv", synth_csv, "Output CSV path")->required();
  synth->add_option("--out-meta", synth_meta, "Output metadata path")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      return run_command(plan_path, data_path, meta_path, records_out,
                         seed_override);
    }
    if (agg->parsed()) {
      const auto records = dpbench::load_records(agg_in);
      const auto summaries = dpbench::aggregate(records, agg_trim);
      dpbench::persist_summaries(summaries, agg_out);
      std::cout << summaries.size() << " summaries written to " << agg_out
                << "\n";
      return 0;
    }
    if (rep->parsed()) {
      const auto summaries = dpbench::load_summaries(rep_in);
      dpbench::emit_plot_data(summaries,
                              dpbench::metric_from_string(rep_metric),
                              dpbench::plot_shape_from_string(rep_shape),
                              rep_out);
      std::cout << "plot data written to " << rep_out << "\n";
      return 0;
    }
    if (cal->parsed()) {
      const double sigma = dpbench::calibrate_sigma(
          dpbench::PrivacyParams(cal_epsilon, cal_delta), cal_q, cal_steps);
      std::cout << sigma << "\n";
      return 0;
    }
    if (synth->parsed()) {
      std::vector<double> weights(synth_d);
      dpbench::RandomStream rng(synth_seed);
      for (auto& w : weights) w = 2.0 * rng.uniform01() - 1.0;
      const auto d = dpbench::synth_regression(synth_n, synth_d, weights,
                                               synth_noise, synth_seed + 1);
      dpbench::save_csv(d, synth_csv);
      dpbench::save_meta(d, synth_meta);
      std::cout << "wrote " << synth_csv << " and " << synth_meta << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
