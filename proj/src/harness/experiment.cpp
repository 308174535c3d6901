// Copyright 2026 The MISA Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "misa/harness/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <thread>

#include "misa/combinatorics.hpp"
#include "misa/harness/matrix_io.hpp"
#include "misa/metrics.hpp"
#include "misa/reduction.hpp"
#include "misa/rng.hpp"

namespace misa {

std::uint64_t instance_seed(std::uint64_t seed, int instance) { return derive_seed(seed, instance); }

std::uint64_t replicate_seed(std::uint64_t inst_seed, int replicate) {
  return derive_seed(inst_seed, 1000 + static_cast<std::uint64_t>(replicate));
}

int resolve_threads(int fallback) {
  if (const char* env = std::getenv("MISA_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return std::max(1, fallback);
}

SolveOutput solve_instance(const ExperimentConfig& cfg, const MultiDataset& X, const SubspaceAssignment& P,
                           std::uint64_t rep_seed) {
  const std::vector<Index> C = P.sources_per_dataset();
  const std::vector<Index> V = X.dims();
  MisaOptions mo;
  mo.dispersion = cfg.algorithm.dispersion;
  mo.optim = cfg.optim;

  const bool reducible = [&] {
    for (std::size_t m = 0; m < V.size(); ++m)
      if (V[m] > C[m]) return true;
    return false;
  }();

  MultiDataset Z = X;
  std::optional<BlockTransform> B;
  BlockTransform W0;
  if (cfg.algorithm.reduce == "pre" && reducible) {
    ReductionOptions ro;
    ro.precision = cfg.algorithm.precision_b;
    ro.optim = cfg.reduce_optim;
    ro.seed = derive_seed(rep_seed, 1);
    ReductionResult red = reduce_data(X, C, ro);
    Z = std::move(red.reduced);
    B = std::move(red.B_star);
    W0 = BlockTransform::identity(C);
  } else if (cfg.algorithm.reduce == "gpca" && reducible) {
    for (Index c : C)
      if (c != C.front()) throw PreconditionError("gpca reduction needs equal source counts");
    B = gpca_init(X, C.front());
    Z = B->apply(X);
    W0 = random_unmixing(C, C, derive_seed(rep_seed, 2));
  } else {
    W0 = random_unmixing(C, V, derive_seed(rep_seed, 2));
    if (cfg.algorithm.pre_threshold) mo.optim.constraint_threshold = cfg.algorithm.pre_threshold;
  }

  SolveOutput out;
  Solution sol;
  if (cfg.algorithm.solver == "misa") {
    sol = fit_misa(Z, P, W0, mo);
  } else if (X.size() == 1) {
    sol = misa_gp_sdm(Z, P, W0, cfg.algorithm.T, mo).solution;
  } else {
    sol = misa_gp_mdm(Z, P, W0, cfg.algorithm.T, mo).solution;
  }
  out.W = B ? sol.W * *B : sol.W;
  out.objective = sol.objective_value;
  out.iterations = sol.iterations;
  out.status = sol.status;
  return out;
}

namespace {

bool reports_mmse(const ExperimentConfig& cfg) { return cfg.sim.structure == "ica" || cfg.sim.structure == "iva"; }

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

Summary summarize(const std::vector<RunRecord>& records, int instances) {
  Summary s;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> best_mmse;
  for (int i = 0; i < instances; ++i) {
    double best = nan;
    std::optional<double> mm;
    for (const auto& r : records) {
      if (r.instance != i || std::isnan(r.misi)) continue;
      if (std::isnan(best) || r.misi < best) {
        best = r.misi;
        mm = r.mmse;
      }
    }
    s.best_per_instance.push_back(best);
    if (mm) best_mmse.push_back(*mm);
  }
  std::vector<double> finite;
  for (double b : s.best_per_instance)
    if (!std::isnan(b)) finite.push_back(b);
  s.median_best = median(finite);
  s.min_best = finite.empty() ? nan : *std::min_element(finite.begin(), finite.end());
  s.max_best = finite.empty() ? nan : *std::max_element(finite.begin(), finite.end());
  if (!best_mmse.empty()) s.median_mmse = median(best_mmse);
  s.pass = finite.size() == s.best_per_instance.size() && s.median_best < kMisiGood;
  return s;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult res;
  res.config = cfg;
  std::vector<Instance> insts;
  std::vector<std::uint64_t> iseeds;
  for (int i = 0; i < cfg.instances; ++i) {
    iseeds.push_back(instance_seed(cfg.seed, i));
    insts.push_back(build_instance(cfg.sim_spec(iseeds.back())));
  }
  const int total = cfg.instances * cfg.replicates;
  res.records.resize(total);
  const bool with_mmse = reports_mmse(cfg);

  auto run_one = [&](int slot) {
    const int i = slot / cfg.replicates, r = slot % cfg.replicates;
    RunRecord& rec = res.records[slot];
    rec.instance = i;
    rec.replicate = r;
    rec.instance_seed = iseeds[i];
    rec.replicate_seed = replicate_seed(iseeds[i], r);
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const Instance& inst = insts[i];
      const SolveOutput out = solve_instance(cfg, inst.X, inst.P, rec.replicate_seed);
      rec.misi = misi(out.W, inst.truth.A, inst.P);
      if (with_mmse) {
        Matrix Yhat(inst.P.num_sources(), inst.X.n_obs());
        for (std::size_t m = 0; m < inst.X.size(); ++m)
          Yhat.middleRows(inst.P.offset(m), out.W[m].rows()) = out.W[m] * inst.X[m];
        rec.mmse = mmse(source_cross_correlation(Yhat, inst.truth.Y, inst.P));
      }
      rec.objective = out.objective;
      rec.iterations = out.iterations;
      rec.status = to_string(out.status);
    } catch (const std::exception& e) {
      rec.misi = std::numeric_limits<double>::quiet_NaN();
      rec.objective = std::numeric_limits<double>::quiet_NaN();
      rec.status = std::string("error: ") + e.what();
    }
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  const int threads = std::min(resolve_threads(cfg.threads), total);
  if (threads <= 1) {
    for (int s = 0; s < total; ++s) run_one(s);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (int s = next++; s < total; s = next++) run_one(s);
      });
    for (auto& th : pool) th.join();
  }
  res.summary = summarize(res.records, cfg.instances);
  return res;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string records_csv(const std::vector<RunRecord>& records) {
  std::string out = "instance,replicate,instance_seed,replicate_seed,misi,mmse,objective,iterations,status\n";
  for (const auto& r : records) {
    out += std::to_string(r.instance) + "," + std::to_string(r.replicate) + "," + std::to_string(r.instance_seed) +
           "," + std::to_string(r.replicate_seed) + "," + io::format_double(r.misi) + "," +
           (r.mmse ? io::format_double(*r.mmse) : "") + "," + io::format_double(r.objective) + "," +
           std::to_string(r.iterations) + "," + csv_field(r.status) + "\n";
  }
  return out;
}

std::string timing_csv(const std::vector<RunRecord>& records) {
  std::string out = "instance,replicate,wall_seconds\n";
  for (const auto& r : records)
    out += std::to_string(r.instance) + "," + std::to_string(r.replicate) + "," + io::format_double(r.wall_seconds) +
           "\n";
  return out;
}

std::string summary_json(const ExperimentResult& r) {
  auto num = [](double v) -> nlohmann::json {
    if (std::isnan(v)) return nullptr;
    return v;
  };
  nlohmann::json best = nlohmann::json::array();
  for (double b : r.summary.best_per_instance) best.push_back(num(b));
  nlohmann::json j = {{"experiment", r.config.experiment},
                      {"seed", r.config.seed},
                      {"instances", r.config.instances},
                      {"replicates", r.config.replicates},
                      {"best_misi_per_instance", best},
                      {"median_best_misi", num(r.summary.median_best)},
                      {"min_best_misi", num(r.summary.min_best)},
                      {"max_best_misi", num(r.summary.max_best)},
                      {"misi_good_threshold", kMisiGood},
                      {"pass", r.summary.pass}};
  if (r.summary.median_mmse) j["median_best_mmse"] = num(*r.summary.median_mmse);
  return j.dump(2) + "\n";
}

void write_results(const ExperimentResult& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  io::write_file(dir / "records.csv", records_csv(r.records));
  io::write_file(dir / "summary.json", summary_json(r));
  nlohmann::json cfg = config_to_json(r.config);
  cfg.erase("threads");  // results must not depend on these
  cfg.erase("output_dir");
  io::write_file(dir / "config.json", cfg.dump(2) + "\n");
  io::write_file(dir / "timing.csv", timing_csv(r.records));
}

}  // namespace misa
