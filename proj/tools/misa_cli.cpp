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

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "misa/gradcheck.hpp"
#include "misa/harness/config.hpp"
#include "misa/harness/experiment.hpp"
#include "misa/harness/matrix_io.hpp"
#include "misa/metrics.hpp"
#include "misa/objective.hpp"
#include "misa/fit.hpp"
#include "misa/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace misa;

namespace {

struct Common {
  std::string config;
  std::string experiment;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<int> threads;
};

ExperimentConfig resolve_config(const Common& o) {
  ExperimentConfig c = !o.config.empty() ? load_config(o.config)
                       : !o.experiment.empty() ? preset(o.experiment)
                                               : preset("custom");
  if (o.seed) c.seed = *o.seed;
  if (o.threads) c.threads = *o.threads;
  if (!o.out.empty()) c.output_dir = o.out;
  c.validate();
  return c;
}

std::string block_name(const char* prefix, std::size_t m) { return std::string(prefix) + std::to_string(m) + ".bin"; }

void save_blocks(const fs::path& dir, const char* prefix, const std::vector<Matrix>& blocks) {
  for (std::size_t m = 0; m < blocks.size(); ++m) io::save_matrix(dir / block_name(prefix, m), blocks[m]);
}

std::vector<Matrix> load_blocks(const fs::path& dir, const char* prefix, std::size_t count) {
  std::vector<Matrix> out;
  for (std::size_t m = 0; m < count; ++m) out.push_back(io::load_matrix(dir / block_name(prefix, m)));
  return out;
}

struct SavedInstance {
  MultiDataset X;
  BlockTransform A;
  SubspaceAssignment P;
};

SavedInstance load_instance(const fs::path& dir) {
  const json man = json::parse(io::read_file(dir / "instance.json"));
  const auto counts = man.at("sources_per_dataset").get<std::vector<Index>>();
  SavedInstance s;
  s.X = MultiDataset(load_blocks(dir, "X", counts.size()));
  s.A = BlockTransform(load_blocks(dir, "A", counts.size()));
  s.P = SubspaceAssignment::from_matrix(io::load_matrix(dir / "P.bin"), counts);
  return s;
}

int cmd_generate(const Common& o) {
  const ExperimentConfig cfg = resolve_config(o);
  const std::uint64_t seed = instance_seed(cfg.seed, 0);
  const Instance inst = build_instance(cfg.sim_spec(seed));
  const fs::path dir = o.out.empty() ? fs::path("instance") : fs::path(o.out);
  fs::create_directories(dir);
  save_blocks(dir, "X", inst.X.blocks());
  save_blocks(dir, "A", inst.truth.A.blocks());
  io::save_matrix(dir / "Y.bin", inst.truth.Y);
  io::save_matrix(dir / "P.bin", inst.P.matrix());
  json man;
  man["instance_seed"] = seed;
  man["sources_per_dataset"] = inst.P.sources_per_dataset();
  man["noise_scale"] = inst.truth.noise_scale;
  man["realized_cond"] = inst.truth.realized_cond;
  man["config"] = config_to_json(cfg);
  io::write_file(dir / "instance.json", man.dump(2) + "\n");
  std::cout << "wrote " << dir.string() << "\n";
  return 0;
}

int cmd_solve(const Common& o, const std::string& instance_dir) {
  const ExperimentConfig cfg = resolve_config(o);
  const SavedInstance s = load_instance(instance_dir);
  const SolveOutput out = solve_instance(cfg, s.X, s.P, replicate_seed(instance_seed(cfg.seed, 0), 0));
  const fs::path dir = o.out.empty() ? fs::path("solution") : fs::path(o.out);
  fs::create_directories(dir);
  save_blocks(dir, "W", out.W.blocks());
  json j;
  j["objective"] = out.objective;
  j["iterations"] = out.iterations;
  j["status"] = to_string(out.status);
  j["datasets"] = out.W.size();
  io::write_file(dir / "solution.json", j.dump(2) + "\n");
  std::cout << "objective " << io::format_double(out.objective) << " status " << to_string(out.status) << "\n";
  return 0;
}

int cmd_score(const std::string& instance_dir, const std::string& solution_dir) {
  const SavedInstance s = load_instance(instance_dir);
  const BlockTransform W(load_blocks(solution_dir, "W", s.X.size()));
  const double v = misi(W, s.A, s.P);
  json j;
  j["misi"] = v;
  if (s.P.num_subspaces() == s.P.sources_per_dataset().front()) {
    const Matrix Y = io::load_matrix(fs::path(instance_dir) / "Y.bin");
    Matrix Yhat(s.P.num_sources(), s.X.n_obs());
    for (std::size_t m = 0; m < s.X.size(); ++m) Yhat.middleRows(s.P.offset(m), W[m].rows()) = W[m] * s.X[m];
    j["mmse"] = mmse(source_cross_correlation(Yhat, Y, s.P));
  }
  std::cout << j.dump(2) << "\n";
  return v < kMisiGood ? 0 : 1;
}

int cmd_gradcheck(const Common& o, int count) {
  const std::uint64_t seed = o.seed.value_or(0);
  int failures = 0;
  double worst = 0.0;
  for (int i = 0; i < count; ++i) {
    const AuditCase ac = random_audit_case(derive_seed(seed, i));
    for (Dispersion mode : {Dispersion::ScaleInvariant, Dispersion::ScaleControlled}) {
      const ObjectiveContext ctx(ac.X, ac.P, kLaplace, mode);
      const auto rep = evaluate(ctx, ac.W, true);
      const auto res = check_gradient([&](const Vector& x) { return evaluate(ctx, ac.W.unflatten(x), false).value; },
                                      ac.W.flatten(), rep.gradient->flatten());
      failures += res.failures;
      worst = std::max(worst, res.max_rel_err);
      std::printf("instance %d M=%zu K=%lld %s max_rel_err %.3e nonsmooth %d/%d\n", i, ac.X.size(),
                  static_cast<long long>(ac.P.num_subspaces()), mode == Dispersion::ScaleInvariant ? "SI" : "SC",
                  res.max_rel_err, res.nonsmooth, res.entries);
    }
  }
  std::printf("worst %.3e failures %d\n", worst, failures);
  return failures == 0 ? 0 : 1;
}

int cmd_experiment(const Common& o) {
  const ExperimentConfig cfg = resolve_config(o);
  const ExperimentResult r = run_experiment(cfg);
  write_results(r, cfg.output_dir);
  std::cout << summary_json(r);
  return r.summary.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multidataset independent subspace analysis"};
  app.require_subcommand(1);
  Common o;
  std::string instance_dir, solution_dir;
  int count = 20;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON configuration file");
    sub->add_option("--experiment", o.experiment, "Preset id (ica1, iva1, iva2, isa1, isa2, isa3, custom)");
    sub->add_option("--seed", o.seed, "Master seed");
    sub->add_option("--out", o.out, "Output directory");
    sub->add_option("--threads", o.threads, "Worker threads (MISA_THREADS overrides)");
  };
  auto* gen = app.add_subcommand("generate", "Write a simulated instance");
  add_common(gen);
  auto* solve = app.add_subcommand("solve", "Run the configured chain on a saved instance");
  add_common(solve);
  solve->add_option("--instance", instance_dir, "Instance directory")->required();
  auto* exp = app.add_subcommand("experiment", "Run a full experiment");
  add_common(exp);
  auto* grad = app.add_subcommand("gradcheck", "Finite-difference audit of the objective gradient");
  grad->add_option("--seed", o.seed, "Seed");
  grad->add_option("--count", count, "Number of random instances");
  auto* score = app.add_subcommand("score", "Score a saved solution");
  score->add_option("--instance", instance_dir, "Instance directory")->required();
  score->add_option("--solution", solution_dir, "Solution directory")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*gen) return cmd_generate(o);
    if (*solve) return cmd_solve(o, instance_dir);
    if (*exp) return cmd_experiment(o);
    if (*grad) return cmd_gradcheck(o, count);
    if (*score) return cmd_score(instance_dir, solution_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
