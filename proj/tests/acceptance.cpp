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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <numeric>
#include <string>

#include "misa/combinatorics.hpp"
#include "misa/gradcheck.hpp"
#include "misa/harness/config.hpp"
#include "misa/harness/experiment.hpp"
#include "misa/harness/matrix_io.hpp"
#include "misa/hungarian.hpp"
#include "misa/metrics.hpp"
#include "misa/reduction.hpp"
#include "misa/rng.hpp"
#include "misa/simgen.hpp"

using namespace misa;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void report(int id, const char* name, const std::function<Outcome()>& check) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("%s %d %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), seconds_since(t0));
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

Outcome gradient_audit() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  int bad = 0, nonsmooth = 0, entries = 0;
  for (int i = 0; i < 20; ++i) {
    const AuditCase ac = random_audit_case(derive_seed(2024, i));
    for (Dispersion mode : {Dispersion::ScaleInvariant, Dispersion::ScaleControlled}) {
      const ObjectiveContext ctx(ac.X, ac.P, kLaplace, mode);
      const auto rep = evaluate(ctx, ac.W, true);
      const auto r = check_gradient([&](const Vector& x) { return evaluate(ctx, ac.W.unflatten(x), false).value; },
                                    ac.W.flatten(), rep.gradient->flatten());
      worst = std::max(worst, r.max_rel_err);
      bad += r.failures;
      nonsmooth += r.nonsmooth;
      entries += r.entries;
    }
  }
  const double t = seconds_since(t0);
  const bool ok = bad == 0 && worst < 1e-5 && nonsmooth * 20 < entries && t < 30.0;
  return {ok, fmt("max rel err %.2e over %.0f entries (%.0f nonsmooth stencils skipped), %.1fs", worst, entries,
                  nonsmooth, t)};
}

Outcome pre_audit() {
  double worst = 0.0, inv = 0.0;
  int bad = 0;
  for (int i = 0; i < 20; ++i) {
    Rng rng(derive_seed(77, i));
    const Index M = 1 + i % 3;
    std::vector<Matrix> xs, ws, gs;
    for (Index m = 0; m < M; ++m) {
      const Index V = 3 + (i + m) % 4, C = 1 + (i + 2 * m) % V;
      xs.push_back(rng.normal_matrix(V, 60));
      ws.push_back(rng.normal_matrix(C, V));
      gs.push_back(rng.normal_matrix(C, C) + 2.0 * Matrix::Identity(C, C));
    }
    const MultiDataset X(xs);
    const BlockTransform W(ws), G(gs);
    const auto r = check_gradient([&](const Vector& x) { return pre_value(W.unflatten(x), X); }, W.flatten(),
                                  pre_gradient(W, X).flatten());
    worst = std::max(worst, r.max_rel_err);
    bad += r.failures;
    inv = std::max(inv, std::abs(pre_value(W, X) - pre_value(G * W, X)));
  }
  return {bad == 0 && worst < 1e-5 && inv < 1e-10,
          fmt("max rel err %.2e, max invariance gap %.2e", worst, inv)};
}

Outcome kotz_check() {
  Rng rng(99);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const Index d = 1 + t % 4;
    const Matrix B = rng.normal_matrix(d, d);
    const Matrix D = B * B.transpose() + 0.3 * Matrix::Identity(d, d);
    const Vector y = 2.0 * rng.normal_matrix(d, 1);
    const double ld = std::log(D.determinant());
    const double q = y.dot(D.ldlt().solve(y));
    const double dd = static_cast<double>(d);
    const double gauss = -0.5 * dd * std::log(2.0 * std::numbers::pi) - 0.5 * ld - 0.5 * q;
    // exp(-sqrt(q)) radial law: normalizer Gamma(d/2) / (2 pi^(d/2) Gamma(d)).
    const double lap = std::lgamma(0.5 * dd) - std::log(2.0) - 0.5 * dd * std::log(std::numbers::pi) -
                       std::lgamma(dd) - 0.5 * ld - std::sqrt(q);
    const double eg = std::abs(kotz_log_pdf(y, D, derive_kotz(kGaussian, d)) - gauss) / std::max(1.0, std::abs(gauss));
    const double el = std::abs(kotz_log_pdf(y, D, derive_kotz(kLaplace, d)) - lap) / std::max(1.0, std::abs(lap));
    worst = std::max({worst, eg, el});
    if (d == 1) {
      // unit-variance univariate Laplace: D = 1/2
      const Matrix h = Matrix::Constant(1, 1, 0.5);
      const double ref = -0.5 * std::log(2.0) - std::sqrt(2.0) * std::abs(y(0));
      worst = std::max(worst, std::abs(kotz_log_pdf(y, h, derive_kotz(kLaplace, 1)) - ref));
    }
  }
  return {worst < 1e-12, fmt("max error %.2e over 1000 points", worst)};
}

std::vector<double> instance_bests(const ExperimentResult& r) { return r.summary.best_per_instance; }

const fs::path kOut = fs::temp_directory_path() / "misa_acceptance";

ExperimentConfig ica_config() {
  ExperimentConfig c = preset("ica1");
  c.seed = 20240;
  c.threads = 1;
  return c;
}

Outcome ica_desk() {
  const auto t0 = Clock::now();
  const ExperimentConfig c = ica_config();
  const ExperimentResult r = run_experiment(c);
  write_results(r, kOut / "ica_a");
  const double t = seconds_since(t0);
  const auto best = instance_bests(r);
  const auto good = std::count_if(best.begin(), best.end(), [](double v) { return v < 0.05; });
  return {good >= 9 && t < 300.0, fmt("%.0f/10 instances with best MISI < 0.05, median %.4f, worst %.4f, %.0fs",
                                     static_cast<double>(good), r.summary.median_best, r.summary.max_best, t)};
}

Outcome determinism() {
  ExperimentConfig c = ica_config();
  c.threads = 1;
  const ExperimentResult r = run_experiment(c);
  write_results(r, kOut / "ica_b");
  for (const char* f : {"records.csv", "summary.json", "config.json"}) {
    if (!fs::exists(kOut / "ica_a" / f)) return {false, "criterion 4 output missing"};
    if (io::read_file(kOut / "ica_a" / f) != io::read_file(kOut / "ica_b" / f))
      return {false, std::string(f) + " differs"};
  }
  return {true, "records.csv, summary.json and config.json byte-identical"};
}

Outcome iva_desk() {
  const auto t0 = Clock::now();
  std::vector<double> med;
  std::string detail;
  for (double rho : {0.1, 0.3, 0.5}) {
    ExperimentConfig c = preset("iva1");
    c.seed = 31337;
    c.threads = 1;
    c.sim.rho_max = {rho};
    const ExperimentResult r = run_experiment(c);
    std::vector<double> all;
    for (const auto& rec : r.records) all.push_back(rec.misi);
    med.push_back(median(all));
    detail += fmt("rho %.1f median %.4f; ", rho, med.back());
  }
  const double t = seconds_since(t0);
  const bool ok = med[2] < 0.05 && med[0] > med[1] && med[1] > med[2] && t < 600.0;
  return {ok, detail + fmt("%.0fs", t)};
}

Outcome isa_desk() {
  const auto t0 = Clock::now();
  ExperimentConfig c = preset("isa1");
  c.seed = 4242;
  c.threads = 1;
  const ExperimentResult gp = run_experiment(c);
  c.algorithm.solver = "misa";
  const ExperimentResult plain = run_experiment(c);
  const double t = seconds_since(t0);
  const double mg = gp.summary.median_best, mp = plain.summary.median_best;
  return {mg < 0.1 && mg <= mp && t < 600.0, fmt("MISA-GP median %.4f, MISA median %.4f, %.0fs", mg, mp, t)};
}

Outcome mdm_perm() {
  int gp_good = 0, plain_bad = 0;
  for (int s = 0; s < 10; ++s) {
    SimSpec spec;
    spec.V = {5, 5};
    // Total subspace sizes {3, 3, 4}; dataset 0 holds two sources each of
    // subspaces 1 and 2.
    spec.assignment = SubspaceAssignment({0, 1, 1, 2, 2, 0, 0, 1, 2, 2}, {5, 5});
    spec.N = 10000;
    spec.rho_max = {0.5};
    spec.seed = derive_seed(555, s);
    const Instance inst = build_instance(spec);
    // True unmixing with subspaces 1 and 2 exchanged in dataset 0, slightly perturbed.
    Rng rng(derive_seed(556, s));
    std::vector<Matrix> w;
    for (const auto& A : inst.truth.A.blocks()) w.push_back(A.inverse());
    w[0] = take_rows(w[0], {0, 3, 4, 1, 2});
    for (auto& b : w) b += 0.01 * rng.normal_matrix(5, 5);
    const BlockTransform W0(w);
    MisaOptions o;
    o.optim.tol_fun = 1e-9;
    o.optim.tol_x = 1e-12;
    const Solution plain = fit_misa(inst.X, inst.P, W0, o);
    const GpResult gp = misa_gp_mdm(inst.X, inst.P, W0, 2, o);
    gp_good += misi(gp.solution.W, inst.truth.A, inst.P) < 0.1 ? 1 : 0;
    plain_bad += misi(plain.W, inst.truth.A, inst.P) > 0.1 ? 1 : 0;
  }
  return {gp_good >= 8 && plain_bad >= 8,
          fmt("MDM MISI < 0.1 in %.0f/10, plain MISA > 0.1 in %.0f/10", gp_good, plain_bad)};
}

Outcome generators() {
  double worst = 0.0;
  for (double c : {1.0, 3.0, 7.0, 15.0})
    for (std::uint64_t s = 0; s < 5; ++s) {
      Eigen::JacobiSVD<Matrix> svd(gen_mixing(40, 10, c, s));
      const auto& sv = svd.singularValues();
      worst = std::max(worst, std::abs(sv(0) / sv(sv.size() - 1) - c));
    }
  double snr_err = 0.0;
  for (double db : {3.0, 10.0}) {
    SimSpec spec;
    spec.V = {12};
    spec.assignment = SubspaceAssignment::singletons({6});
    spec.N = 100000;
    spec.snr_db = db;
    spec.seed = 8;
    const Instance inst = build_instance(spec);
    const Matrix signal = inst.truth.A[0] * inst.truth.Y;
    const double noise = (inst.X[0] - signal).squaredNorm();
    const double measured = 10.0 * std::log10((signal.squaredNorm() + noise) / noise);
    snr_err = std::max(snr_err, std::abs(measured - db));
  }
  return {worst < 1e-8 && snr_err < 0.1, fmt("max cond error %.2e, max SNR error %.3f dB", worst, snr_err)};
}

Outcome metric_oracles() {
  const SubspaceAssignment P = SubspaceAssignment::singletons({4});
  Rng rng(5);
  const Matrix A = rng.normal_matrix(4, 4);
  const double m0 = misi(BlockTransform({Matrix(A.inverse())}), BlockTransform({A}), P);
  const double m1 = misi_from_interference(Matrix::Ones(5, 5));
  Matrix H(2, 2);
  H << 2, 1, 1, 3;
  const double m512 = misi_from_interference(H);
  const bool misi_ok = std::abs(m0) < 1e-12 && std::abs(m1 - 1.0) < 1e-12 && std::abs(m512 - 5.0 / 12.0) < 1e-12;

  int lsap_bad = 0;
  for (int t = 0; t < 1000; ++t) {
    const Index K = 1 + t % 7;
    const Matrix C = rng.normal_matrix(K, K);
    std::vector<Index> p(K);
    std::iota(p.begin(), p.end(), Index{0});
    double best = HUGE_VAL;
    do {
      double s = 0.0;
      for (Index i = 0; i < K; ++i) s += C(i, p[i]);
      best = std::min(best, s);
    } while (std::next_permutation(p.begin(), p.end()));
    if (std::abs(assignment_cost(C, hungarian(C)) - best) > 1e-10) ++lsap_bad;
  }
  Matrix perm = Matrix::Zero(4, 4);
  perm(0, 3) = perm(1, 0) = perm(2, 1) = perm(3, 2) = 1.0;
  const bool mmse_ok =
      std::abs(mmse(Matrix::Identity(4, 4))) < 1e-12 && std::abs(mmse(perm)) < 1e-12 && mmse(Matrix::Zero(4, 4)) == 2.0;
  return {misi_ok && lsap_bad == 0 && mmse_ok,
          fmt("misi {%.1e, %.12f, %.12f}, hungarian mismatches %.0f/1000", m0, m1, m512, lsap_bad) +
              (mmse_ok ? ", mmse oracles exact" : ", mmse oracle mismatch")};
}

}  // namespace

int main() {
  fs::remove_all(kOut);
  fs::create_directories(kOut);
  report(1, "gradient audit", gradient_audit);
  report(2, "PRE audit", pre_audit);
  report(3, "Kotz correctness", kotz_check);
  report(4, "ICA desk scale", ica_desk);
  report(5, "IVA desk scale", iva_desk);
  report(6, "ISA desk scale", isa_desk);
  report(7, "MDM subspace permutation", mdm_perm);
  report(8, "generators", generators);
  report(9, "metric oracles", metric_oracles);
  report(10, "determinism", determinism);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
