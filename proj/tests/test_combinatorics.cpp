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

#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "misa/combinatorics.hpp"
#include "misa/metrics.hpp"
#include "misa/rng.hpp"
#include "misa/simgen.hpp"

using namespace misa;

namespace {

Instance isa_instance(const std::vector<Index>& sizes, Index N, std::uint64_t seed) {
  SimSpec spec;
  Index C = 0;
  for (Index d : sizes) C += d;
  spec.V = {C};
  spec.assignment = SubspaceAssignment::consecutive(sizes);
  spec.N = N;
  spec.seed = seed;
  return build_instance(spec);
}

BlockTransform true_unmixing(const Instance& inst) {
  std::vector<Matrix> w;
  for (const auto& A : inst.truth.A.blocks()) w.push_back(A.completeOrthogonalDecomposition().pseudoInverse());
  return BlockTransform(std::move(w));
}

// Two datasets of five sources in subspaces of total sizes {3, 3, 4}.
Instance mdm_instance(std::uint64_t seed, Index N = 4000) {
  SimSpec spec;
  spec.V = {5, 5};
  spec.assignment = SubspaceAssignment({0, 0, 1, 2, 2, 0, 1, 1, 2, 2}, {5, 5});
  spec.N = N;
  spec.rho_max = {0.5};
  spec.seed = seed;
  return build_instance(spec);
}

// Every set partition of n items as restricted growth strings.
void partitions(std::vector<Index>& cur, Index n, std::vector<std::vector<Index>>& out) {
  if (static_cast<Index>(cur.size()) == n) {
    out.push_back(cur);
    return;
  }
  const Index top = cur.empty() ? 0 : *std::max_element(cur.begin(), cur.end()) + 1;
  for (Index k = 0; k <= top; ++k) {
    cur.push_back(k);
    partitions(cur, n, out);
    cur.pop_back();
  }
}

}  // namespace

TEST_CASE("match") {
  const SubspaceAssignment ud = SubspaceAssignment::consecutive({2, 2, 1});
  std::vector<Index> id(5);
  std::iota(id.begin(), id.end(), Index{0});
  CHECK(match(ud, ud) == id);
  const SubspaceAssignment swapped({1, 1, 0, 0, 2}, {5});
  CHECK(match(swapped, ud) == std::vector<Index>{0, 1, 2, 3, 4});
  const SubspaceAssignment est({0, 2, 0, 2, 1}, {5});
  const auto ix = match(est, ud);
  CHECK(est.subspace_of(ix[0]) == est.subspace_of(ix[1]));
  CHECK(est.subspace_of(ix[2]) == est.subspace_of(ix[3]));
  CHECK(ix[4] == 4);
}

TEST_CASE("match maximizes overlap on partial agreement") {
  const SubspaceAssignment ud = SubspaceAssignment::consecutive({2, 2, 2});
  const SubspaceAssignment est({1, 1, 1, 0, 2, 2}, {6});  // source 2 misassigned
  // Brute force over all bijections between estimated and target subspaces.
  std::vector<Index> perm{0, 1, 2}, best_perm;
  double best = HUGE_VAL;
  do {
    double c = 0.0;
    for (Index k = 0; k < 3; ++k) {
      Index overlap = 0;
      for (Index s : est.members(k)) overlap += ud.subspace_of(s) == perm[k] ? 1 : 0;
      c += static_cast<double>(std::abs(est.dim(k) - ud.dim(perm[k])) * 6 - overlap);
    }
    if (c < best) {
      best = c;
      best_perm = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  CHECK(best_perm == std::vector<Index>{1, 0, 2});
  // Target slots 0-1 take the estimated group {0, 1, 2}; its spare source
  // fills the free slot of target subspace 1.
  CHECK(match(est, ud) == std::vector<Index>{0, 1, 3, 2, 4, 5});
}

TEST_CASE("gp keeps the truth at the true unmixing") {
  const Instance inst = isa_instance({2, 3, 1}, 5000, 31);
  const BlockTransform W = true_unmixing(inst);
  GpReport rep;
  CHECK(gp(inst.X, inst.P, W, kLaplace, &rep) == inst.P);
  const Instance ind = isa_instance({1, 1, 1}, 5000, 32);
  CHECK(gp(ind.X, ind.P, true_unmixing(ind), kLaplace) == ind.P);
}

TEST_CASE("gp finds the brute-force optimal partition of four sources") {
  const Instance inst = isa_instance({2, 2}, 8000, 33);
  const BlockTransform W = true_unmixing(inst);
  const SubspaceAssignment start = SubspaceAssignment::singletons({4});
  const SubspaceAssignment got = gp(inst.X, start, W, kLaplace);
  CHECK(got.same_partition(inst.P));

  std::vector<std::vector<Index>> all;
  std::vector<Index> cur;
  partitions(cur, 4, all);
  REQUIRE(all.size() == 15);
  double best = HUGE_VAL;
  SubspaceAssignment arg;
  for (const auto& lab : all) {
    const SubspaceAssignment P(lab, {4});
    const double v = misa_cost(inst.X, P, W, kLaplace, Dispersion::ScaleInvariant);
    if (v < best) {
      best = v;
      arg = P;
    }
  }
  CHECK(arg.same_partition(inst.P));
}

TEST_CASE("subspace_perm with nothing to permute") {
  const Instance inst = isa_instance({1, 2, 3}, 500, 34);
  const BlockTransform W = random_unmixing({6}, {6}, 1);
  const BlockTransform out = subspace_perm(inst.X, inst.P, W);
  CHECK(out[0] == W[0]);
}

TEST_CASE("subspace_perm undoes a swap of equal-size subspaces") {
  const Instance inst = mdm_instance(35);
  BlockTransform W = true_unmixing(inst);
  // Dataset 0 holds two sources of subspaces 0 and 2; swap their rows.
  BlockTransform bad = W;
  bad[0] = take_rows(W[0], {3, 4, 2, 0, 1});
  const double before = misa_cost(inst.X, inst.P, bad, kLaplace, Dispersion::ScaleInvariant);
  const BlockTransform fixed = subspace_perm(inst.X, inst.P, bad, PermMode::Exhaustive);
  const double after = misa_cost(inst.X, inst.P, fixed, kLaplace, Dispersion::ScaleInvariant);
  CHECK(after < before);
  CHECK(misi(fixed, inst.truth.A, inst.P) < 1e-6);
  CHECK(misi(bad, inst.truth.A, inst.P) > 0.1);
}

TEST_CASE("greedy and exhaustive subspace_perm agree") {
  int agree = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SimSpec spec;
    spec.V = {6, 6};
    spec.assignment = SubspaceAssignment({0, 0, 1, 1, 2, 2, 0, 0, 1, 1, 2, 2}, {6, 6});
    spec.N = 1500;
    spec.rho_max = {0.5};
    spec.seed = 100 + seed;
    const Instance inst = build_instance(spec);
    BlockTransform W = true_unmixing(inst);
    Rng rng(seed);
    std::vector<Index> blocks{0, 1, 2};
    std::shuffle(blocks.begin(), blocks.end(), std::mt19937_64(seed));
    std::vector<Index> ix;
    for (Index b : blocks) {
      ix.push_back(2 * b);
      ix.push_back(2 * b + 1);
    }
    W[1] = take_rows(W[1], ix);
    W[1] += 0.05 * rng.normal_matrix(6, 6);
    const BlockTransform ex = subspace_perm(inst.X, inst.P, W, PermMode::Exhaustive);
    const BlockTransform gr = subspace_perm(inst.X, inst.P, W, PermMode::Greedy);
    const double ce = misa_cost(inst.X, inst.P, ex, kLaplace, Dispersion::ScaleInvariant);
    const double cg = misa_cost(inst.X, inst.P, gr, kLaplace, Dispersion::ScaleInvariant);
    agree += std::abs(ce - cg) < 1e-9 * std::abs(ce) ? 1 : 0;
  }
  CHECK(agree == 20);
}

TEST_CASE("misa_gp_sdm with T = 0 is plain MISA") {
  const Instance inst = isa_instance({2, 2}, 2000, 36);
  const BlockTransform W0 = random_unmixing({4}, {4}, 3);
  MisaOptions o;
  o.optim.tol_fun = 1e-9;
  const GpResult r = misa_gp_sdm(inst.X, inst.P, W0, 0, o);
  const Solution plain = fit_misa(inst.X, inst.P, W0, o);
  CHECK(r.candidate_values.size() == 1);
  CHECK(r.solution.W[0] == plain.W[0]);
}

TEST_CASE("misa_gp_sdm stops once candidates repeat at the optimum") {
  const Instance inst = isa_instance({2, 2}, 4000, 37);
  MisaOptions o;
  o.optim.tol_fun = 1e-9;
  const GpResult r = misa_gp_sdm(inst.X, inst.P, true_unmixing(inst), 5, o);
  CHECK(r.candidate_values.size() == 2);
  CHECK(misi(r.solution.W, inst.truth.A, inst.P) < 0.1);
}

TEST_CASE("misa_gp_mdm on one dataset matches misa_gp_sdm") {
  const Instance inst = isa_instance({2, 2}, 2000, 38);
  const BlockTransform W0 = random_unmixing({4}, {4}, 4);
  MisaOptions o;
  o.optim.tol_fun = 1e-9;
  const GpResult a = misa_gp_sdm(inst.X, inst.P, W0, 1, o);
  const GpResult b = misa_gp_mdm(inst.X, inst.P, W0, 1, o);
  CHECK(a.candidate_values[0] == b.candidate_values[0]);
  CHECK(misi(a.solution.W, inst.truth.A, inst.P) == doctest::Approx(misi(b.solution.W, inst.truth.A, inst.P)).epsilon(1e-6));
}
