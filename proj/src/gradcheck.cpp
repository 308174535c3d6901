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

#include "misa/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "misa/fit.hpp"
#include "misa/rng.hpp"
#include "misa/simgen.hpp"

namespace misa {

GradcheckReport check_gradient(const ScalarFn& f, const Vector& x, const Vector& grad, double h, double rel_tol,
                               double abs_tol) {
  if (grad.size() != x.size()) throw ShapeError("check_gradient: size mismatch");
  GradcheckReport rep;
  Vector xp = x;
  auto central = [&](Index i, double step) {
    xp(i) = x(i) + step;
    const double fp = f(xp);
    xp(i) = x(i) - step;
    const double fm = f(xp);
    xp(i) = x(i);
    return (fp - fm) / (2.0 * step);
  };
  for (Index i = 0; i < x.size(); ++i) {
    ++rep.entries;
    const double fd = central(i, h);
    const double fd_half = central(i, 0.5 * h);
    const double scale = std::max({std::abs(grad(i)), std::abs(fd), 1.0});
    if (std::abs(fd - fd_half) > 1e-6 * scale) {
      ++rep.nonsmooth;
      continue;
    }
    const double err = std::abs(grad(i) - fd);
    const double mag = std::max(std::abs(grad(i)), std::abs(fd));
    rep.max_abs_err = std::max(rep.max_abs_err, err);
    // near zero the absolute bound is the looser one and decides
    if (mag * rel_tol >= abs_tol) rep.max_rel_err = std::max(rep.max_rel_err, err / mag);
    if (err > std::max(rel_tol * mag, abs_tol)) ++rep.failures;
  }
  return rep;
}

AuditCase random_audit_case(std::uint64_t seed, Index N) {
  Rng rng(seed);
  auto pick = [&](Index lo, Index hi) { return lo + static_cast<Index>(rng.uniform() * static_cast<double>(hi - lo + 1)); };
  const Index M = pick(1, 3);
  std::vector<Index> C, V;
  Index total = 0;
  for (Index m = 0; m < M; ++m) {
    C.push_back(pick(2, 5));
    V.push_back(C.back() + pick(0, 2));
    total += C.back();
  }
  const Index K = pick(1, total);
  std::vector<Index> labels(total);
  for (Index c = 0; c < total; ++c) labels[c] = c < K ? c : pick(0, K - 1);
  SimSpec spec;
  spec.V = V;
  spec.assignment = SubspaceAssignment(labels, C);
  spec.N = N;
  spec.rho_max = {0.3};
  spec.seed = derive_seed(seed, 1);
  Instance inst = build_instance(spec);
  AuditCase out;
  out.W = random_unmixing(C, V, derive_seed(seed, 2));
  out.X = std::move(inst.X);
  out.P = std::move(inst.P);
  return out;
}

}  // namespace misa
