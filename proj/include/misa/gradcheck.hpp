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

#pragma once

#include <cstdint>
#include <functional>

#include "misa/model.hpp"

namespace misa {

struct GradcheckReport {
  double max_rel_err = 0.0;  // over entries with magnitude of at least abs_tol / rel_tol
  double max_abs_err = 0.0;
  int entries = 0;
  int failures = 0;
  // Entries whose step-h and step-h/2 differences disagree, meaning the
  // stencil straddles a point where the function is not differentiable.
  int nonsmooth = 0;

  bool ok() const { return failures == 0; }
};

using ScalarFn = std::function<double(const Vector&)>;

// Compares grad against central differences of f at x. An entry fails when
// its error exceeds max(rel_tol * magnitude, abs_tol).
GradcheckReport check_gradient(const ScalarFn& f, const Vector& x, const Vector& grad, double h = 1e-5,
                               double rel_tol = 1e-5, double abs_tol = 1e-7);

// Small random problem for gradient audits: 1 to 3 datasets of 2 to 5
// sources, random subspace labels, simulated data and a random W.
struct AuditCase {
  MultiDataset X;
  SubspaceAssignment P;
  BlockTransform W;
};

AuditCase random_audit_case(std::uint64_t seed, Index N = 500);

}  // namespace misa
