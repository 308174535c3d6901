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
#include <optional>
#include <vector>

#include "misa/objective.hpp"
#include "misa/optimizer.hpp"

namespace misa {

struct Solution {
  BlockTransform W;
  double objective_value = 0.0;
  std::optional<double> constraint_value;
  Status status = Status::MaxIter;
  bool feasible = true;
  std::vector<TraceEntry> trace;
  int iterations = 0;
  int evaluations = 0;
};

struct MisaOptions {
  KotzShape shape = kLaplace;
  Dispersion dispersion = Dispersion::ScaleControlled;
  bool relative_gradient = true;
  // When optim.constraint_threshold is set, PRE(W) <= threshold is enforced.
  OptimOptions optim;
  // Greedy drivers stop once consecutive candidate costs agree to this
  // relative tolerance.
  double repeat_tol = 1e-6;
};

// Runs the quasi-Newton solver on the MISA objective from W0.
Solution fit_misa(const MultiDataset& X, const SubspaceAssignment& P, const BlockTransform& W0,
                  const MisaOptions& opts);

// Objective value at fixed W.
double misa_cost(const MultiDataset& X, const SubspaceAssignment& P, const BlockTransform& W, KotzShape shape,
                 Dispersion mode);

// One random row-orthonormal C_m x V_m block per dataset.
BlockTransform random_unmixing(const std::vector<Index>& sources, const std::vector<Index>& dims, std::uint64_t seed);

}  // namespace misa
