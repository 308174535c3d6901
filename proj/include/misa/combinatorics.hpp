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

#include <cmath>
#include <limits>
#include <vector>

#include "misa/fit.hpp"
#include "misa/hungarian.hpp"

namespace misa {

// Improvements smaller than this keep the incumbent assignment.
inline const double kTieTolerance = std::sqrt(std::numeric_limits<double>::epsilon());

struct GpReport {
  std::vector<Index> chosen;                         // per source, index into its candidate vector
  std::vector<std::vector<double>> candidate_costs;  // per source
  int tie_breaks = 0;
};

// Greedy source-to-subspace reassignment at fixed W on a single dataset.
SubspaceAssignment gp(const MultiDataset& X, const SubspaceAssignment& P, const BlockTransform& W,
                      KotzShape shape = kLaplace, GpReport* report = nullptr);

// Row ordering ix such that W[ix] realizes P_est's subspaces in P_ud's slots.
std::vector<Index> match(const SubspaceAssignment& P_est, const SubspaceAssignment& P_ud);

// Rows ix of each block, in order. Works on a single block too.
Matrix take_rows(const Matrix& W, const std::vector<Index>& ix);

enum class PermMode { Auto, Exhaustive, Greedy };

inline constexpr double kExhaustiveLimit = 1e4;

// Permutes equal-size subspaces within each dataset to minimize the
// scale-invariant cost.
BlockTransform subspace_perm(const MultiDataset& X, const SubspaceAssignment& P_ud, const BlockTransform& W,
                             PermMode mode = PermMode::Auto, KotzShape shape = kLaplace);

struct GpResult {
  Solution solution;
  std::vector<double> candidate_values;
  std::size_t best = 0;
  std::vector<Status> stage_status;
};

GpResult misa_gp_sdm(const MultiDataset& X, const SubspaceAssignment& P_ud, const BlockTransform& W0, int T,
                     const MisaOptions& opts);

GpResult misa_gp_mdm(const MultiDataset& X, const SubspaceAssignment& P_ud, const BlockTransform& W0, int T,
                     const MisaOptions& opts, PermMode perm = PermMode::Auto);

}  // namespace misa
