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
#include <limits>
#include <vector>

#include "misa/model.hpp"

namespace misa {

// V x C Gaussian matrix with its singular values shifted to give cond = c.
Matrix gen_mixing(Index V, Index C, double cond_target, std::uint64_t seed);

// Noise scale a giving power ratio (tr(AA^T) + a^2 V) / (a^2 V) = 10^(snr_db/10).
// Infinite snr_db gives 0.
double snr_scale(const Matrix& A, Index V, double snr_db);

// R_ij = rho^|i-j|.
Matrix toeplitz_corr(Index d, double rho_max);

// d x N samples of the unit-variance Kotz Laplace family with correlation R.
Matrix sample_mvlaplace(Index d, const Matrix& R, Index N, std::uint64_t seed);

// Maps a standard normal deviate to a unit-variance Laplace deviate.
double normal_to_laplace(double g);

// N x N correlation with the given lag-1 value decaying geometrically.
Matrix exponential_autocorrelation(Index N, double lag1);

struct CopulaResult {
  Matrix Y;            // sources x N, the retained draw
  Matrix median_corr;  // element-wise median source correlation over all draws
  double distance = 0.0;
  int accepted = 0;
};

// Rejection-sampled Laplace-marginal sources. blocks[i] is the N x N
// autocorrelation of source i; sources are independent of each other.
CopulaResult sample_copula_sources(const std::vector<Matrix>& blocks, int draws, std::uint64_t seed);

enum class SourceFamily { MultivariateLaplace, CopulaLaplaceMarginals };

inline constexpr double kNoiseless = std::numeric_limits<double>::infinity();

struct SimSpec {
  std::vector<Index> V;           // observed dimension per dataset
  SubspaceAssignment assignment;  // gives C_m and the subspaces
  Index N = 0;
  std::vector<double> cond{3.0};  // per dataset, or one value for all
  double snr_db = kNoiseless;
  std::vector<double> rho_max{0.0};  // per subspace, or one value for all
  SourceFamily family = SourceFamily::MultivariateLaplace;
  std::uint64_t seed = 0;

  void validate() const;
};

struct GroundTruth {
  BlockTransform A;
  Matrix Y;  // C-bar x N, datasets stacked
  std::vector<double> noise_scale;
  std::vector<double> realized_cond;
  std::vector<Matrix> noise;  // unit-variance e per dataset; empty when noiseless
};

struct Instance {
  MultiDataset X;
  GroundTruth truth;
  SubspaceAssignment P;
};

Instance build_instance(const SimSpec& spec);

// Rows of the stacked source matrix belonging to dataset m.
Matrix dataset_sources(const Matrix& Y, const SubspaceAssignment& P, std::size_t m);

}  // namespace misa
