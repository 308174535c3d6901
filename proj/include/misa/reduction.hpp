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
#include <vector>

#include "misa/model.hpp"
#include "misa/optimizer.hpp"

namespace misa {

// Fraction of data power outside row-space(W_m), averaged over datasets.
double pre_value(const BlockTransform& W, const MultiDataset& X);
BlockTransform pre_gradient(const BlockTransform& W, const MultiDataset& X);

// Same quantities from precomputed Gram matrices X_m X_m^T.
double pre_value_gram(const BlockTransform& W, const std::vector<Matrix>& grams);
BlockTransform pre_gradient_gram(const BlockTransform& W, const std::vector<Matrix>& grams);

// Reconstruction error using W^T in place of the pseudoinverse.
double re_wt_value(const BlockTransform& W, const MultiDataset& X);
BlockTransform re_wt_gradient(const BlockTransform& W, const MultiDataset& X);

// A_m = Sigma_x W^T (W Sigma_x W^T)^{-1} per dataset.
BlockTransform optimal_estimator(const BlockTransform& W, const MultiDataset& X);

// Symmetric whitening matrix Sigma_x^{-1/2} of one dataset.
Matrix whitening_matrix(const Matrix& X);

struct ReductionOptions {
  double precision = 80.0;  // b in the tolerance rule
  OptimOptions optim = [] {
    OptimOptions o;
    o.memory = 5;
    return o;
  }();
  std::uint64_t seed = 0;
};

struct ReductionResult {
  BlockTransform B_star;
  MultiDataset reduced;
  std::vector<double> final_error;
  std::vector<int> iterations;
  std::vector<Status> status;
};

ReductionResult reduce_data(const MultiDataset& X, const std::vector<Index>& target_dims,
                            const ReductionOptions& opts = {});

// Random Gaussian matrix with orthonormal rows.
Matrix random_row_orthonormal(Index rows, Index cols, std::uint64_t seed);

struct GpcaResult {
  BlockTransform W;    // unit-variance score projection, sliced per dataset
  Vector eigenvalues;  // top C, descending
  Matrix axes;         // concatenated principal axes (sum V_m x C)
};

GpcaResult gpca(const MultiDataset& X, Index C);
inline BlockTransform gpca_init(const MultiDataset& X, Index C) { return gpca(X, C).W; }

}  // namespace misa
