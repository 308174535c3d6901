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

#include "misa/model.hpp"

namespace misa {

inline constexpr double kMisiGood = 0.1;
inline constexpr double kMisiExcellent = 0.01;

// K x K matrix of summed |W_hat A| entries between subspaces.
Matrix interference_matrix(const BlockTransform& W_hat, const BlockTransform& A, const SubspaceAssignment& P);

double misi_from_interference(const Matrix& H);

double misi(const BlockTransform& W_hat, const BlockTransform& A, const SubspaceAssignment& P);

// 2 - (2/K) sum_i |R_{i,sigma(i)}| for the best matching sigma.
double mmse(const Matrix& R);

// Absolute correlation between estimated and true sources, averaged over
// datasets. Both are C-bar x N stacked in dataset order with equal C_m.
Matrix source_cross_correlation(const Matrix& Y_hat, const Matrix& Y, const SubspaceAssignment& P);

}  // namespace misa
