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

#include <Eigen/Dense>
#include <limits>
#include <string>

#include "misa/errors.hpp"

namespace misa {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace linalg {

// Singular values below this fraction of the largest count as zero.
inline constexpr double kRankTol = 1e3 * std::numeric_limits<double>::epsilon();

// Cholesky factor of a symmetric positive-definite matrix. On failure the
// diagonal is lifted once by 1e-12 * trace / d; a second failure throws.
template <typename Derived>
Eigen::LLT<Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>>
robust_llt(const Eigen::MatrixBase<Derived>& S, const std::string& what) {
  using Scalar = typename Derived::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (S.rows() != S.cols()) throw ShapeError(what + ": matrix is not square");
  if (!S.allFinite()) throw DefinitenessError(what + ": non-finite entries");
  Eigen::LLT<Mat> llt(S);
  if (llt.info() == Eigen::Success) return llt;
  const Index d = S.rows();
  const Scalar jitter = Scalar(1e-12) * S.trace() / Scalar(d);
  if (!(jitter > Scalar(0))) throw DefinitenessError(what + ": not positive definite");
  Mat lifted = S;
  lifted.diagonal().array() += jitter;
  llt.compute(lifted);
  if (llt.info() != Eigen::Success) throw DefinitenessError(what + ": not positive definite");
  return llt;
}

template <typename Scalar>
Scalar log_det(const Eigen::LLT<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>& llt) {
  return Scalar(2) * llt.matrixLLT().diagonal().array().log().sum();
}

// Symmetric Toeplitz matrix from its first column.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>
toeplitz(const Eigen::MatrixBase<Derived>& col) {
  const Index d = col.size();
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> T(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) T(i, j) = col(std::abs(i - j));
  return T;
}

struct Svd {
  Matrix U;
  Vector s;
  Matrix V;
};

// Thin SVD of a wide or square matrix; throws RankError if rank-deficient.
Svd full_rank_svd(const Matrix& W, const std::string& what);

// (W^-)^T for a full-row-rank W.
Matrix pinv_transpose(const Matrix& W);

// Rows of the result form an orthonormal basis of row-space(W).
Matrix row_orthonormalize(const Matrix& W);

// S^{-1/2} with eigenvalues floored at floor_rel * lambda_max.
Matrix inv_sqrt_sym(const Matrix& S, double floor_rel = 1e-12);

}  // namespace linalg
}  // namespace misa
