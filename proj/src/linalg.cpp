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

#include "misa/linalg.hpp"

namespace misa::linalg {

Svd full_rank_svd(const Matrix& W, const std::string& what) {
  if (W.rows() == 0 || W.rows() > W.cols()) throw ShapeError(what + ": expected a wide or square matrix");
  if (!W.allFinite()) throw RankError(what + ": non-finite entries");
  Eigen::JacobiSVD<Matrix> svd(W, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  if (!(s(s.size() - 1) >= kRankTol * s(0)) || s(0) == 0.0)
    throw RankError(what + ": rank deficient (sigma_min/sigma_max = " +
                    std::to_string(s(0) > 0 ? s(s.size() - 1) / s(0) : 0.0) + ")");
  return {svd.matrixU(), s, svd.matrixV()};
}

Matrix pinv_transpose(const Matrix& W) {
  const Svd f = full_rank_svd(W, "pseudoinverse");
  return f.U * f.s.cwiseInverse().asDiagonal() * f.V.transpose();
}

Matrix row_orthonormalize(const Matrix& W) {
  Eigen::HouseholderQR<Matrix> qr(W.transpose());
  Matrix Q = qr.householderQ() * Matrix::Identity(W.cols(), W.rows());
  // fix signs so the result is continuous in W
  const Matrix R = qr.matrixQR().topRows(W.rows()).triangularView<Eigen::Upper>();
  for (Index i = 0; i < W.rows(); ++i)
    if (R(i, i) < 0) Q.col(i) *= -1.0;
  return Q.transpose();
}

Matrix inv_sqrt_sym(const Matrix& S, double floor_rel) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(S);
  if (es.info() != Eigen::Success) throw DefinitenessError("inverse square root: eigendecomposition failed");
  Vector ev = es.eigenvalues();
  const double top = ev.maxCoeff();
  if (!(top > 0)) throw DefinitenessError("inverse square root: matrix has no positive eigenvalue");
  ev = ev.cwiseMax(floor_rel * top);
  return es.eigenvectors() * ev.cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace misa::linalg
