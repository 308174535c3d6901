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

#include "misa/metrics.hpp"

#include <cmath>

#include "misa/hungarian.hpp"

namespace misa {

Matrix interference_matrix(const BlockTransform& W_hat, const BlockTransform& A, const SubspaceAssignment& P) {
  if (W_hat.size() != A.size() || P.num_datasets() != A.size()) throw ShapeError("misi: dataset count mismatch");
  const Index K = P.num_subspaces();
  Matrix H = Matrix::Zero(K, K);
  for (std::size_t m = 0; m < A.size(); ++m) {
    if (W_hat[m].cols() != A[m].rows() || W_hat[m].rows() != P.sources_per_dataset()[m] ||
        A[m].cols() != P.sources_per_dataset()[m])
      throw ShapeError("misi: block " + std::to_string(m) + " shape mismatch");
    const Matrix G = (W_hat[m] * A[m]).cwiseAbs();
    const std::vector<Index> lab = P.dataset_labels(m);
    for (Index i = 0; i < G.rows(); ++i)
      for (Index j = 0; j < G.cols(); ++j) H(lab[i], lab[j]) += G(i, j);
  }
  return H;
}

double misi_from_interference(const Matrix& H) {
  const Index K = H.rows();
  if (H.cols() != K) throw ShapeError("misi: H must be square");
  if (K < 2) throw DomainError("misi: needs at least two subspaces");
  const Matrix Ha = H.cwiseAbs();
  const Vector rmax = Ha.rowwise().maxCoeff(), cmax = Ha.colwise().maxCoeff().transpose();
  if ((rmax.array() <= 0).any() || (cmax.array() <= 0).any())
    throw DomainError("misi: interference matrix has a zero row or column");
  double s = 0.0;
  for (Index i = 0; i < K; ++i) s += Ha.row(i).sum() / rmax(i) - 1.0;
  for (Index j = 0; j < K; ++j) s += Ha.col(j).sum() / cmax(j) - 1.0;
  return 0.5 * s / static_cast<double>(K * (K - 1));
}

double misi(const BlockTransform& W_hat, const BlockTransform& A, const SubspaceAssignment& P) {
  return misi_from_interference(interference_matrix(W_hat, A, P));
}

double mmse(const Matrix& R) {
  if (R.rows() != R.cols()) throw ShapeError("mmse: R must be square");
  const Index K = R.rows();
  const Matrix absR = R.cwiseAbs();
  const std::vector<Index> col = hungarian(-absR);
  double tr = 0.0;
  for (Index i = 0; i < K; ++i) tr += absR(i, col[i]);
  return 2.0 - 2.0 / static_cast<double>(K) * tr;
}

Matrix source_cross_correlation(const Matrix& Y_hat, const Matrix& Y, const SubspaceAssignment& P) {
  if (Y_hat.rows() != Y.rows() || Y_hat.cols() != Y.cols()) throw ShapeError("source correlation: shape mismatch");
  const auto& counts = P.sources_per_dataset();
  const Index C = counts.front();
  for (Index c : counts)
    if (c != C) throw ShapeError("source correlation: datasets need equal source counts");
  auto standardize = [](const Matrix& Z) {
    Matrix Zc = Z.colwise() - Z.rowwise().mean();
    const Vector s = Zc.rowwise().norm();
    return Matrix(s.cwiseInverse().asDiagonal() * Zc);
  };
  Matrix R = Matrix::Zero(C, C);
  for (std::size_t m = 0; m < counts.size(); ++m) {
    const Matrix a = standardize(Y_hat.middleRows(P.offset(m), C));
    const Matrix b = standardize(Y.middleRows(P.offset(m), C));
    R += (a * b.transpose()).cwiseAbs();
  }
  return R / static_cast<double>(counts.size());
}

}  // namespace misa
