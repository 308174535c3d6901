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

#include <optional>
#include <vector>

#include "misa/model.hpp"

namespace misa {

// Sum of ln sigma_i(W_m); equals ln|det W_m| for square W_m.
template <typename Derived>
typename Derived::Scalar j_d_term(const Eigen::MatrixBase<Derived>& W) {
  using Scalar = typename Derived::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (W.rows() == 0 || W.rows() > W.cols()) throw ShapeError("j_d_term: expected a wide or square matrix");
  Eigen::JacobiSVD<Mat> svd{Mat(W)};
  const auto& s = svd.singularValues();
  if (!(s(0) > Scalar(0)) || !(s(s.size() - 1) >= Scalar(linalg::kRankTol) * s(0)))
    throw RankError("j_d_term: W is rank deficient");
  return s.array().log().sum();
}

class ObjectiveContext {
 public:
  ObjectiveContext(MultiDataset X, SubspaceAssignment P, std::vector<KotzParams> kotz, Dispersion mode);
  // Same shape for every subspace, dimensions taken from P.
  ObjectiveContext(MultiDataset X, SubspaceAssignment P, KotzShape shape, Dispersion mode);

  const MultiDataset& data() const { return X_; }
  const SubspaceAssignment& assignment() const { return P_; }
  const std::vector<KotzParams>& kotz() const { return kotz_; }
  Dispersion dispersion() const { return mode_; }
  const Matrix& gram(std::size_t m) const { return gram_[m]; }
  // Sum of the per-subspace normalizing constants.
  double f_constant() const { return f_; }

 private:
  MultiDataset X_;
  SubspaceAssignment P_;
  std::vector<KotzParams> kotz_;
  Dispersion mode_;
  std::vector<Matrix> gram_;
  double f_ = 0.0;
};

struct ObjectiveTerms {
  double jd = 0.0;  // sum_m sum_i ln sigma_mi
  double jc = 0.0;  // sum_k ln det D_k
  double jf = 0.0;  // sum_k (eta_k - 1)/N sum_n ln z_kn
  double je = 0.0;  // sum_k lambda_k/N sum_n z_kn^beta_k
  double f = 0.0;

  double combine() const { return -jd + 0.5 * jc - f - jf + je; }
};

struct ObjectiveReport {
  double value = 0.0;
  ObjectiveTerms terms;
  std::optional<BlockTransform> gradient;
};

ObjectiveReport evaluate(const ObjectiveContext& ctx, const BlockTransform& W, bool with_gradient);

// Per-block grad_m * W_m^T * W_m.
BlockTransform relative_gradient(const BlockTransform& grad, const BlockTransform& W);

// Contribution of a single subspace with sources Y (d x N).
struct SubspaceTerm {
  double value = 0.0;
  double jc = 0.0, jf = 0.0, je = 0.0;
  Matrix grad_y;  // empty unless requested
};

SubspaceTerm subspace_term(const Matrix& Y, const KotzParams& p, Dispersion mode, bool with_gradient,
                           Index subspace = -1);

}  // namespace misa
