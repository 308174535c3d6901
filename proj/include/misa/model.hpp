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
#include <numbers>
#include <string>
#include <vector>

#include "misa/linalg.hpp"

namespace misa {

// M observation blocks X_m (V_m x N) sharing the column axis.
class MultiDataset {
 public:
  MultiDataset() = default;
  explicit MultiDataset(std::vector<Matrix> blocks);

  std::size_t size() const { return blocks_.size(); }
  Index n_obs() const { return blocks_.empty() ? 0 : blocks_.front().cols(); }
  std::vector<Index> dims() const;
  const Matrix& operator[](std::size_t m) const { return blocks_[m]; }
  const std::vector<Matrix>& blocks() const { return blocks_; }

 private:
  std::vector<Matrix> blocks_;
};

// Maps each of the C-bar sources (datasets concatenated in order) to one of K
// subspaces. Labels are compressed on construction so that no subspace is
// empty; relative label order is kept.
class SubspaceAssignment {
 public:
  SubspaceAssignment() = default;
  SubspaceAssignment(std::vector<Index> labels, std::vector<Index> sources_per_dataset);

  // P is K x C-bar with a single 1 per column.
  static SubspaceAssignment from_matrix(const Matrix& P, std::vector<Index> sources_per_dataset);
  // Every source in its own subspace, numbered in source order.
  static SubspaceAssignment singletons(std::vector<Index> sources_per_dataset);
  // Source i of every dataset forms subspace i. All datasets need C sources.
  static SubspaceAssignment linked(Index datasets, Index sources);
  // Single dataset with consecutive subspaces of the given sizes.
  static SubspaceAssignment consecutive(const std::vector<Index>& sizes);

  Index num_subspaces() const { return static_cast<Index>(members_.size()); }
  Index num_sources() const { return static_cast<Index>(labels_.size()); }
  std::size_t num_datasets() const { return counts_.size(); }
  const std::vector<Index>& sources_per_dataset() const { return counts_; }
  const std::vector<Index>& labels() const { return labels_; }

  Index subspace_of(Index c) const { return labels_[c]; }
  Index dim(Index k) const { return static_cast<Index>(members_[k].size()); }
  std::vector<Index> dims() const;
  // Global source indices of subspace k, ascending.
  const std::vector<Index>& members(Index k) const { return members_[k]; }

  Index offset(std::size_t m) const { return offsets_[m]; }
  std::size_t dataset_of(Index c) const;

  // Labels of dataset m's sources, using the global subspace numbering.
  std::vector<Index> dataset_labels(std::size_t m) const;
  // Assignment restricted to dataset m, relabelled without empty subspaces.
  SubspaceAssignment slice(std::size_t m) const;

  Matrix matrix() const;

  bool same_partition(const SubspaceAssignment& other) const;
  bool operator==(const SubspaceAssignment& other) const {
    return labels_ == other.labels_ && counts_ == other.counts_;
  }

 private:
  std::vector<Index> labels_;
  std::vector<Index> counts_;
  std::vector<Index> offsets_;
  std::vector<std::vector<Index>> members_;
};

// Block-diagonal linear map: W_m (C_m x V_m) for unmixing, A_m (V_m x C_m) for mixing.
class BlockTransform {
 public:
  BlockTransform() = default;
  explicit BlockTransform(std::vector<Matrix> blocks) : blocks_(std::move(blocks)) {}

  static BlockTransform identity(const std::vector<Index>& dims);
  static BlockTransform zeros_like(const BlockTransform& other);

  std::size_t size() const { return blocks_.size(); }
  Matrix& operator[](std::size_t m) { return blocks_[m]; }
  const Matrix& operator[](std::size_t m) const { return blocks_[m]; }
  const std::vector<Matrix>& blocks() const { return blocks_; }

  Index num_params() const;
  // Concatenates the row-major entries of every block.
  Vector flatten() const;
  // Inverse of flatten using this object's block shapes.
  BlockTransform unflatten(const Vector& x) const;
  // Block-wise product with another transform (this_m * other_m).
  BlockTransform operator*(const BlockTransform& other) const;
  MultiDataset apply(const MultiDataset& X) const;
  // Stacked block-diagonal matrix.
  Matrix dense() const;

 private:
  std::vector<Matrix> blocks_;
};

// Throws ShapeError unless W (C_m x V_m) fits X and P.
void check_shapes(const MultiDataset& X, const SubspaceAssignment& P, const BlockTransform& W);

// Kotz shape triple psi = (beta, lambda, eta).
struct KotzShape {
  double beta;
  double lambda;
  double eta;
};

inline constexpr KotzShape kGaussian{1.0, 0.5, 1.0};
inline constexpr KotzShape kLaplace{0.5, 1.0, 1.0};

class KotzParams {
 public:
  KotzParams(double beta, double lambda, double eta, Index d);

  double beta() const { return beta_; }
  double lambda() const { return lambda_; }
  double eta() const { return eta_; }
  Index dim() const { return d_; }
  double nu() const { return nu_; }
  double alpha() const { return alpha_; }
  KotzShape shape() const { return {beta_, lambda_, eta_}; }

  // Every term of ln p that does not depend on y or D.
  double log_normalizer() const { return log_norm_; }

 private:
  double beta_, lambda_, eta_;
  Index d_;
  double nu_, alpha_, log_norm_;
};

KotzParams derive_kotz(double beta, double lambda, double eta, Index d);
inline KotzParams derive_kotz(const KotzShape& s, Index d) { return derive_kotz(s.beta, s.lambda, s.eta, d); }

enum class Dispersion { ScaleInvariant, ScaleControlled };

// ln p(y) of the Kotz density with dispersion D.
template <typename DerivedY, typename DerivedD>
typename DerivedY::Scalar kotz_log_pdf(const Eigen::MatrixBase<DerivedY>& y, const Eigen::MatrixBase<DerivedD>& D,
                                       const KotzParams& p) {
  using Scalar = typename DerivedY::Scalar;
  if (y.size() != p.dim() || D.rows() != p.dim() || D.cols() != p.dim())
    throw ShapeError("kotz_log_pdf: dimension mismatch");
  const auto llt = linalg::robust_llt(D.derived(), "kotz_log_pdf dispersion");
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> u = llt.matrixL().solve(y.derived().eval());
  const Scalar q = u.squaredNorm();
  Scalar out = Scalar(p.log_normalizer()) - Scalar(0.5) * linalg::log_det<Scalar>(llt);
  if (p.eta() != 1.0) out += Scalar(p.eta() - 1.0) * std::log(q);
  out -= Scalar(p.lambda()) * std::pow(q, Scalar(p.beta()));
  return out;
}

}  // namespace misa
