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

#include "misa/model.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace misa {

MultiDataset::MultiDataset(std::vector<Matrix> blocks) : blocks_(std::move(blocks)) {
  if (blocks_.empty()) throw ShapeError("MultiDataset: need at least one dataset");
  const Index n = blocks_.front().cols();
  if (n < 2) throw ShapeError("MultiDataset: need at least two observations");
  for (std::size_t m = 0; m < blocks_.size(); ++m) {
    if (blocks_[m].rows() < 1) throw ShapeError("MultiDataset: dataset " + std::to_string(m) + " has no rows");
    if (blocks_[m].cols() != n)
      throw ShapeError("MultiDataset: dataset " + std::to_string(m) + " has " + std::to_string(blocks_[m].cols()) +
                       " observations, expected " + std::to_string(n));
  }
}

std::vector<Index> MultiDataset::dims() const {
  std::vector<Index> v;
  for (const auto& b : blocks_) v.push_back(b.rows());
  return v;
}

SubspaceAssignment::SubspaceAssignment(std::vector<Index> labels, std::vector<Index> sources_per_dataset)
    : labels_(std::move(labels)), counts_(std::move(sources_per_dataset)) {
  Index total = 0;
  for (Index c : counts_) {
    if (c < 0) throw ShapeError("SubspaceAssignment: negative source count");
    offsets_.push_back(total);
    total += c;
  }
  if (total != static_cast<Index>(labels_.size()))
    throw ShapeError("SubspaceAssignment: " + std::to_string(labels_.size()) + " labels for " + std::to_string(total) +
                     " sources");
  std::map<Index, Index> relabel;
  for (Index l : labels_) {
    if (l < 0) throw ShapeError("SubspaceAssignment: negative label");
    relabel.emplace(l, 0);
  }
  Index next = 0;
  for (auto& [_, v] : relabel) v = next++;
  members_.assign(relabel.size(), {});
  for (Index c = 0; c < total; ++c) {
    labels_[c] = relabel[labels_[c]];
    members_[labels_[c]].push_back(c);
  }
}

SubspaceAssignment SubspaceAssignment::from_matrix(const Matrix& P, std::vector<Index> sources_per_dataset) {
  std::vector<Index> labels(P.cols());
  for (Index c = 0; c < P.cols(); ++c) {
    Index hits = 0;
    for (Index k = 0; k < P.rows(); ++k) {
      if (P(k, c) == 1.0) {
        labels[c] = k;
        ++hits;
      } else if (P(k, c) != 0.0) {
        throw ShapeError("SubspaceAssignment: entries must be 0 or 1");
      }
    }
    if (hits != 1) throw ShapeError("SubspaceAssignment: column " + std::to_string(c) + " needs exactly one 1");
  }
  return SubspaceAssignment(std::move(labels), std::move(sources_per_dataset));
}

SubspaceAssignment SubspaceAssignment::singletons(std::vector<Index> sources_per_dataset) {
  const Index total = std::accumulate(sources_per_dataset.begin(), sources_per_dataset.end(), Index{0});
  std::vector<Index> labels(total);
  std::iota(labels.begin(), labels.end(), Index{0});
  return SubspaceAssignment(std::move(labels), std::move(sources_per_dataset));
}

SubspaceAssignment SubspaceAssignment::linked(Index datasets, Index sources) {
  std::vector<Index> labels;
  for (Index m = 0; m < datasets; ++m)
    for (Index i = 0; i < sources; ++i) labels.push_back(i);
  return SubspaceAssignment(std::move(labels), std::vector<Index>(datasets, sources));
}

SubspaceAssignment SubspaceAssignment::consecutive(const std::vector<Index>& sizes) {
  std::vector<Index> labels;
  for (std::size_t k = 0; k < sizes.size(); ++k)
    for (Index i = 0; i < sizes[k]; ++i) labels.push_back(static_cast<Index>(k));
  const Index total = static_cast<Index>(labels.size());
  return SubspaceAssignment(std::move(labels), {total});
}

std::vector<Index> SubspaceAssignment::dims() const {
  std::vector<Index> d;
  for (const auto& m : members_) d.push_back(static_cast<Index>(m.size()));
  return d;
}

std::size_t SubspaceAssignment::dataset_of(Index c) const {
  auto it = std::upper_bound(offsets_.begin(), offsets_.end(), c);
  std::size_t m = static_cast<std::size_t>(it - offsets_.begin()) - 1;
  while (counts_[m] == 0) --m;  // empty datasets share an offset with the next
  return m;
}

std::vector<Index> SubspaceAssignment::dataset_labels(std::size_t m) const {
  return {labels_.begin() + offsets_[m], labels_.begin() + offsets_[m] + counts_[m]};
}

SubspaceAssignment SubspaceAssignment::slice(std::size_t m) const {
  return SubspaceAssignment(dataset_labels(m), {counts_[m]});
}

Matrix SubspaceAssignment::matrix() const {
  Matrix P = Matrix::Zero(num_subspaces(), num_sources());
  for (Index c = 0; c < num_sources(); ++c) P(labels_[c], c) = 1.0;
  return P;
}

bool SubspaceAssignment::same_partition(const SubspaceAssignment& other) const {
  if (counts_ != other.counts_ || num_subspaces() != other.num_subspaces()) return false;
  auto sets = [](const SubspaceAssignment& a) {
    std::vector<std::vector<Index>> s(a.members_);
    std::sort(s.begin(), s.end());
    return s;
  };
  return sets(*this) == sets(other);
}

BlockTransform BlockTransform::identity(const std::vector<Index>& dims) {
  std::vector<Matrix> b;
  for (Index d : dims) b.push_back(Matrix::Identity(d, d));
  return BlockTransform(std::move(b));
}

BlockTransform BlockTransform::zeros_like(const BlockTransform& other) {
  std::vector<Matrix> b;
  for (const auto& m : other.blocks_) b.push_back(Matrix::Zero(m.rows(), m.cols()));
  return BlockTransform(std::move(b));
}

Index BlockTransform::num_params() const {
  Index n = 0;
  for (const auto& b : blocks_) n += b.size();
  return n;
}

Vector BlockTransform::flatten() const {
  Vector x(num_params());
  Index at = 0;
  for (const auto& b : blocks_)
    for (Index i = 0; i < b.rows(); ++i)
      for (Index j = 0; j < b.cols(); ++j) x(at++) = b(i, j);
  return x;
}

BlockTransform BlockTransform::unflatten(const Vector& x) const {
  if (x.size() != num_params()) throw ShapeError("BlockTransform::unflatten: size mismatch");
  BlockTransform out = zeros_like(*this);
  Index at = 0;
  for (auto& b : out.blocks_)
    for (Index i = 0; i < b.rows(); ++i)
      for (Index j = 0; j < b.cols(); ++j) b(i, j) = x(at++);
  return out;
}

BlockTransform BlockTransform::operator*(const BlockTransform& other) const {
  if (other.size() != size()) throw ShapeError("BlockTransform product: block count mismatch");
  std::vector<Matrix> b;
  for (std::size_t m = 0; m < size(); ++m) {
    if (blocks_[m].cols() != other[m].rows()) throw ShapeError("BlockTransform product: inner dimension mismatch");
    b.push_back(blocks_[m] * other[m]);
  }
  return BlockTransform(std::move(b));
}

MultiDataset BlockTransform::apply(const MultiDataset& X) const {
  if (X.size() != size()) throw ShapeError("BlockTransform::apply: dataset count mismatch");
  std::vector<Matrix> out;
  for (std::size_t m = 0; m < size(); ++m) {
    if (blocks_[m].cols() != X[m].rows()) throw ShapeError("BlockTransform::apply: dimension mismatch");
    out.push_back(blocks_[m] * X[m]);
  }
  return MultiDataset(std::move(out));
}

Matrix BlockTransform::dense() const {
  Index r = 0, c = 0;
  for (const auto& b : blocks_) {
    r += b.rows();
    c += b.cols();
  }
  Matrix D = Matrix::Zero(r, c);
  r = c = 0;
  for (const auto& b : blocks_) {
    D.block(r, c, b.rows(), b.cols()) = b;
    r += b.rows();
    c += b.cols();
  }
  return D;
}

void check_shapes(const MultiDataset& X, const SubspaceAssignment& P, const BlockTransform& W) {
  if (W.size() != X.size() || P.num_datasets() != X.size()) throw ShapeError("dataset count mismatch");
  for (std::size_t m = 0; m < X.size(); ++m) {
    if (W[m].cols() != X[m].rows())
      throw ShapeError("W block " + std::to_string(m) + " has " + std::to_string(W[m].cols()) + " columns, data has " +
                       std::to_string(X[m].rows()) + " rows");
    if (W[m].rows() != P.sources_per_dataset()[m])
      throw ShapeError("W block " + std::to_string(m) + " has " + std::to_string(W[m].rows()) +
                       " rows, assignment has " + std::to_string(P.sources_per_dataset()[m]) + " sources");
  }
}

KotzParams::KotzParams(double beta, double lambda, double eta, Index d) : beta_(beta), lambda_(lambda), eta_(eta), d_(d) {
  if (d < 1) throw DomainError("kotz: dimension d must be >= 1");
  if (!(beta > 0)) throw DomainError("kotz: beta must be > 0");
  if (!(lambda > 0)) throw DomainError("kotz: lambda must be > 0");
  const double dd = static_cast<double>(d);
  if (!(eta > (2.0 - dd) / 2.0)) throw DomainError("kotz: eta must be > (2 - d)/2");
  nu_ = (2.0 * eta + dd - 2.0) / (2.0 * beta);
  alpha_ = std::exp(std::lgamma(nu_ + 1.0 / beta) - std::lgamma(nu_) - std::log(lambda) / beta) / dd;
  log_norm_ = std::log(beta) + nu_ * std::log(lambda) + std::lgamma(dd / 2.0) - dd / 2.0 * std::log(std::numbers::pi) -
              std::lgamma(nu_);
}

KotzParams derive_kotz(double beta, double lambda, double eta, Index d) { return KotzParams(beta, lambda, eta, d); }

}  // namespace misa
