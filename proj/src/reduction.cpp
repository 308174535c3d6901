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

#include "misa/reduction.hpp"

#include <cmath>

#include "misa/rng.hpp"

namespace misa {

namespace {

Matrix gram_of(const Matrix& X) {
  Matrix g = Matrix::Zero(X.rows(), X.rows());
  g.selfadjointView<Eigen::Lower>().rankUpdate(X);
  return g.selfadjointView<Eigen::Lower>();
}

std::vector<Matrix> grams_of(const MultiDataset& X) {
  std::vector<Matrix> g;
  for (const auto& b : X.blocks()) g.push_back(gram_of(b));
  return g;
}

void check_pre_shapes(const BlockTransform& W, const std::vector<Matrix>& grams) {
  if (W.size() != grams.size() || W.size() == 0) throw ShapeError("PRE: dataset count mismatch");
  for (std::size_t m = 0; m < W.size(); ++m) {
    if (W[m].cols() != grams[m].rows()) throw ShapeError("PRE: W block " + std::to_string(m) + " does not fit the data");
    if (!(grams[m].trace() > 0)) throw DomainError("PRE: dataset " + std::to_string(m) + " has zero power");
  }
}

}  // namespace

double pre_value_gram(const BlockTransform& W, const std::vector<Matrix>& grams) {
  check_pre_shapes(W, grams);
  double e = 0.0;
  for (std::size_t m = 0; m < W.size(); ++m) {
    const linalg::Svd f = linalg::full_rank_svd(W[m], "PRE block " + std::to_string(m));
    // residual power tr((I - P) S) with P = V V^T
    const Matrix SV = grams[m] * f.V;
    const double total = grams[m].trace();
    const double kept = (f.V.transpose() * SV).trace();
    e += std::max(0.0, total - kept) / total;
  }
  return e / static_cast<double>(W.size());
}

BlockTransform pre_gradient_gram(const BlockTransform& W, const std::vector<Matrix>& grams) {
  check_pre_shapes(W, grams);
  const double M = static_cast<double>(W.size());
  std::vector<Matrix> out;
  for (std::size_t m = 0; m < W.size(); ++m) {
    const linalg::Svd f = linalg::full_rank_svd(W[m], "PRE block " + std::to_string(m));
    const Matrix pinvT = f.U * f.s.cwiseInverse().asDiagonal() * f.V.transpose();
    // -2 (W^-)^T S (I - P) / tr(S)
    const Matrix T = pinvT * grams[m];
    Matrix g = T - (T * f.V) * f.V.transpose();
    g *= -2.0 / (grams[m].trace() * M);
    out.push_back(std::move(g));
  }
  return BlockTransform(std::move(out));
}

double pre_value(const BlockTransform& W, const MultiDataset& X) { return pre_value_gram(W, grams_of(X)); }

BlockTransform pre_gradient(const BlockTransform& W, const MultiDataset& X) {
  return pre_gradient_gram(W, grams_of(X));
}

double re_wt_value(const BlockTransform& W, const MultiDataset& X) {
  const auto grams = grams_of(X);
  check_pre_shapes(W, grams);
  double e = 0.0;
  for (std::size_t m = 0; m < W.size(); ++m) {
    Matrix K = W[m].transpose() * W[m];
    K.diagonal().array() -= 1.0;
    e += (K * grams[m] * K).trace() / grams[m].trace();
  }
  return e / static_cast<double>(W.size());
}

BlockTransform re_wt_gradient(const BlockTransform& W, const MultiDataset& X) {
  const auto grams = grams_of(X);
  check_pre_shapes(W, grams);
  std::vector<Matrix> out;
  for (std::size_t m = 0; m < W.size(); ++m) {
    Matrix K = W[m].transpose() * W[m];
    K.diagonal().array() -= 1.0;
    const Matrix KS = K * grams[m];
    out.push_back(2.0 * W[m] * (KS + KS.transpose()) / (grams[m].trace() * static_cast<double>(W.size())));
  }
  return BlockTransform(std::move(out));
}

BlockTransform optimal_estimator(const BlockTransform& W, const MultiDataset& X) {
  if (W.size() != X.size()) throw ShapeError("optimal_estimator: dataset count mismatch");
  std::vector<Matrix> out;
  for (std::size_t m = 0; m < W.size(); ++m) {
    const Matrix Sx = gram_of(X[m]) / static_cast<double>(X.n_obs() - 1);
    const Matrix SxWt = Sx * W[m].transpose();
    const Matrix Sy = W[m] * SxWt;
    Eigen::LLT<Matrix> llt(Sy);
    if (llt.info() != Eigen::Success)
      throw DefinitenessError("optimal_estimator: source covariance of block " + std::to_string(m) + " is singular");
    out.push_back(llt.solve(SxWt.transpose()).transpose());
  }
  return BlockTransform(std::move(out));
}

Matrix whitening_matrix(const Matrix& X) {
  return linalg::inv_sqrt_sym(gram_of(X) / static_cast<double>(X.cols() - 1));
}

Matrix random_row_orthonormal(Index rows, Index cols, std::uint64_t seed) {
  Rng rng(seed);
  return linalg::row_orthonormalize(rng.normal_matrix(rows, cols));
}

ReductionResult reduce_data(const MultiDataset& X, const std::vector<Index>& target_dims, const ReductionOptions& opts) {
  if (target_dims.size() != X.size()) throw ShapeError("reduce_data: need one target dimension per dataset");
  if (!(opts.precision > 0)) throw DomainError("reduce_data: precision must be > 0");
  ReductionResult res;
  std::vector<Matrix> B, Z;
  for (std::size_t m = 0; m < X.size(); ++m) {
    const Index C = target_dims[m];
    if (C < 1 || C > X[m].rows())
      throw PreconditionError("reduce_data: target dimension " + std::to_string(C) + " invalid for dataset " +
                              std::to_string(m) + " with " + std::to_string(X[m].rows()) + " rows");
    const std::vector<Matrix> g{gram_of(X[m])};
    const BlockTransform shape{std::vector<Matrix>{Matrix::Zero(C, X[m].rows())}};
    const Matrix B0 = random_row_orthonormal(C, X[m].rows(), derive_seed(opts.seed, m));

    auto f = [&](const Vector& x) {
      const BlockTransform Wb = shape.unflatten(x);
      Evaluation e;
      try {
        e.value = pre_value_gram(Wb, g);
        e.gradient = pre_gradient_gram(Wb, g).flatten();
      } catch (const RankError&) {
        e.value = HUGE_VAL;
      }
      return e;
    };
    const BlockTransform start{std::vector<Matrix>{B0}};
    const double g0 = pre_gradient_gram(start, g).flatten().norm();
    Matrix Bm = B0;
    int iters = 0;
    Status st = Status::ConvergedFun;
    if (g0 > 0 && std::isfinite(g0)) {
      OptimOptions o = opts.optim;
      o.tol_fun = o.tol_x = std::pow(10.0, std::floor(std::log10(g0))) / opts.precision;
      const OptimResult r = minimize(f, start.flatten(), o);
      Bm = shape.unflatten(r.x)[0];
      iters = r.iterations;
      st = r.status;
    }
    res.final_error.push_back(pre_value_gram(BlockTransform{std::vector<Matrix>{Bm}}, g));
    res.iterations.push_back(iters);
    res.status.push_back(st);
    Z.push_back(Bm * X[m]);
    B.push_back(std::move(Bm));
  }
  res.B_star = BlockTransform(std::move(B));
  res.reduced = MultiDataset(std::move(Z));
  return res;
}

GpcaResult gpca(const MultiDataset& X, Index C) {
  Index total = 0;
  for (Index v : X.dims()) total += v;
  if (C < 1 || C > total) throw RankError("gpca: C exceeds the concatenated dimension");
  Matrix cat(total, X.n_obs());
  Index at = 0;
  for (const auto& b : X.blocks()) {
    cat.middleRows(at, b.rows()) = b;
    at += b.rows();
  }
  const Matrix cov = gram_of(cat) / static_cast<double>(X.n_obs() - 1);
  Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
  if (es.info() != Eigen::Success) throw DefinitenessError("gpca: eigendecomposition failed");
  // eigenvalues ascend; take the last C in reverse
  const Vector ev = es.eigenvalues().reverse();
  const Matrix E = es.eigenvectors().rowwise().reverse();
  if (!(ev(C - 1) > 1e-12 * ev(0))) throw RankError("gpca: C exceeds the numerical rank of the data");
  GpcaResult out;
  out.eigenvalues = ev.head(C);
  out.axes = E.leftCols(C);
  const Matrix Wc = out.eigenvalues.cwiseSqrt().cwiseInverse().asDiagonal() * out.axes.transpose();
  std::vector<Matrix> blocks;
  at = 0;
  for (const auto& b : X.blocks()) {
    blocks.push_back(Wc.middleCols(at, b.rows()));
    at += b.rows();
  }
  out.W = BlockTransform(std::move(blocks));
  return out;
}

}  // namespace misa
