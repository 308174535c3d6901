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

#include "misa/objective.hpp"

#include <cmath>

namespace misa {

ObjectiveContext::ObjectiveContext(MultiDataset X, SubspaceAssignment P, std::vector<KotzParams> kotz, Dispersion mode)
    : X_(std::move(X)), P_(std::move(P)), kotz_(std::move(kotz)), mode_(mode) {
  if (P_.num_datasets() != X_.size()) throw ShapeError("ObjectiveContext: dataset count mismatch");
  if (static_cast<Index>(kotz_.size()) != P_.num_subspaces())
    throw ShapeError("ObjectiveContext: need one KotzParams per subspace");
  for (Index k = 0; k < P_.num_subspaces(); ++k) {
    if (kotz_[k].dim() != P_.dim(k)) throw ShapeError("ObjectiveContext: KotzParams dimension mismatch");
    f_ += kotz_[k].log_normalizer();
  }
  for (const auto& b : X_.blocks()) {
    Matrix g = Matrix::Zero(b.rows(), b.rows());
    g.selfadjointView<Eigen::Lower>().rankUpdate(b);
    gram_.push_back(g.selfadjointView<Eigen::Lower>());
  }
}

namespace {
std::vector<KotzParams> uniform_kotz(const SubspaceAssignment& P, KotzShape s) {
  std::vector<KotzParams> out;
  for (Index k = 0; k < P.num_subspaces(); ++k) out.push_back(derive_kotz(s, P.dim(k)));
  return out;
}
}  // namespace

ObjectiveContext::ObjectiveContext(MultiDataset X, SubspaceAssignment P, KotzShape shape, Dispersion mode)
    : ObjectiveContext(std::move(X), P, uniform_kotz(P, shape), mode) {}

SubspaceTerm subspace_term(const Matrix& Y, const KotzParams& p, Dispersion mode, bool with_gradient, Index subspace) {
  const Index d = Y.rows();
  const double N = static_cast<double>(Y.cols());
  Matrix S = Matrix::Zero(d, d);
  S.selfadjointView<Eigen::Lower>().rankUpdate(Y);
  S = S.selfadjointView<Eigen::Lower>();

  Matrix D;
  Vector gam;
  if (mode == Dispersion::ScaleInvariant) {
    D = S / ((N - 1.0) * p.alpha());
  } else {
    if ((S.diagonal().array() <= 0.0).any())
      throw DefinitenessError("subspace " + std::to_string(subspace) + ": zero-variance source");
    gam = S.diagonal().cwiseSqrt().cwiseInverse();
    D = gam.asDiagonal() * S * gam.asDiagonal();
  }
  const auto llt = linalg::robust_llt(D, "subspace " + std::to_string(subspace) + " dispersion");
  const Matrix Q = llt.matrixL().solve(Y);
  const Eigen::ArrayXd z = Q.colwise().squaredNorm().transpose().array();

  SubspaceTerm out;
  out.jc = linalg::log_det<double>(llt);
  if (p.eta() != 1.0) out.jf = (p.eta() - 1.0) / N * z.log().sum();
  out.je = p.lambda() / N * z.pow(p.beta()).sum();
  out.value = 0.5 * out.jc - p.log_normalizer() - out.jf + out.je;
  if (!with_gradient) return out;

  Eigen::ArrayXd t = 2.0 * p.lambda() * p.beta() / N * z.pow(p.beta() - 1.0);
  if (p.eta() != 1.0) t -= 2.0 * (p.eta() - 1.0) / N / z;
  const Matrix DiY = llt.matrixU().solve(Q);
  const Matrix DiYt = DiY * t.matrix().asDiagonal();
  Matrix G = 0.5 * llt.solve(Matrix::Identity(d, d));
  G.noalias() -= 0.5 * DiYt * DiY.transpose();

  Matrix H;
  if (mode == Dispersion::ScaleInvariant) {
    H = G / (p.alpha() * (N - 1.0));
  } else {
    H = gam.asDiagonal() * G * gam.asDiagonal();
    const Vector gd = (G * D).diagonal();
    H.diagonal() -= gd.cwiseProduct(gam.cwiseAbs2());
  }
  out.grad_y = DiYt;
  out.grad_y.noalias() += 2.0 * H * Y;
  return out;
}

ObjectiveReport evaluate(const ObjectiveContext& ctx, const BlockTransform& W, bool with_gradient) {
  const MultiDataset& X = ctx.data();
  const SubspaceAssignment& P = ctx.assignment();
  check_shapes(X, P, W);
  const Index N = X.n_obs();

  std::vector<Matrix> Ym(X.size());
  for (std::size_t m = 0; m < X.size(); ++m) Ym[m].noalias() = W[m] * X[m];

  ObjectiveReport rep;
  rep.terms.f = ctx.f_constant();
  std::vector<Matrix> GY;
  if (with_gradient)
    for (std::size_t m = 0; m < X.size(); ++m) GY.push_back(Matrix::Zero(Ym[m].rows(), N));

  for (Index k = 0; k < P.num_subspaces(); ++k) {
    const auto& mem = P.members(k);
    Matrix Yk(mem.size(), N);
    for (std::size_t r = 0; r < mem.size(); ++r) {
      const std::size_t m = P.dataset_of(mem[r]);
      Yk.row(r) = Ym[m].row(mem[r] - P.offset(m));
    }
    const SubspaceTerm st = subspace_term(Yk, ctx.kotz()[k], ctx.dispersion(), with_gradient, k);
    rep.terms.jc += st.jc;
    rep.terms.jf += st.jf;
    rep.terms.je += st.je;
    if (with_gradient) {
      for (std::size_t r = 0; r < mem.size(); ++r) {
        const std::size_t m = P.dataset_of(mem[r]);
        GY[m].row(mem[r] - P.offset(m)) = st.grad_y.row(r);
      }
    }
  }

  std::vector<Matrix> grads;
  for (std::size_t m = 0; m < X.size(); ++m) {
    const linalg::Svd f = linalg::full_rank_svd(W[m], "W block " + std::to_string(m));
    rep.terms.jd += f.s.array().log().sum();
    if (with_gradient) {
      Matrix g = GY[m] * X[m].transpose();
      g.noalias() -= f.U * f.s.cwiseInverse().asDiagonal() * f.V.transpose();
      grads.push_back(std::move(g));
    }
  }
  rep.value = rep.terms.combine();
  if (with_gradient) rep.gradient = BlockTransform(std::move(grads));
  return rep;
}

BlockTransform relative_gradient(const BlockTransform& grad, const BlockTransform& W) {
  if (grad.size() != W.size()) throw ShapeError("relative_gradient: block count mismatch");
  std::vector<Matrix> out;
  for (std::size_t m = 0; m < W.size(); ++m) {
    if (grad[m].rows() != W[m].rows() || grad[m].cols() != W[m].cols())
      throw ShapeError("relative_gradient: block shape mismatch");
    out.push_back((grad[m] * W[m].transpose()) * W[m]);
  }
  return BlockTransform(std::move(out));
}

}  // namespace misa
