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

#include "misa/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "misa/rng.hpp"

namespace misa {

Matrix gen_mixing(Index V, Index C, double cond_target, std::uint64_t seed) {
  if (!(cond_target >= 1.0)) throw DomainError("gen_mixing: cond_target must be >= 1");
  if (V < C || C < 1) throw PreconditionError("gen_mixing: need V >= C >= 1");
  Rng rng(seed);
  const Matrix G = rng.normal_matrix(V, C);
  Eigen::JacobiSVD<Matrix> svd(G, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Vector s = svd.singularValues();
  if (cond_target == 1.0) {
    s.setConstant(s.mean());
  } else {
    const double smax = s.maxCoeff(), smin = s.minCoeff();
    s.array() += (smax - cond_target * smin) / (cond_target - 1.0);
  }
  return svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
}

double snr_scale(const Matrix& A, Index V, double snr_db) {
  if (std::isinf(snr_db) && snr_db > 0) return 0.0;
  const double snr = std::pow(10.0, snr_db / 10.0);
  if (!(snr > 1.0)) throw DomainError("snr_scale: SNR must exceed 1 (snr_db > 0)");
  return std::sqrt(A.squaredNorm() / (static_cast<double>(V) * (snr - 1.0)));
}

Matrix toeplitz_corr(Index d, double rho_max) {
  if (d < 1) throw DomainError("toeplitz_corr: d must be >= 1");
  if (!(rho_max >= 0.0 && rho_max < 1.0)) throw DomainError("toeplitz_corr: rho_max must be in [0, 1)");
  Vector col(d);
  for (Index i = 0; i < d; ++i) col(i) = std::pow(rho_max, static_cast<double>(i));
  return linalg::toeplitz(col);
}

Matrix sample_mvlaplace(Index d, const Matrix& R, Index N, std::uint64_t seed) {
  if (R.rows() != d || R.cols() != d) throw ShapeError("sample_mvlaplace: R must be d x d");
  Eigen::LLT<Matrix> llt(R);
  if (llt.info() != Eigen::Success || ((R.diagonal().array() - 1.0).abs() > 1e-12).any())
    throw DefinitenessError("sample_mvlaplace: R is not a valid correlation matrix");
  Rng rng(seed);
  // u = r * direction with r ~ Gamma(d, 1) has density proportional to exp(-|u|)
  // and covariance (d + 1) I
  Matrix U(d, N);
  for (Index n = 0; n < N; ++n) {
    Vector g(d);
    double norm = 0.0;
    do {
      for (Index i = 0; i < d; ++i) g(i) = rng.normal();
      norm = g.norm();
    } while (norm == 0.0);
    U.col(n) = g * (rng.gamma(static_cast<double>(d)) / norm);
  }
  return (llt.matrixL() * U) / std::sqrt(static_cast<double>(d + 1));
}

double normal_to_laplace(double g) {
  const double b = 1.0 / std::numbers::sqrt2;
  const double tail = std::erfc(std::abs(g) / std::numbers::sqrt2);  // 2 * P(Z > |g|)
  return (g < 0 ? b : -b) * std::log(tail);
}

Matrix exponential_autocorrelation(Index N, double lag1) { return toeplitz_corr(N, lag1); }

namespace {

Matrix draw_copula(const std::vector<const Matrix*>& chol, Index N, std::uint64_t seed) {
  Rng rng(seed);
  Matrix Y(chol.size(), N);
  Vector g(N);
  for (std::size_t i = 0; i < chol.size(); ++i) {
    for (Index n = 0; n < N; ++n) g(n) = rng.normal();
    const Vector z = chol[i]->triangularView<Eigen::Lower>() * g;
    for (Index n = 0; n < N; ++n) Y(i, n) = normal_to_laplace(z(n));
  }
  return Y;
}

Matrix correlation(const Matrix& Y) {
  const Matrix Yc = Y.colwise() - Y.rowwise().mean();
  const Matrix S = Yc * Yc.transpose();
  const Vector s = S.diagonal().cwiseSqrt().cwiseInverse();
  return s.asDiagonal() * S * s.asDiagonal();
}

}  // namespace

CopulaResult sample_copula_sources(const std::vector<Matrix>& blocks, int draws, std::uint64_t seed) {
  if (blocks.empty()) throw ShapeError("sample_copula_sources: no sources");
  if (draws < 1) throw DomainError("sample_copula_sources: draws must be >= 1");
  const Index N = blocks.front().rows();
  // identical blocks share one factor
  std::vector<Matrix> factors;
  std::vector<const Matrix*> chol;
  std::vector<std::size_t> owner;
  for (const auto& B : blocks) {
    if (B.rows() != N || B.cols() != N) throw ShapeError("sample_copula_sources: blocks must all be N x N");
    std::size_t hit = factors.size();
    for (std::size_t j = 0; j < owner.size(); ++j)
      if (blocks[owner[j]] == B) hit = j;
    if (hit == factors.size()) {
      Eigen::LLT<Matrix> llt(B);
      if (llt.info() != Eigen::Success) throw DefinitenessError("sample_copula_sources: degenerate autocorrelation");
      factors.push_back(llt.matrixL());
      owner.push_back(&B - blocks.data());
    }
  }
  for (const auto& B : blocks) {
    for (std::size_t j = 0; j < owner.size(); ++j)
      if (blocks[owner[j]] == B) {
        chol.push_back(&factors[j]);
        break;
      }
  }

  const Index C = static_cast<Index>(blocks.size());
  const Index P = C * (C - 1) / 2;
  std::vector<double> tri(static_cast<std::size_t>(P) * draws);
  for (int t = 0; t < draws; ++t) {
    const Matrix R = correlation(draw_copula(chol, N, derive_seed(seed, t)));
    Index at = 0;
    for (Index i = 0; i < C; ++i)
      for (Index j = i + 1; j < C; ++j) tri[static_cast<std::size_t>(t) * P + at++] = R(i, j);
  }
  CopulaResult out;
  out.median_corr = Matrix::Identity(C, C);
  Vector med(P);
  std::vector<double> col(draws);
  for (Index p = 0; p < P; ++p) {
    for (int t = 0; t < draws; ++t) col[t] = tri[static_cast<std::size_t>(t) * P + p];
    std::sort(col.begin(), col.end());
    med(p) = draws % 2 ? col[draws / 2] : 0.5 * (col[draws / 2 - 1] + col[draws / 2]);
  }
  Index at = 0;
  for (Index i = 0; i < C; ++i)
    for (Index j = i + 1; j < C; ++j) out.median_corr(i, j) = out.median_corr(j, i) = med(at++);

  double best = HUGE_VAL;
  for (int t = 0; t < draws; ++t) {
    double dist = 0.0;
    for (Index p = 0; p < P; ++p) {
      const double e = tri[static_cast<std::size_t>(t) * P + p] - med(p);
      dist += 2.0 * e * e;
    }
    if (dist < best) {
      best = dist;
      out.accepted = t;
    }
  }
  out.distance = std::sqrt(best);
  out.Y = draw_copula(chol, N, derive_seed(seed, out.accepted));
  return out;
}

void SimSpec::validate() const {
  const std::size_t M = V.size();
  if (M == 0 || assignment.num_datasets() != M) throw ShapeError("SimSpec: V and assignment disagree on M");
  if (N < 2) throw ShapeError("SimSpec: N must be >= 2");
  for (std::size_t m = 0; m < M; ++m)
    if (V[m] < assignment.sources_per_dataset()[m])
      throw PreconditionError("SimSpec: dataset " + std::to_string(m) + " has V < C");
  if (cond.size() != 1 && cond.size() != M) throw ShapeError("SimSpec: cond needs 1 or M entries");
  if (rho_max.size() != 1 && static_cast<Index>(rho_max.size()) != assignment.num_subspaces())
    throw ShapeError("SimSpec: rho_max needs 1 or K entries");
  for (double c : cond)
    if (!(c >= 1.0)) throw DomainError("SimSpec: cond must be >= 1");
  for (double r : rho_max)
    if (!(r >= 0.0 && r < 1.0)) throw DomainError("SimSpec: rho_max must be in [0, 1)");
}

Instance build_instance(const SimSpec& spec) {
  spec.validate();
  const SubspaceAssignment& P = spec.assignment;
  const std::size_t M = spec.V.size();
  const std::uint64_t mix_seed = derive_seed(spec.seed, 0), src_seed = derive_seed(spec.seed, 1),
                      noise_seed = derive_seed(spec.seed, 2);
  Instance inst;
  inst.P = P;
  GroundTruth& gt = inst.truth;

  gt.Y.resize(P.num_sources(), spec.N);
  for (Index k = 0; k < P.num_subspaces(); ++k) {
    const Index d = P.dim(k);
    const double rho = spec.rho_max.size() == 1 ? spec.rho_max[0] : spec.rho_max[k];
    const Matrix R = toeplitz_corr(d, rho);
    Matrix Yk;
    if (spec.family == SourceFamily::MultivariateLaplace) {
      Yk = sample_mvlaplace(d, R, spec.N, derive_seed(src_seed, k));
    } else {
      Rng rng(derive_seed(src_seed, k));
      const Matrix L = Eigen::LLT<Matrix>(R).matrixL();
      Yk = (L * rng.normal_matrix(d, spec.N)).unaryExpr([](double g) { return normal_to_laplace(g); });
    }
    for (Index r = 0; r < d; ++r) gt.Y.row(P.members(k)[r]) = Yk.row(r);
  }

  std::vector<Matrix> A, X;
  for (std::size_t m = 0; m < M; ++m) {
    const Index Cm = P.sources_per_dataset()[m];
    const double c = spec.cond.size() == 1 ? spec.cond[0] : spec.cond[m];
    Matrix Am = gen_mixing(spec.V[m], Cm, c, derive_seed(mix_seed, m));
    Eigen::JacobiSVD<Matrix> svd(Am);
    gt.realized_cond.push_back(svd.singularValues().maxCoeff() / svd.singularValues().minCoeff());
    const double a = snr_scale(Am, spec.V[m], spec.snr_db);
    gt.noise_scale.push_back(a);
    Matrix Xm = Am * gt.Y.middleRows(P.offset(m), Cm);
    if (a > 0) {
      Rng rng(derive_seed(noise_seed, m));
      gt.noise.push_back(rng.normal_matrix(spec.V[m], spec.N));
      Xm += a * gt.noise.back();
    } else {
      gt.noise.emplace_back();
    }
    A.push_back(std::move(Am));
    X.push_back(std::move(Xm));
  }
  gt.A = BlockTransform(std::move(A));
  inst.X = MultiDataset(std::move(X));
  return inst;
}

Matrix dataset_sources(const Matrix& Y, const SubspaceAssignment& P, std::size_t m) {
  return Y.middleRows(P.offset(m), P.sources_per_dataset()[m]);
}

}  // namespace misa
