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

#include <doctest.h>

#include <cmath>
#include <numbers>

#include "misa/model.hpp"
#include "misa/rng.hpp"

using namespace misa;

TEST_CASE("derive_kotz closed forms") {
  const KotzParams g1 = derive_kotz(1.0, 0.5, 1.0, 1);
  CHECK(g1.nu() == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(g1.alpha() == doctest::Approx(1.0).epsilon(1e-14));
  const KotzParams l1 = derive_kotz(0.5, 1.0, 1.0, 1);
  CHECK(l1.nu() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(l1.alpha() == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(derive_kotz(kGaussian, 2).nu() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(derive_kotz(0.0, 1.0, 1.0, 1), DomainError);
  CHECK_THROWS_AS(derive_kotz(1.0, -1.0, 1.0, 1), DomainError);
  CHECK_THROWS_AS(derive_kotz(1.0, 1.0, 1.0, 0), DomainError);
}

TEST_CASE("kotz_log_pdf reference points") {
  Vector y0 = Vector::Zero(1);
  Matrix D = Matrix::Identity(1, 1);
  CHECK(kotz_log_pdf(y0, D, derive_kotz(kGaussian, 1)) ==
        doctest::Approx(-0.5 * std::log(2.0 * std::numbers::pi)).epsilon(1e-14));
  D(0, 0) = 0.5;
  CHECK(kotz_log_pdf(y0, D, derive_kotz(kLaplace, 1)) == doctest::Approx(-0.5 * std::log(2.0)).epsilon(1e-14));
  const KotzParams g2 = derive_kotz(kGaussian, 2);
  const Matrix D2 = Matrix::Identity(2, 2) / g2.alpha();
  CHECK(kotz_log_pdf(Vector::Zero(2), D2, g2) == doctest::Approx(-std::log(2.0 * std::numbers::pi)).epsilon(1e-14));
}

TEST_CASE("kotz_log_pdf matches Gaussian and Laplace densities away from the origin") {
  Rng rng(7);
  const KotzParams g = derive_kotz(kGaussian, 3);
  const KotzParams l = derive_kotz(kLaplace, 1);
  for (int t = 0; t < 200; ++t) {
    const Matrix B = rng.normal_matrix(3, 3);
    const Matrix S = B * B.transpose() + Matrix::Identity(3, 3);
    const Vector y = rng.normal_matrix(3, 1);
    const double quad = y.dot(S.ldlt().solve(y));
    const double ref = -1.5 * std::log(2.0 * std::numbers::pi) - 0.5 * std::log(S.determinant()) - 0.5 * quad;
    CHECK(kotz_log_pdf(y, S / g.alpha(), g) == doctest::Approx(ref).epsilon(1e-12));

    const double x = rng.normal() * 2.0;
    const Matrix D1 = Matrix::Constant(1, 1, 0.5);
    const double lref = -0.5 * std::log(2.0) - std::sqrt(2.0) * std::abs(x);
    CHECK(kotz_log_pdf(Vector::Constant(1, x), D1, l) == doctest::Approx(lref).epsilon(1e-12));
  }
}

TEST_CASE("kotz density integrates to one in 1-D") {
  for (KotzShape s : {kGaussian, kLaplace, KotzShape{0.8, 1.3, 1.5}}) {
    const KotzParams p = derive_kotz(s, 1);
    const Matrix D = Matrix::Identity(1, 1);
    double total = 0.0;
    const double h = 1e-3;
    for (double x = -40.0; x < 40.0; x += h) {
      const double mid = x + 0.5 * h;
      total += std::exp(kotz_log_pdf(Vector::Constant(1, mid), D, p)) * h;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(2e-3));
  }
}

TEST_CASE("kotz variance equals alpha times dispersion") {
  const KotzParams p = derive_kotz(KotzShape{0.7, 1.1, 1.0}, 1);
  const Matrix D = Matrix::Identity(1, 1);
  double var = 0.0;
  const double h = 1e-3;
  for (double x = -60.0; x < 60.0; x += h) {
    const double mid = x + 0.5 * h;
    var += mid * mid * std::exp(kotz_log_pdf(Vector::Constant(1, mid), D, p)) * h;
  }
  CHECK(var == doctest::Approx(p.alpha()).epsilon(1e-4));
}

TEST_CASE("kotz_log_pdf rejects bad dispersion") {
  const KotzParams p = derive_kotz(kGaussian, 2);
  Matrix D(2, 2);
  D << 1, 2, 2, 1;
  CHECK_THROWS_AS(kotz_log_pdf(Vector::Zero(2), D, p), DefinitenessError);
  CHECK_THROWS_AS(kotz_log_pdf(Vector::Zero(3), Matrix::Identity(2, 2), p), ShapeError);
}

TEST_CASE("SubspaceAssignment construction") {
  const SubspaceAssignment P({0, 1, 0, 2, 1}, {3, 2});
  CHECK(P.num_subspaces() == 3);
  CHECK(P.num_sources() == 5);
  CHECK(P.dims() == std::vector<Index>{2, 2, 1});
  CHECK(P.members(0) == std::vector<Index>{0, 2});
  CHECK(P.dataset_of(3) == 1);
  CHECK(P.dataset_labels(1) == std::vector<Index>{2, 1});
  CHECK(SubspaceAssignment::from_matrix(P.matrix(), {3, 2}) == P);
  CHECK(P.matrix().colwise().sum().isOnes());

  const SubspaceAssignment gaps({4, 9, 4}, {3});
  CHECK(gaps.labels() == std::vector<Index>{0, 1, 0});
  CHECK(SubspaceAssignment({1, 1, 0}, {3}).same_partition(SubspaceAssignment({0, 0, 1}, {3})));
  CHECK_FALSE(SubspaceAssignment({1, 1, 0}, {3}).same_partition(SubspaceAssignment({0, 1, 1}, {3})));

  const auto iva = SubspaceAssignment::linked(3, 2);
  CHECK(iva.labels() == std::vector<Index>{0, 1, 0, 1, 0, 1});
  CHECK(SubspaceAssignment::consecutive({2, 1}).labels() == std::vector<Index>{0, 0, 1});
  CHECK(iva.slice(1).labels() == std::vector<Index>{0, 1});
  CHECK_THROWS_AS(SubspaceAssignment({0, 1}, {3}), ShapeError);
  CHECK_THROWS(SubspaceAssignment::from_matrix(Matrix::Ones(2, 2), {2}));
}

TEST_CASE("BlockTransform flatten round trip and products") {
  Rng rng(3);
  BlockTransform W({rng.normal_matrix(2, 3), rng.normal_matrix(3, 3)});
  CHECK(W.num_params() == 15);
  const Vector x = W.flatten();
  CHECK(x(1) == W[0](0, 1));
  const BlockTransform back = W.unflatten(x);
  CHECK(back[0] == W[0]);
  CHECK(back[1] == W[1]);
  const BlockTransform I = BlockTransform::identity({3, 3});
  const BlockTransform WI = W * I;
  CHECK(WI[0].isApprox(W[0]));
  const Matrix dense = W.dense();
  CHECK(dense.rows() == 5);
  CHECK(dense.cols() == 6);
  CHECK(dense.block(0, 3, 2, 3).isZero());
  const MultiDataset X({rng.normal_matrix(3, 10), rng.normal_matrix(3, 10)});
  const MultiDataset Y = W.apply(X);
  CHECK(Y[1].isApprox(W[1] * X[1]));
  CHECK_THROWS_AS(MultiDataset({rng.normal_matrix(3, 10), rng.normal_matrix(3, 9)}), ShapeError);
  CHECK_THROWS_AS(check_shapes(X, SubspaceAssignment::singletons({3, 3}), W), ShapeError);
}
