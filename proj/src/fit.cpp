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

#include "misa/fit.hpp"

#include <cmath>

#include "misa/reduction.hpp"
#include "misa/rng.hpp"

namespace misa {

Solution fit_misa(const MultiDataset& X, const SubspaceAssignment& P, const BlockTransform& W0,
                  const MisaOptions& opts) {
  check_shapes(X, P, W0);
  const ObjectiveContext ctx(X, P, opts.shape, opts.dispersion);
  const bool rel = opts.relative_gradient;

  auto f = [&](const Vector& x) {
    const BlockTransform W = W0.unflatten(x);
    Evaluation e;
    try {
      ObjectiveReport r = evaluate(ctx, W, true);
      e.value = r.value;
      e.gradient = r.gradient->flatten();
      if (rel)
        e.metric = [W](const Vector& g) { return relative_gradient(W.unflatten(g), W).flatten(); };
    } catch (const RankError&) {
      e.value = HUGE_VAL;
    } catch (const DefinitenessError&) {
      e.value = HUGE_VAL;
    }
    return e;
  };

  OptimResult r;
  if (opts.optim.constraint_threshold) {
    std::vector<Matrix> grams;
    for (std::size_t m = 0; m < X.size(); ++m) grams.push_back(ctx.gram(m));
    auto c = [&](const Vector& x) {
      const BlockTransform W = W0.unflatten(x);
      Evaluation e;
      try {
        e.value = pre_value_gram(W, grams);
        e.gradient = pre_gradient_gram(W, grams).flatten();
      } catch (const RankError&) {
        e.value = HUGE_VAL;
      }
      return e;
    };
    r = minimize_constrained(f, c, *opts.optim.constraint_threshold, W0.flatten(), opts.optim);
  } else {
    r = minimize(f, W0.flatten(), opts.optim);
  }

  Solution s;
  s.W = W0.unflatten(r.x);
  s.objective_value = r.value;
  s.constraint_value = r.constraint_value;
  s.status = r.status;
  s.feasible = r.feasible;
  s.trace = std::move(r.trace);
  s.iterations = r.iterations;
  s.evaluations = r.evaluations;
  return s;
}

double misa_cost(const MultiDataset& X, const SubspaceAssignment& P, const BlockTransform& W, KotzShape shape,
                 Dispersion mode) {
  return evaluate(ObjectiveContext(X, P, shape, mode), W, false).value;
}

BlockTransform random_unmixing(const std::vector<Index>& sources, const std::vector<Index>& dims, std::uint64_t seed) {
  if (sources.size() != dims.size()) throw ShapeError("random_unmixing: size mismatch");
  std::vector<Matrix> b;
  for (std::size_t m = 0; m < dims.size(); ++m)
    b.push_back(random_row_orthonormal(sources[m], dims[m], derive_seed(seed, m)));
  return BlockTransform(std::move(b));
}

}  // namespace misa
