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

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "misa/linalg.hpp"

namespace misa {

enum class Status { ConvergedFun, ConvergedX, MaxIter, MaxEval, LineSearchFail };

std::string to_string(Status s);

struct PenaltySchedule {
  double initial = 10.0;
  double factor = 10.0;
  double max = 1e12;
  double feasibility_tol = 1e-8;  // stop increasing mu below this violation
  double flag_tol = 1e-6;         // violation at the cap above this marks the result infeasible
};

struct OptimOptions {
  double lower = -100.0;
  double upper = 100.0;
  // The first step moves no coordinate by more than this.
  double typical_x = 0.1;
  int max_fun_evals = 50000;
  int max_iters = 10000;
  int memory = 10;
  double tol_fun = 1e-4;
  double tol_x = 1e-9;
  std::optional<double> constraint_threshold;
  PenaltySchedule penalty;
  std::uint64_t seed = 0;

  void validate() const;
};

// Symmetric positive-definite linear map applied to gradients.
using Metric = std::function<Vector(const Vector&)>;

// Callback result. The gradient is the true gradient and drives the line
// search. When metric is set, the search gradient is metric(gradient): it
// gives the first direction and seeds the quasi-Newton inverse Hessian.
struct Evaluation {
  double value = 0.0;
  Vector gradient;
  Metric metric;
};

using ObjectiveFn = std::function<Evaluation(const Vector&)>;

struct TraceEntry {
  double value;
  double grad_norm;  // infinity norm of the projected gradient
  double step;
  bool armijo;
};

struct OptimResult {
  Vector x;
  double value = 0.0;
  std::optional<double> constraint_value;
  Status status = Status::MaxIter;
  bool feasible = true;
  std::vector<TraceEntry> trace;
  int iterations = 0;
  int evaluations = 0;
};

inline constexpr double kArmijoC1 = 1e-4;
inline constexpr double kWolfeC2 = 0.9;
inline constexpr int kMaxZoom = 20;

OptimResult minimize(const ObjectiveFn& f, const Vector& x0, const OptimOptions& opts);

// min f subject to c <= delta by quadratic-penalty continuation.
OptimResult minimize_constrained(const ObjectiveFn& f, const ObjectiveFn& c, double delta, const Vector& x0,
                                 const OptimOptions& opts);

using CurvaturePairs = std::deque<std::pair<Vector, Vector>>;

// Two-loop recursion: returns H g for the inverse-Hessian approximation built
// from the (s, y) pairs, oldest first. The initial matrix is gamma * M with
// M the metric (identity when empty) and gamma = s'y / y'My of the newest pair.
Vector lbfgs_apply(const CurvaturePairs& pairs, const Vector& g, const Metric& metric = {});

}  // namespace misa
