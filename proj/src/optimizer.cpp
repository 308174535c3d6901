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

#include "misa/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace misa {

std::string to_string(Status s) {
  switch (s) {
    case Status::ConvergedFun: return "converged_fun";
    case Status::ConvergedX: return "converged_x";
    case Status::MaxIter: return "max_iter";
    case Status::MaxEval: return "max_eval";
    case Status::LineSearchFail: return "line_search_fail";
  }
  return "unknown";
}

void OptimOptions::validate() const {
  if (!std::isfinite(lower) || !std::isfinite(upper) || !(lower < upper))
    throw DomainError("OptimOptions: bounds must be finite with lower < upper");
  if (memory < 1) throw DomainError("OptimOptions: memory must be >= 1");
  if (!(tol_fun > 0) || !(tol_x > 0)) throw DomainError("OptimOptions: tolerances must be > 0");
  if (!(typical_x > 0)) throw DomainError("OptimOptions: typical_x must be > 0");
  if (max_iters < 1 || max_fun_evals < 1) throw DomainError("OptimOptions: iteration caps must be >= 1");
  if (!(penalty.initial > 0) || !(penalty.factor > 1) || !(penalty.max >= penalty.initial))
    throw DomainError("OptimOptions: invalid penalty schedule");
}

Vector lbfgs_apply(const CurvaturePairs& pairs, const Vector& g, const Metric& metric) {
  Vector q = g;
  const std::size_t k = pairs.size();
  std::vector<double> a(k), rho(k);
  for (std::size_t i = k; i-- > 0;) {
    const auto& [s, y] = pairs[i];
    rho[i] = 1.0 / s.dot(y);
    a[i] = rho[i] * s.dot(q);
    q -= a[i] * y;
  }
  if (metric) {
    if (k > 0) {
      const auto& [s, y] = pairs.back();
      const double yMy = y.dot(metric(y));
      q = metric(q);
      if (yMy > 0 && std::isfinite(yMy)) q *= s.dot(y) / yMy;
    } else {
      q = metric(q);
    }
  } else if (k > 0) {
    const auto& [s, y] = pairs.back();
    q *= s.dot(y) / y.squaredNorm();
  }
  for (std::size_t i = 0; i < k; ++i) {
    const auto& [s, y] = pairs[i];
    const double b = rho[i] * y.dot(q);
    q += (a[i] - b) * s;
  }
  return q;
}

namespace {

class Minimizer {
 public:
  Minimizer(const ObjectiveFn& f, const OptimOptions& o) : f_(f), o_(o) {}

  OptimResult run(const Vector& x0) {
    const Index n = x0.size();
    if ((x0.array() < o_.lower).any() || (x0.array() > o_.upper).any())
      throw PreconditionError("minimize: initial point outside the bounds");
    OptimResult res;
    x_ = x0;
    e_ = call(x_);
    if (!std::isfinite(e_.value)) throw PreconditionError("minimize: objective is not finite at the initial point");
    res.trace.push_back({e_.value, projected_norm(), 0.0, true});

    CurvaturePairs pairs;
    bool fresh = true;  // no curvature information since the last reset
    while (true) {
      if (res.iterations >= o_.max_iters) {
        res.status = Status::MaxIter;
        break;
      }
      if (evals_ >= o_.max_fun_evals) {
        res.status = Status::MaxEval;
        break;
      }
      const Vector sg = search(e_);
      Vector d = -lbfgs_apply(pairs, e_.gradient, e_.metric);
      mask(d);
      double slope = e_.gradient.dot(d);
      if (!(slope < 0)) {
        pairs.clear();
        fresh = true;
        d = -sg;
        mask(d);
        slope = e_.gradient.dot(d);
        if (!(slope < 0)) {
          d = -e_.gradient;
          mask(d);
          slope = e_.gradient.dot(d);
        }
      }
      if (!(slope < 0)) {
        res.status = Status::ConvergedFun;  // projected gradient vanishes
        break;
      }

      double amax = std::numeric_limits<double>::infinity();
      for (Index i = 0; i < n; ++i) {
        if (d(i) > 0) amax = std::min(amax, (o_.upper - x_(i)) / d(i));
        if (d(i) < 0) amax = std::min(amax, (o_.lower - x_(i)) / d(i));
      }
      double a0 = pairs.empty() ? std::min(1.0, o_.typical_x / d.cwiseAbs().maxCoeff()) : 1.0;
      a0 = std::min(a0, amax);

      LineResult ls = line_search(d, slope, a0, amax);
      if (!ls.ok) {
        if (ls.out_of_evals) {
          res.status = Status::MaxEval;
          break;
        }
        if (!fresh) {
          pairs.clear();
          fresh = true;
          continue;
        }
        res.status = Status::LineSearchFail;
        break;
      }
      ++res.iterations;
      const Vector s = ls.x - x_;
      const Vector y = ls.e.gradient - e_.gradient;
      const double sy = s.dot(y);
      if (sy > 1e-12 * s.norm() * y.norm() && std::isfinite(sy)) {
        pairs.emplace_back(s, y);
        if (static_cast<int>(pairs.size()) > o_.memory) pairs.pop_front();
        fresh = false;
      }
      const double f_old = e_.value;
      x_ = ls.x;
      e_ = std::move(ls.e);
      const bool armijo = e_.value <= f_old + kArmijoC1 * ls.alpha * slope;
      res.trace.push_back({e_.value, projected_norm(), ls.alpha, armijo});

      if (std::abs(f_old - e_.value) < o_.tol_fun * (1.0 + std::abs(f_old))) {
        res.status = Status::ConvergedFun;
        break;
      }
      if (s.cwiseAbs().maxCoeff() < o_.tol_x) {
        res.status = Status::ConvergedX;
        break;
      }
    }
    res.x = x_;
    res.value = e_.value;
    res.evaluations = evals_;
    return res;
  }

 private:
  struct LineResult {
    bool ok = false;
    bool out_of_evals = false;
    double alpha = 0.0;
    Vector x;
    Evaluation e;
  };

  Evaluation call(const Vector& x) {
    ++evals_;
    Evaluation e = f_(x);
    if (std::isfinite(e.value) && e.gradient.size() != x.size())
      throw ShapeError("minimize: gradient size mismatch");
    return e;
  }

  static Vector search(const Evaluation& e) { return e.metric ? e.metric(e.gradient) : e.gradient; }

  bool at_lower(Index i) const { return x_(i) <= o_.lower; }
  bool at_upper(Index i) const { return x_(i) >= o_.upper; }

  void mask(Vector& d) const {
    for (Index i = 0; i < d.size(); ++i)
      if ((at_lower(i) && d(i) < 0) || (at_upper(i) && d(i) > 0)) d(i) = 0.0;
  }

  double projected_norm() const {
    double r = 0.0;
    const Vector& g = e_.gradient;
    for (Index i = 0; i < g.size(); ++i) {
      if ((at_lower(i) && g(i) > 0) || (at_upper(i) && g(i) < 0)) continue;
      r = std::max(r, std::abs(g(i)));
    }
    return r;
  }

  Vector trial(const Vector& d, double a, double amax) const {
    Vector x = (x_ + a * d).cwiseMax(o_.lower).cwiseMin(o_.upper);
    if (a == amax) {
      // land exactly on the bound that limited the step
      for (Index i = 0; i < d.size(); ++i) {
        if (d(i) > 0 && (o_.upper - x_(i)) / d(i) <= amax * (1 + 1e-12)) x(i) = o_.upper;
        if (d(i) < 0 && (o_.lower - x_(i)) / d(i) <= amax * (1 + 1e-12)) x(i) = o_.lower;
      }
    }
    return x;
  }

  // Strong Wolfe search on phi(a) = f(x + a d), a in (0, amax].
  LineResult line_search(const Vector& d, double slope0, double a0, double amax) {
    const double f0 = e_.value;
    LineResult best;
    double a_prev = 0.0, f_prev = f0, dphi_prev = slope0;
    double a = a0;
    for (int expand = 0; expand < 60; ++expand) {
      if (evals_ >= o_.max_fun_evals) {
        best.out_of_evals = true;
        return best;
      }
      Vector x = trial(d, a, amax);
      Evaluation e = call(x);
      const bool finite = std::isfinite(e.value);
      if (!finite || e.value > f0 + kArmijoC1 * a * slope0 || (expand > 0 && e.value >= f_prev))
        return zoom(d, slope0, a_prev, f_prev, dphi_prev, a, finite ? e.value : HUGE_VAL, amax, std::move(best.x),
                    std::move(best.e));
      const double dphi = e.gradient.dot(d);
      if (std::abs(dphi) <= -kWolfeC2 * slope0 || a >= amax) return {true, false, a, std::move(x), std::move(e)};
      if (dphi >= 0) return zoom(d, slope0, a, e.value, dphi, a_prev, f_prev, amax, std::move(x), std::move(e));
      a_prev = a;
      f_prev = e.value;
      dphi_prev = dphi;
      best = {true, false, a, std::move(x), std::move(e)};
      a = std::min(2.0 * a, amax);
    }
    return best;
  }

  // lo satisfies sufficient decrease and has the lowest value seen so far.
  LineResult zoom(const Vector& d, double slope0, double lo, double f_lo, double dphi_lo, double hi, double f_hi,
                  double amax, Vector x_lo = {}, Evaluation e_lo = {}) {
    const double f0 = e_.value;
    for (int it = 0; it < kMaxZoom; ++it) {
      if (evals_ >= o_.max_fun_evals) break;
      const double w = hi - lo;
      double a = lo + 0.5 * w;
      if (std::isfinite(f_hi)) {
        // minimizer of the quadratic through (lo, f_lo, dphi_lo) and (hi, f_hi)
        const double denom = 2.0 * (f_hi - f_lo - dphi_lo * w);
        if (denom != 0.0) {
          const double q = lo - dphi_lo * w * w / denom;
          const double left = std::min(lo, hi) + 0.1 * std::abs(w), right = std::max(lo, hi) - 0.1 * std::abs(w);
          if (std::isfinite(q) && q > left && q < right) a = q;
        }
      }
      Vector x = trial(d, a, amax);
      Evaluation e = call(x);
      const bool finite = std::isfinite(e.value);
      if (!finite || e.value > f0 + kArmijoC1 * a * slope0 || e.value >= f_lo) {
        hi = a;
        f_hi = finite ? e.value : HUGE_VAL;
        continue;
      }
      const double dphi = e.gradient.dot(d);
      if (std::abs(dphi) <= -kWolfeC2 * slope0) return {true, false, a, std::move(x), std::move(e)};
      if (dphi * (hi - lo) >= 0) {
        hi = lo;
        f_hi = f_lo;
      }
      lo = a;
      f_lo = e.value;
      dphi_lo = dphi;
      x_lo = std::move(x);
      e_lo = std::move(e);
    }
    // accept the best sufficient-decrease point when curvature never held
    if (lo > 0 && x_lo.size() > 0) return {true, false, lo, std::move(x_lo), std::move(e_lo)};
    LineResult fail;
    fail.out_of_evals = evals_ >= o_.max_fun_evals;
    return fail;
  }

  const ObjectiveFn& f_;
  const OptimOptions& o_;
  Vector x_;
  Evaluation e_;
  int evals_ = 0;
};

}  // namespace

OptimResult minimize(const ObjectiveFn& f, const Vector& x0, const OptimOptions& opts) {
  opts.validate();
  return Minimizer(f, opts).run(x0);
}

OptimResult minimize_constrained(const ObjectiveFn& f, const ObjectiveFn& c, double delta, const Vector& x0,
                                 const OptimOptions& opts) {
  opts.validate();
  if (std::isinf(delta) && delta > 0) {
    OptimResult r = minimize(f, x0, opts);
    r.constraint_value = c(r.x).value;
    return r;
  }
  const double c0 = c(x0).value;
  if (!(c0 <= delta)) throw PreconditionError("minimize_constrained: initial point violates the constraint");

  double mu = opts.penalty.initial;
  Vector x = x0;
  OptimResult total;
  while (true) {
    const double m = mu;
    auto penalized = [&](const Vector& w) {
      Evaluation ef = f(w);
      if (!std::isfinite(ef.value)) return ef;
      Evaluation ec = c(w);
      if (!std::isfinite(ec.value)) return ec;
      const double v = ec.value - delta;
      if (v > 0) {
        ef.value += m * v * v;
        ef.gradient += 2.0 * m * v * ec.gradient;
      }
      return ef;
    };
    OptimResult r = minimize(penalized, x, opts);
    x = r.x;
    total.status = r.status;
    total.iterations += r.iterations;
    total.evaluations += r.evaluations;
    total.trace.insert(total.trace.end(), r.trace.begin(), r.trace.end());
    const double viol = std::max(0.0, c(x).value - delta);
    if (viol < opts.penalty.feasibility_tol) break;
    if (mu * opts.penalty.factor > opts.penalty.max) {
      total.feasible = viol < opts.penalty.flag_tol;
      break;
    }
    mu *= opts.penalty.factor;
  }
  total.x = x;
  total.value = f(x).value;
  total.constraint_value = c(x).value;
  return total;
}

}  // namespace misa
