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

#include "misa/combinatorics.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace misa {

namespace {

// Relabels to 0..K-1 keeping relative order; returns K.
Index compress(std::vector<Index>& labels) {
  std::vector<Index> used(labels);
  std::sort(used.begin(), used.end());
  used.erase(std::unique(used.begin(), used.end()), used.end());
  for (auto& l : labels) l = std::lower_bound(used.begin(), used.end(), l) - used.begin();
  return static_cast<Index>(used.size());
}

// Memoized scale-invariant subspace terms keyed by sorted source rows of Y.
class TermCache {
 public:
  TermCache(const Matrix& Y, KotzShape shape) : Y_(Y), shape_(shape) {}

  double operator()(std::vector<Index> rows) {
    std::sort(rows.begin(), rows.end());
    auto it = cache_.find(rows);
    if (it != cache_.end()) return it->second;
    Matrix Ys(rows.size(), Y_.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) Ys.row(r) = Y_.row(rows[r]);
    const double v = subspace_term(Ys, derive_kotz(shape_, static_cast<Index>(rows.size())),
                                   Dispersion::ScaleInvariant, false)
                         .value;
    cache_.emplace(std::move(rows), v);
    return v;
  }

 private:
  const Matrix& Y_;
  KotzShape shape_;
  std::map<std::vector<Index>, double> cache_;
};

}  // namespace

SubspaceAssignment gp(const MultiDataset& X, const SubspaceAssignment& P, const BlockTransform& W, KotzShape shape,
                      GpReport* report) {
  if (X.size() != 1) throw ShapeError("gp: expects a single dataset");
  check_shapes(X, P, W);
  const Matrix Y = W[0] * X[0];
  const double jd = j_d_term(W[0]);
  TermCache term(Y, shape);
  const Index C = P.num_sources();
  std::vector<Index> label = P.labels();
  Index K = P.num_subspaces();

  for (Index c = 0; c < C; ++c) {
    const Index kur = label[c];
    std::vector<std::vector<Index>> groups(K);
    std::vector<Index> p;
    for (Index s = 0; s < C; ++s) (label[s] == kur ? p : groups[label[s]]).push_back(s);

    std::vector<double> gterm(K, 0.0);
    double rest = 0.0;
    for (Index k = 0; k < K; ++k) {
      if (k == kur) continue;
      gterm[k] = term(groups[k]);
      rest += gterm[k];
    }
    const double alone = -jd + rest + term(p);
    std::vector<double> vals(K + 1);
    for (Index k = 0; k <= K; ++k) {
      if (k == kur || k == K) {
        vals[k] = alone;
      } else {
        std::vector<Index> merged = groups[k];
        merged.insert(merged.end(), p.begin(), p.end());
        vals[k] = -jd + rest - gterm[k] + term(std::move(merged));
      }
    }
    Index best = std::min_element(vals.begin(), vals.end()) - vals.begin();
    if (best != kur && std::abs(vals[best] - vals[kur]) < kTieTolerance) {
      best = kur;
      if (report) ++report->tie_breaks;
    }
    if (report) {
      report->chosen.push_back(best);
      report->candidate_costs.push_back(vals);
    }
    for (Index s : p) label[s] = best;
    K = compress(label);
  }
  return SubspaceAssignment(std::move(label), P.sources_per_dataset());
}

std::vector<Index> match(const SubspaceAssignment& P_est, const SubspaceAssignment& P_ud) {
  if (P_est.num_sources() != P_ud.num_sources()) throw ShapeError("match: source counts differ");
  const Index C = P_ud.num_sources();
  const Index Ke = P_est.num_subspaces(), Ku = P_ud.num_subspaces();
  const Index n = std::max(Ke, Ku);
  Matrix cost = Matrix::Zero(n, n);
  for (Index i = 0; i < Ke; ++i) {
    for (Index j = 0; j < Ku; ++j) {
      Index overlap = 0;
      for (Index s : P_est.members(i))
        if (P_ud.subspace_of(s) == j) ++overlap;
      cost(i, j) = static_cast<double>(std::abs(P_est.dim(i) - P_ud.dim(j)) * C - overlap);
    }
  }
  const std::vector<Index> col = hungarian(cost);
  std::vector<Index> est_for(Ku, -1);
  for (Index i = 0; i < Ke; ++i)
    if (col[i] < Ku) est_for[col[i]] = i;

  std::vector<Index> ix(C, -1);
  std::vector<Index> pool;
  std::vector<char> placed(C, 0);
  for (Index j = 0; j < Ku; ++j) {
    if (est_for[j] < 0) continue;
    const auto& slots = P_ud.members(j);
    const auto& src = P_est.members(est_for[j]);
    for (std::size_t r = 0; r < src.size(); ++r) {
      if (r < slots.size()) {
        ix[slots[r]] = src[r];
        placed[src[r]] = 1;
      }
    }
  }
  for (Index s = 0; s < C; ++s)
    if (!placed[s]) pool.push_back(s);
  std::size_t next = 0;
  for (Index slot = 0; slot < C; ++slot)
    if (ix[slot] < 0) ix[slot] = pool[next++];
  return ix;
}

Matrix take_rows(const Matrix& W, const std::vector<Index>& ix) {
  if (static_cast<Index>(ix.size()) != W.rows()) throw ShapeError("take_rows: index length mismatch");
  Matrix out(W.rows(), W.cols());
  for (std::size_t r = 0; r < ix.size(); ++r) out.row(r) = W.row(ix[r]);
  return out;
}

namespace {

// One set of interchangeable subspaces within one dataset.
struct PermGroup {
  std::size_t dataset;
  std::vector<Index> subspaces;  // global subspace ids sharing a local size
  std::vector<Index> perm;       // subspaces[i] takes the rows of subspaces[perm[i]]
};

class PermProblem {
 public:
  PermProblem(const MultiDataset& X, const SubspaceAssignment& P, const BlockTransform& W, KotzShape shape)
      : P_(P), shape_(shape) {
    check_shapes(X, P, W);
    Index total = 0;
    for (std::size_t m = 0; m < X.size(); ++m) total += W[m].rows();
    Y_.resize(total, X.n_obs());
    for (std::size_t m = 0; m < X.size(); ++m) Y_.middleRows(P.offset(m), W[m].rows()) = W[m] * X[m];
    for (std::size_t m = 0; m < X.size(); ++m) {
      std::map<Index, std::vector<Index>> by_size;
      for (Index k = 0; k < P.num_subspaces(); ++k) {
        const Index d = local_rows(m, k).size();
        if (d > 0) by_size[d].push_back(k);
      }
      for (auto& [_, ks] : by_size) {
        if (ks.size() < 2) continue;
        std::vector<Index> id(ks.size());
        std::iota(id.begin(), id.end(), Index{0});
        groups_.push_back({m, ks, id});
      }
    }
  }

  std::vector<PermGroup>& groups() { return groups_; }

  double count() const {
    double c = 1.0;
    for (const auto& g : groups_)
      for (std::size_t i = 2; i <= g.subspaces.size(); ++i) c *= static_cast<double>(i);
    return c;
  }

  // Global source rows of dataset m in subspace k, ascending.
  std::vector<Index> local_rows(std::size_t m, Index k) const {
    std::vector<Index> r;
    for (Index s : P_.members(k))
      if (P_.dataset_of(s) == m) r.push_back(s);
    return r;
  }

  // Source row map: new global row -> old global row.
  std::vector<Index> row_map() const {
    std::vector<Index> map(P_.num_sources());
    std::iota(map.begin(), map.end(), Index{0});
    for (const auto& g : groups_) {
      for (std::size_t i = 0; i < g.subspaces.size(); ++i) {
        const auto dst = local_rows(g.dataset, g.subspaces[i]);
        const auto src = local_rows(g.dataset, g.subspaces[g.perm[i]]);
        for (std::size_t r = 0; r < dst.size(); ++r) map[dst[r]] = src[r];
      }
    }
    return map;
  }

  double cost() {
    const auto map = row_map();
    double v = 0.0;
    for (Index k = 0; k < P_.num_subspaces(); ++k) {
      std::vector<Index> rows;
      for (Index s : P_.members(k)) rows.push_back(map[s]);
      auto it = cache_.find(rows);
      if (it == cache_.end()) {
        Matrix Ys(rows.size(), Y_.cols());
        for (std::size_t r = 0; r < rows.size(); ++r) Ys.row(r) = Y_.row(rows[r]);
        const double t =
            subspace_term(Ys, derive_kotz(shape_, static_cast<Index>(rows.size())), Dispersion::ScaleInvariant, false)
                .value;
        it = cache_.emplace(rows, t).first;
      }
      v += it->second;
    }
    return v;
  }

  BlockTransform apply(const BlockTransform& W) const {
    const auto map = row_map();
    BlockTransform out = W;
    for (std::size_t m = 0; m < W.size(); ++m) {
      const Index off = P_.offset(m);
      for (Index r = 0; r < W[m].rows(); ++r) out[m].row(r) = W[m].row(map[off + r] - off);
    }
    return out;
  }

 private:
  const SubspaceAssignment& P_;
  KotzShape shape_;
  Matrix Y_;
  std::vector<PermGroup> groups_;
  std::map<std::vector<Index>, double> cache_;
};

void enumerate(PermProblem& pp, std::size_t depth, double& best, std::vector<std::vector<Index>>& best_perm) {
  auto& groups = pp.groups();
  if (depth == groups.size()) {
    const double c = pp.cost();
    if (c < best) {
      best = c;
      for (std::size_t i = 0; i < groups.size(); ++i) best_perm[i] = groups[i].perm;
    }
    return;
  }
  auto& perm = groups[depth].perm;
  std::iota(perm.begin(), perm.end(), Index{0});
  do {
    enumerate(pp, depth + 1, best, best_perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
  std::iota(perm.begin(), perm.end(), Index{0});
}

}  // namespace

BlockTransform subspace_perm(const MultiDataset& X, const SubspaceAssignment& P_ud, const BlockTransform& W,
                             PermMode mode, KotzShape shape) {
  // One dataset has no correspondence to restore; relabelling is free.
  if (X.size() < 2) return W;
  PermProblem pp(X, P_ud, W, shape);
  auto& groups = pp.groups();
  if (groups.empty()) return W;
  if (mode == PermMode::Auto) mode = pp.count() <= kExhaustiveLimit ? PermMode::Exhaustive : PermMode::Greedy;

  if (mode == PermMode::Exhaustive) {
    double best = HUGE_VAL;
    std::vector<std::vector<Index>> best_perm(groups.size());
    enumerate(pp, 0, best, best_perm);
    for (std::size_t i = 0; i < groups.size(); ++i) groups[i].perm = best_perm[i];
    return pp.apply(W);
  }

  double best = pp.cost();
  for (int sweep = 0; sweep < 100; ++sweep) {
    bool improved = false;
    for (auto& g : groups) {
      for (std::size_t a = 0; a < g.perm.size(); ++a) {
        for (std::size_t b = a + 1; b < g.perm.size(); ++b) {
          std::swap(g.perm[a], g.perm[b]);
          const double c = pp.cost();
          if (c < best) {
            best = c;
            improved = true;
          } else {
            std::swap(g.perm[a], g.perm[b]);
          }
        }
      }
    }
    if (!improved) break;
  }
  return pp.apply(W);
}

namespace {

struct Driver {
  const MultiDataset& X;
  const SubspaceAssignment& P_ud;
  MisaOptions sc;
  GpResult res;
  std::vector<Solution> sols;

  Driver(const MultiDataset& X_, const SubspaceAssignment& P, const MisaOptions& opts) : X(X_), P_ud(P), sc(opts) {
    sc.dispersion = Dispersion::ScaleControlled;
  }

  Solution fit(const MultiDataset& data, const SubspaceAssignment& P, const BlockTransform& W) {
    Solution s = fit_misa(data, P, W, sc);
    res.stage_status.push_back(s.status);
    return s;
  }

  bool record(Solution s, Dispersion mode) {
    const double v = misa_cost(X, P_ud, s.W, sc.shape, mode);
    res.candidate_values.push_back(v);
    sols.push_back(std::move(s));
    const std::size_t t = res.candidate_values.size() - 1;
    if (t == 0) return false;
    const double prev = res.candidate_values[t - 1];
    return std::abs(v - prev) < sc.repeat_tol * (1.0 + std::abs(prev));
  }

  GpResult finish() {
    const auto& v = res.candidate_values;
    res.best = std::min_element(v.begin(), v.end()) - v.begin();
    res.solution = sols[res.best];
    return std::move(res);
  }
};

}  // namespace

GpResult misa_gp_sdm(const MultiDataset& X, const SubspaceAssignment& P_ud, const BlockTransform& W0, int T,
                     const MisaOptions& opts) {
  if (X.size() != 1) throw ShapeError("misa_gp_sdm: expects a single dataset");
  Driver dr(X, P_ud, opts);
  Solution s = dr.fit(X, P_ud, W0);
  BlockTransform W = s.W;
  dr.record(std::move(s), Dispersion::ScaleControlled);
  const SubspaceAssignment I = SubspaceAssignment::singletons(P_ud.sources_per_dataset());
  for (int t = 1; t <= T; ++t) {
    try {
      const Solution sdu = dr.fit(X, I, W);
      const SubspaceAssignment P = gp(X, I, sdu.W, opts.shape);
      const std::vector<Index> ix = match(P, P_ud);
      const BlockTransform Wr{std::vector<Matrix>{take_rows(sdu.W[0], ix)}};
      Solution st = dr.fit(X, P_ud, Wr);
      W = st.W;
      if (dr.record(std::move(st), Dispersion::ScaleControlled)) break;
    } catch (const Error&) {
      dr.res.stage_status.push_back(Status::LineSearchFail);
      break;
    }
  }
  return dr.finish();
}

GpResult misa_gp_mdm(const MultiDataset& X, const SubspaceAssignment& P_ud, const BlockTransform& W0, int T,
                     const MisaOptions& opts, PermMode perm) {
  Driver dr(X, P_ud, opts);
  Solution s = dr.fit(X, P_ud, W0);
  BlockTransform W = s.W;
  dr.record(std::move(s), Dispersion::ScaleControlled);
  for (int t = 1; t <= T; ++t) {
    try {
      for (std::size_t m = 0; m < X.size(); ++m) {
        const Index Cm = P_ud.sources_per_dataset()[m];
        if (Cm == 0) continue;
        const MultiDataset Xm{std::vector<Matrix>{X[m]}};
        const SubspaceAssignment Im = SubspaceAssignment::singletons({Cm});
        const Solution sdu = dr.fit(Xm, Im, BlockTransform{std::vector<Matrix>{W[m]}});
        const SubspaceAssignment Pm = gp(Xm, Im, sdu.W, opts.shape);
        W[m] = take_rows(sdu.W[0], match(Pm, P_ud.slice(m)));
      }
      W = subspace_perm(X, P_ud, W, perm, opts.shape);
      Solution st = dr.fit(X, P_ud, W);
      W = st.W;
      if (dr.record(std::move(st), Dispersion::ScaleInvariant)) break;
    } catch (const Error&) {
      dr.res.stage_status.push_back(Status::LineSearchFail);
      break;
    }
  }
  return dr.finish();
}

}  // namespace misa
