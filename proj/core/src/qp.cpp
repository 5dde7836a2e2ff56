#include "auctionvi/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "auctionvi/errors.hpp"

namespace auctionvi {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void TridiagonalMatrix::multiply(std::span<const double> x,
                                 std::span<double> y) const {
  const size_t m = diag.size();
  for (size_t i = 0; i < m; ++i) {
    double v = diag[i] * x[i];
    if (i > 0) v += off[i - 1] * x[i - 1];
    if (i + 1 < m) v += off[i] * x[i + 1];
    y[i] = v;
  }
}

void TridiagonalLDLT::factor(const TridiagonalMatrix& m) {
  const size_t n = m.size();
  d_.assign(n, 0.0);
  l_.assign(n > 0 ? n - 1 : 0, 0.0);
  double prev = 0.0, prev_l = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double di = m.diag[i];
    if (i > 0) di -= prev_l * prev_l * prev;
    if (!(di > 0)) throw NumericalError("tridiagonal matrix not SPD");
    d_[i] = di;
    if (i + 1 < n) {
      l_[i] = m.off[i] / di;
      prev_l = l_[i];
      prev = di;
    }
  }
}

void TridiagonalLDLT::solve_in_place(std::span<double> x) const {
  const size_t n = d_.size();
  for (size_t i = 1; i < n; ++i) x[i] -= l_[i - 1] * x[i - 1];
  for (size_t i = 0; i < n; ++i) x[i] /= d_[i];
  for (size_t i = n - 1; i-- > 0;) x[i] -= l_[i] * x[i + 1];
}

std::vector<double> TridiagonalLDLT::solve(std::span<const double> rhs) const {
  std::vector<double> x(rhs.begin(), rhs.end());
  solve_in_place(x);
  return x;
}

namespace {

// ----- ADMM core (OSQP-style splitting on A = [I; D]) -----

struct AdmmState {
  std::vector<double> x, zc, y;  // primal, slack copy, dual
};

// y <- A x  with A = [I; D]
void apply_A(std::span<const double> x, std::span<double> out) {
  const size_t m = x.size();
  for (size_t i = 0; i < m; ++i) out[i] = x[i];
  for (size_t i = 0; i + 1 < m; ++i) out[m + i] = x[i + 1] - x[i];
}

// out <- A' w
void apply_At(std::span<const double> w, std::span<double> out) {
  const size_t m = out.size();
  for (size_t i = 0; i < m; ++i) {
    double v = w[i];
    if (i > 0) v += w[m + i - 1];
    if (i + 1 < m) v -= w[m + i];
    out[i] = v;
  }
}

struct Residuals {
  double prim = 0.0;
  double dual = 0.0;
};

Residuals residuals(const BoundedSlopeQp& qp, const AdmmState& s) {
  const size_t m = qp.q.size();
  std::vector<double> Ax(2 * m - 1), Aty(m), Px(m);
  apply_A(s.x, Ax);
  Residuals r;
  for (size_t i = 0; i < Ax.size(); ++i) {
    r.prim = std::max(r.prim, std::abs(Ax[i] - s.zc[i]));
  }
  qp.P.multiply(s.x, Px);
  apply_At(s.y, Aty);
  for (size_t i = 0; i < m; ++i) {
    r.dual = std::max(r.dual, std::abs(Px[i] + qp.q[i] + Aty[i]));
  }
  return r;
}

// ----- active-set polish -----

struct ActiveSet {
  std::vector<char> lo, hi;     // box rows
  std::vector<char> slope;      // rise rows
  std::vector<char> fixed;      // equality rows (never dropped)
};

struct PolishOutcome {
  std::vector<double> z;
  std::vector<double> mlo, mhi, mslope;
  bool solved = false;
};

// Solve the equality-constrained problem induced by the active set by
// collapsing slope-chains into single base variables (the reduced Hessian
// stays tridiagonal because chains are contiguous).
PolishOutcome polish_solve(const BoundedSlopeQp& qp, const ActiveSet& act) {
  const size_t m = qp.q.size();
  PolishOutcome out;

  // group index per node; groups are maximal runs of active slope rows
  std::vector<size_t> group(m);
  size_t g = 0;
  group[0] = 0;
  for (size_t i = 1; i < m; ++i) {
    if (!act.slope[i - 1]) ++g;
    group[i] = g;
  }
  const size_t ngroups = g + 1;

  // offsets relative to the group's first node
  std::vector<double> offset(m, 0.0);
  for (size_t i = 1; i < m; ++i) {
    if (act.slope[i - 1]) offset[i] = offset[i - 1] + qp.min_rise[i - 1];
  }

  // which groups have their base determined by a box/fixed row; when
  // several rows claim a group, prefer: equality row, then the last
  // upper-box node (a rising chain touches its top last), then the first
  // lower-box node. Stale actives that keep slack are dropped by the
  // feasibility/sign checks in the caller.
  std::vector<double> base(ngroups, 0.0);
  std::vector<char> base_fixed(ngroups, 0);
  std::vector<int> base_rank(ngroups, -1);  // 2 fixed > 1 hi > 0 lo
  for (size_t i = 0; i < m; ++i) {
    int rank = -1;
    double val = 0.0;
    if (act.fixed[i]) {
      rank = 2;
      val = qp.lower[i];
    } else if (act.hi[i]) {
      rank = 1;
      val = qp.upper[i];
    } else if (act.lo[i]) {
      rank = 0;
      val = qp.lower[i];
    }
    if (rank < 0) continue;
    const size_t gi = group[i];
    // later nodes override for hi (>=), earlier win for fixed/lo (>)
    const bool take = rank > base_rank[gi] || (rank == 1 && base_rank[gi] == 1);
    if (take) {
      base_rank[gi] = rank;
      base_fixed[gi] = 1;
      base[gi] = val - offset[i];
    }
  }

  // t = full offset vector including fixed bases
  std::vector<double> t(m);
  for (size_t i = 0; i < m; ++i) {
    t[i] = offset[i] + (base_fixed[group[i]] ? base[group[i]] : 0.0);
  }

  // reduced tridiagonal system over free groups
  std::vector<double> w(m);
  qp.P.multiply(t, w);
  for (size_t i = 0; i < m; ++i) w[i] += qp.q[i];

  TridiagonalMatrix H;
  H.diag.assign(ngroups, 0.0);
  H.off.assign(ngroups > 0 ? ngroups - 1 : 0, 0.0);
  std::vector<double> rhs(ngroups, 0.0);
  for (size_t i = 0; i < m; ++i) {
    H.diag[group[i]] += qp.P.diag[i];
    rhs[group[i]] -= w[i];
    if (i + 1 < m) {
      if (group[i] == group[i + 1]) {
        H.diag[group[i]] += 2.0 * qp.P.off[i];
      } else {
        H.off[group[i]] += qp.P.off[i];
      }
    }
  }

  // eliminate fixed groups: zero their rows/cols (couplings already in w)
  for (size_t k = 0; k < ngroups; ++k) {
    if (!base_fixed[k]) continue;
    H.diag[k] = 1.0;
    rhs[k] = 0.0;
    if (k > 0) H.off[k - 1] = 0.0;
    if (k + 1 < ngroups) H.off[k] = 0.0;
  }

  TridiagonalLDLT fac;
  try {
    fac.factor(H);
  } catch (const NumericalError&) {
    return out;
  }
  fac.solve_in_place(rhs);
  for (size_t k = 0; k < ngroups; ++k) {
    if (!base_fixed[k]) base[k] = rhs[k];
  }

  out.z.assign(m, 0.0);
  for (size_t i = 0; i < m; ++i) out.z[i] = base[group[i]] + offset[i];

  // ----- multiplier recovery: forward walk per group with end correction
  std::vector<double> r(m);
  qp.P.multiply(out.z, r);
  for (size_t i = 0; i < m; ++i) r[i] += qp.q[i];

  out.mlo.assign(m, 0.0);
  out.mhi.assign(m, 0.0);
  out.mslope.assign(m > 0 ? m - 1 : 0, 0.0);

  size_t i = 0;
  while (i < m) {
    size_t j = i;  // group span [i, j]
    while (j + 1 < m && act.slope[j]) ++j;
    ptrdiff_t last_boxed = -1;
    double lambda_prev = 0.0;
    for (size_t k = i; k <= j; ++k) {
      const bool boxed = act.fixed[k] || act.lo[k] || act.hi[k];
      const double c = r[k] - lambda_prev;  // = mu_k - lambda_k
      if (k < j) {
        // interior: prefer the slope multiplier
        out.mslope[k] = -c;
        lambda_prev = out.mslope[k];
        if (boxed) last_boxed = static_cast<ptrdiff_t>(k);
      } else {
        // last node of the group: no slope to the right inside the group
        if (boxed) {
          if (act.fixed[k] || act.lo[k]) {
            out.mlo[k] = c;
          } else {
            out.mhi[k] = -c;
          }
        } else if (std::abs(c) > 1e-9 && last_boxed >= 0) {
          // shift the leftover into the last boxed node's multiplier
          const size_t b = static_cast<size_t>(last_boxed);
          if (act.fixed[b] || act.lo[b]) {
            out.mlo[b] += c;
          } else {
            out.mhi[b] -= c;
          }
          for (size_t s = b; s < j; ++s) out.mslope[s] += c;
        }
      }
    }
    i = j + 1;
  }
  out.solved = true;
  return out;
}

struct KktReport {
  double residual = kInf;
  double worst_neg_mult = 0.0;
};

KktReport kkt_residual(const BoundedSlopeQp& qp, const PolishOutcome& p,
                       const ActiveSet& act) {
  const size_t m = qp.q.size();
  KktReport rep;
  double res = 0.0;
  // stationarity
  std::vector<double> r(m);
  qp.P.multiply(p.z, r);
  for (size_t i = 0; i < m; ++i) {
    double v = r[i] + qp.q[i] - p.mlo[i] + p.mhi[i];
    if (i > 0) v -= p.mslope[i - 1];
    if (i + 1 < m) v += p.mslope[i];
    res = std::max(res, std::abs(v));
  }
  // primal feasibility and complementarity
  for (size_t i = 0; i < m; ++i) {
    if (qp.lower[i] > -kInf) res = std::max(res, qp.lower[i] - p.z[i]);
    if (qp.upper[i] < kInf) res = std::max(res, p.z[i] - qp.upper[i]);
    if (!act.fixed[i]) {
      if (qp.lower[i] > -kInf)
        res = std::max(res, std::abs(p.mlo[i] * (p.z[i] - qp.lower[i])));
      if (qp.upper[i] < kInf)
        res = std::max(res, std::abs(p.mhi[i] * (qp.upper[i] - p.z[i])));
    }
  }
  for (size_t i = 0; i + 1 < m; ++i) {
    const double slack = p.z[i + 1] - p.z[i] - qp.min_rise[i];
    res = std::max(res, -slack);
    res = std::max(res, std::abs(p.mslope[i] * slack));
  }
  // dual feasibility
  double neg = 0.0;
  for (size_t i = 0; i < m; ++i) {
    if (!act.fixed[i]) {
      neg = std::min(neg, p.mlo[i]);
      neg = std::min(neg, p.mhi[i]);
    }
  }
  for (size_t i = 0; i + 1 < m; ++i) neg = std::min(neg, p.mslope[i]);
  rep.worst_neg_mult = neg;
  rep.residual = std::max(res, -neg);
  return rep;
}

}  // namespace

QpSolution solve_bounded_slope_qp(const BoundedSlopeQp& qp, double kkt_tol,
                                  int max_admm_iterations) {
  const size_t m = qp.q.size();
  if (qp.P.size() != m || qp.lower.size() != m || qp.upper.size() != m ||
      qp.min_rise.size() + 1 != m) {
    throw PreconditionError("inconsistent QP dimensions");
  }
  for (size_t i = 0; i < m; ++i) {
    if (qp.lower[i] > qp.upper[i] + 1e-14) {
      throw ConfigError("QP box is empty at index " + std::to_string(i));
    }
  }

  // the objective is deliberately not rescaled: constraint multipliers
  // keep their natural magnitude, which ADMM dual convergence depends on
  BoundedSlopeQp sq = qp;

  // drop box rows implied by a neighbor's box plus the slope chain (with
  // positive rises only the extreme nodes can bind); equalities are kept
  {
    double implied = -kInf;
    for (size_t i = 0; i < m; ++i) {
      const bool eq = sq.lower[i] == sq.upper[i];
      if (sq.lower[i] > -kInf && !eq && implied >= sq.lower[i] - 1e-15) {
        sq.lower[i] = -kInf;
      }
      if (sq.lower[i] > -kInf) implied = std::max(implied, sq.lower[i]);
      if (i + 1 < m && implied > -kInf) implied += sq.min_rise[i];
    }
    implied = kInf;
    for (size_t i = m; i-- > 0;) {
      const bool eq = sq.lower[i] == sq.upper[i];
      if (sq.upper[i] < kInf && !eq && implied <= sq.upper[i] + 1e-15) {
        sq.upper[i] = kInf;
      }
      if (sq.upper[i] < kInf) implied = std::min(implied, sq.upper[i]);
      if (i > 0 && implied < kInf) implied -= sq.min_rise[i - 1];
    }
  }
  const size_t rows = 2 * m - 1;
  std::vector<double> l(rows), u(rows);
  for (size_t i = 0; i < m; ++i) {
    l[i] = sq.lower[i];
    u[i] = sq.upper[i];
  }
  for (size_t i = 0; i + 1 < m; ++i) {
    l[m + i] = sq.min_rise[i];
    u[m + i] = kInf;
  }

  const double sigma = 1e-6;
  double rho = 0.5;
  const double relax = 1.6;

  auto make_K = [&](double rho_val) {
    TridiagonalMatrix K = sq.P;
    for (size_t i = 0; i < m; ++i) {
      K.diag[i] += sigma + rho_val;               // box rows: identity
      if (i > 0) K.diag[i] += rho_val;            // D'D diagonal
      if (i + 1 < m) K.diag[i] += rho_val;
    }
    for (size_t i = 0; i + 1 < m; ++i) K.off[i] -= rho_val;
    return TridiagonalLDLT(K);
  };
  TridiagonalLDLT K = make_K(rho);

  AdmmState s;
  s.x.assign(m, 0.0);
  s.zc.assign(rows, 0.0);
  s.y.assign(rows, 0.0);
  apply_A(s.x, s.zc);
  for (size_t i = 0; i < rows; ++i) s.zc[i] = std::clamp(s.zc[i], l[i], u[i]);

  std::vector<double> rhs(m), Ax(rows), At(m), zt(rows);
  int iter = 0;
  QpSolution best;
  best.kkt_residual = kInf;

  auto try_polish = [&]() -> bool {
    // active set from slack rows and duals
    ActiveSet act;
    act.lo.assign(m, 0);
    act.hi.assign(m, 0);
    act.fixed.assign(m, 0);
    act.slope.assign(m - 1, 0);
    const double atol = 1e-6;
    for (size_t i = 0; i < m; ++i) {
      if (sq.lower[i] == sq.upper[i]) {
        act.fixed[i] = 1;
        continue;
      }
      if (sq.lower[i] > -kInf &&
          (s.zc[i] - sq.lower[i] < atol || s.y[i] < -atol))
        act.lo[i] = 1;
      if (sq.upper[i] < kInf && (sq.upper[i] - s.zc[i] < atol || s.y[i] > atol))
        act.hi[i] = 1;
      if (act.lo[i] && act.hi[i]) {
        if (s.y[i] < 0)
          act.hi[i] = 0;
        else
          act.lo[i] = 0;
      }
    }
    for (size_t i = 0; i + 1 < m; ++i) {
      if (s.zc[m + i] - sq.min_rise[i] < atol || s.y[m + i] < -atol)
        act.slope[i] = 1;
    }

    for (int round = 0; round < 80; ++round) {
      PolishOutcome p = polish_solve(sq, act);
      if (!p.solved) return false;
      KktReport rep = kkt_residual(sq, p, act);
      bool changed = false;
      // add violated primal constraints; drop actives the equality solve
      // could not honor (inconsistent working set)
      for (size_t i = 0; i < m; ++i) {
        if (act.fixed[i]) continue;
        const bool below = sq.lower[i] > -kInf && p.z[i] < sq.lower[i] - 1e-11;
        const bool above = sq.upper[i] < kInf && p.z[i] > sq.upper[i] + 1e-11;
        if (below && !act.lo[i]) {
          act.lo[i] = 1;
          act.hi[i] = 0;
          changed = true;
        } else if (above && !act.hi[i]) {
          act.hi[i] = 1;
          act.lo[i] = 0;
          changed = true;
        } else if (below && act.lo[i]) {
          act.lo[i] = 0;  // active yet violated: inconsistent set
          changed = true;
        } else if (above && act.hi[i]) {
          act.hi[i] = 0;
          changed = true;
        }
      }
      for (size_t i = 0; i + 1 < m; ++i) {
        const bool broken = p.z[i + 1] - p.z[i] < sq.min_rise[i] - 1e-11;
        if (broken) {
          if (!act.slope[i]) {
            act.slope[i] = 1;
          } else {
            act.slope[i] = 0;
          }
          changed = true;
        }
      }
      if (!changed) {
        // drop negative multipliers (all clearly negative ones at once;
        // otherwise the single worst)
        double worst = -1e-11;
        int kind = -1;
        size_t idx = 0;
        int dropped = 0;
        for (size_t i = 0; i < m; ++i) {
          if (act.fixed[i]) continue;
          if (act.lo[i] && p.mlo[i] < worst) {
            worst = p.mlo[i];
            kind = 0;
            idx = i;
          }
          if (act.hi[i] && p.mhi[i] < worst) {
            worst = p.mhi[i];
            kind = 1;
            idx = i;
          }
          if (act.lo[i] && p.mlo[i] < -1e-8) {
            act.lo[i] = 0;
            ++dropped;
          }
          if (act.hi[i] && p.mhi[i] < -1e-8) {
            act.hi[i] = 0;
            ++dropped;
          }
        }
        for (size_t i = 0; i + 1 < m; ++i) {
          if (act.slope[i] && p.mslope[i] < worst) {
            worst = p.mslope[i];
            kind = 2;
            idx = i;
          }
          if (act.slope[i] && p.mslope[i] < -1e-8) {
            act.slope[i] = 0;
            ++dropped;
          }
        }
        if (dropped > 0) continue;
        if (kind < 0) {
          // clean working set: report the KKT residual on the original
          // data (the preprocessed problem differs only by redundant rows)
          QpSolution sol;
          sol.z = p.z;
          sol.mult_lower = p.mlo;
          sol.mult_upper = p.mhi;
          sol.mult_slope = p.mslope;
          KktReport orep = kkt_residual(qp, p, act);
          sol.kkt_residual = orep.residual;
          sol.admm_iterations = iter;
          sol.polish_rounds = round + 1;
          sol.polished = true;
          if (sol.kkt_residual < best.kkt_residual) best = sol;
          return best.kkt_residual <= kkt_tol;
        }
        if (kind == 0) act.lo[idx] = 0;
        if (kind == 1) act.hi[idx] = 0;
        if (kind == 2) act.slope[idx] = 0;
        changed = true;
      }
    }
    return false;
  };

  const int check_every = 25;
  double eps_admm = 1e-7;
  while (iter < max_admm_iterations) {
    for (int t = 0; t < check_every; ++t, ++iter) {
      // rhs = sigma x - q + A'(rho zc - y)
      for (size_t i = 0; i < rows; ++i) zt[i] = rho * s.zc[i] - s.y[i];
      apply_At(zt, At);
      for (size_t i = 0; i < m; ++i) rhs[i] = sigma * s.x[i] - sq.q[i] + At[i];
      K.solve_in_place(rhs);  // rhs is now x~
      apply_A(rhs, Ax);
      for (size_t i = 0; i < m; ++i) {
        s.x[i] = relax * rhs[i] + (1.0 - relax) * s.x[i];
      }
      for (size_t i = 0; i < rows; ++i) {
        const double za = relax * Ax[i] + (1.0 - relax) * s.zc[i];
        const double zn = std::clamp(za + s.y[i] / rho, l[i], u[i]);
        s.y[i] += rho * (za - zn);
        s.zc[i] = zn;
      }
    }
    Residuals r = residuals(sq, s);
    if ((r.prim < 1e-5 && r.dual < 1e-5) || iter % 1000 == 0) {
      if (try_polish()) return best;
    }
    if (r.prim < eps_admm && r.dual < eps_admm) {
      if (try_polish()) {
        return best;
      }
      eps_admm = std::max(eps_admm * 0.01, 1e-14);
      if (eps_admm <= 1e-14 && best.kkt_residual < kInf) break;
    }
    // adaptive rho
    const double ratio = std::sqrt((r.prim + 1e-16) / (r.dual + 1e-16));
    if (ratio > 5.0 || ratio < 0.2) {
      rho = std::clamp(rho * ratio, 1e-6, 1e6);
      K = make_K(rho);
    }
  }

  if (best.kkt_residual <= kkt_tol) return best;
  throw NumericalError("QP solver failed to reach KKT tolerance (residual " +
                       std::to_string(best.kkt_residual) + ")");
}

}  // namespace auctionvi
