#include "auctionvi/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "auctionvi/errors.hpp"
#include "auctionvi/qp.hpp"

namespace auctionvi {
namespace {

PwlBid slope_direction_first() {
  return PwlBid({0.0, 0.5, 1.0}, {0.0, 0.5, 0.5});
}

PwlBid slope_direction_second() {
  return PwlBid({0.0, 0.5, 1.0}, {0.0, 0.0, 0.5});
}

}  // namespace

TwoSlope bne_two_slope(AuctionRule rule, const Prior& prior, double delta) {
  const BneSolution bne = analytic_bne(prior, rule, delta);
  // exact only when the BNE is linear (uniform priors); otherwise the
  // nearest two-slope representative, good enough for distance bookkeeping
  const double b1 = 2.0 * bne.bid.eval(0.5);
  const double b2 = 2.0 * (bne.bid.eval(1.0) - bne.bid.eval(0.5));
  return TwoSlope{b1, b2};
}

std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Converged:
      return "converged";
    case RunStatus::MaxSteps:
      return "max_iters_reached";
    case RunStatus::Diverged:
      return "diverged";
  }
  return "?";
}

std::array<double, 2> two_slope_gradient(const TwoSlope& s, const Prior& prior,
                                         AuctionRule rule, double delta) {
  if (!s.feasible(delta)) {
    throw PreconditionError("two-slope point is infeasible");
  }
  const PwlBid bid = s.to_bid();
  const std::vector<double> tiny_grid = {0.0, 1.0};
  const GradientDensity w =
      diagonal_density(bid, prior, rule, delta, tiny_grid);
  return {apply_density(w, slope_direction_first(), prior),
          apply_density(w, slope_direction_second(), prior)};
}

void FlowField::write_csv(const std::string& path,
                          std::span<const std::string> header_lines) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  for (const auto& l : header_lines) out << "# " << l << "\n";
  out << "b1,b2,feasible,g1,g2\n";
  out.precision(17);
  for (size_t i = 0; i < b1.size(); ++i) {
    for (size_t j = 0; j < b2.size(); ++j) {
      const size_t k = index(i, j);
      out << b1[i] << "," << b2[j] << "," << int(feasible[k]) << "," << g1[k]
          << "," << g2[k] << "\n";
    }
  }
}

FlowField flow_field(AuctionRule rule, const Prior& prior, double delta,
                     double b_lo, double b_hi, size_t resolution) {
  if (resolution < 2) throw ConfigError("flow field needs resolution >= 2");
  FlowField f;
  f.rule = rule;
  f.delta = delta;
  f.b1.resize(resolution);
  f.b2.resize(resolution);
  for (size_t i = 0; i < resolution; ++i) {
    const double t =
        static_cast<double>(i) / static_cast<double>(resolution - 1);
    f.b1[i] = b_lo + (b_hi - b_lo) * t;
    f.b2[i] = f.b1[i];
  }
  const size_t cells = resolution * resolution;
  f.g1.assign(cells, 0.0);
  f.g2.assign(cells, 0.0);
  f.feasible.assign(cells, 0);
  for (size_t i = 0; i < resolution; ++i) {
    for (size_t j = 0; j < resolution; ++j) {
      const TwoSlope s{f.b1[i], f.b2[j]};
      if (!s.feasible(delta)) continue;
      const size_t k = f.index(i, j);
      f.feasible[k] = 1;
      const auto g = two_slope_gradient(s, prior, rule, delta);
      f.g1[k] = g[0];
      f.g2[k] = g[1];
    }
  }
  return f;
}

void Trajectory::write_csv(const std::string& path,
                           std::span<const std::string> header_lines) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  for (const auto& l : header_lines) out << "# " << l << "\n";
  const bool with_states = !states.empty();
  const bool with_feas = feas_violation.size() == grad_norm.size();
  out << "iter";
  if (with_states) out << ",b1,b2";
  out << ",grad_norm,dist_to_bne,step_change";
  if (with_feas) out << ",feas_violation";
  out << "\n";
  out.precision(17);
  for (size_t i = 0; i < grad_norm.size(); ++i) {
    out << i;
    if (with_states) out << "," << states[i][0] << "," << states[i][1];
    out << "," << grad_norm[i] << "," << dist_to_bne[i] << ","
        << step_change[i];
    if (with_feas) out << "," << feas_violation[i];
    out << "\n";
  }
  out << "# status=" << to_string(status) << "\n";
}

Trajectory integrate_trajectory(const TwoSlope& start, AuctionRule rule,
                                const Prior& prior, double delta, double step,
                                int max_steps, double tol, bool rk4) {
  if (!(step > 0)) throw PreconditionError("step must be positive");
  if (!start.feasible(delta)) {
    throw PreconditionError("trajectory start is infeasible");
  }
  const TwoSlope star = bne_two_slope(rule, prior, delta);

  auto clip = [&](TwoSlope s) {
    s.b1 = std::clamp(s.b1, delta, 1.0);
    s.b2 = std::clamp(s.b2, delta, 1.0);
    return s;
  };
  auto grad = [&](const TwoSlope& s) {
    return two_slope_gradient(s, prior, rule, delta);
  };

  Trajectory tr;
  TwoSlope s = start;
  auto box_violation = [&](const TwoSlope& p) {
    return std::max({delta - p.b1, delta - p.b2,
                     0.5 * (p.b1 + p.b2) - 1.0, 0.0});
  };
  for (int it = 0; it < max_steps; ++it) {
    const auto g = grad(s);
    const double gn = std::hypot(g[0], g[1]);
    tr.states.push_back({s.b1, s.b2});
    tr.grad_norm.push_back(gn);
    tr.dist_to_bne.push_back(std::hypot(s.b1 - star.b1, s.b2 - star.b2));
    tr.feas_violation.push_back(box_violation(s));
    if (!std::isfinite(gn) || std::abs(s.b1) > 10 || std::abs(s.b2) > 10) {
      tr.step_change.push_back(0.0);
      tr.status = RunStatus::Diverged;
      return tr;
    }
    if (gn <= tol) {
      tr.step_change.push_back(0.0);
      tr.status = RunStatus::Converged;
      return tr;
    }
    TwoSlope next;
    if (rk4) {
      const auto k1 = g;
      const auto at = [&](double c, const std::array<double, 2>& k) {
        return clip(TwoSlope{s.b1 + c * step * k[0], s.b2 + c * step * k[1]});
      };
      const auto k2 = grad(at(0.5, k1));
      const auto k3 = grad(at(0.5, k2));
      const auto k4 = grad(at(1.0, k3));
      next = clip(TwoSlope{
          s.b1 + step / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
          s.b2 + step / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])});
    } else {
      next = clip(TwoSlope{s.b1 + step * g[0], s.b2 + step * g[1]});
    }
    tr.step_change.push_back(std::hypot(next.b1 - s.b1, next.b2 - s.b2));
    s = next;
  }
  tr.status = RunStatus::MaxSteps;
  return tr;
}

LearnResult projected_gradient_learn(const PwlBid& start, AuctionRule rule,
                                     const Prior& prior, double delta,
                                     double step_max, int max_iters,
                                     double tol,
                                     std::span<const double> grid_in) {
  if (!(step_max > 0)) throw PreconditionError("step must be positive");
  FeasibleSet set{delta, SetVariant::BDelta};
  if (!set.contains(start, 1e-8)) {
    throw PreconditionError("learning start is not in B_delta");
  }
  std::vector<double> grid = grid_in.empty()
                                 ? uniform_grid()
                                 : std::vector<double>(grid_in.begin(),
                                                       grid_in.end());
  Projector proj(grid, prior, set, Metric::H1);
  const GramOperator& gram = proj.gram();
  const size_t m = grid.size();
  const BneSolution bne = analytic_bne(prior, rule, delta, grid);

  PwlBid beta = start.refined(grid);
  Trajectory tr;
  double step = step_max;
  for (int it = 0; it < max_iters; ++it) {
    const GradientDensity w = diagonal_density(beta, prior, rule, delta, grid);
    const auto load = gram.load(w.exact, w.breakpoints);
    const auto ascent = gram.riesz_h1(load);
    const double base_u = ex_ante_utility(beta, beta, prior, rule);

    double s = step;
    double change = 0.0;
    PwlBid next = beta;
    for (int bt = 0; bt < 40; ++bt) {
      std::vector<double> target(m);
      for (size_t i = 0; i < m; ++i) {
        target[i] = beta.values()[i] + s * ascent[i];
      }
      const auto z = proj.project_values(target);
      double pairing = 0.0;
      for (size_t i = 0; i < m; ++i) {
        pairing += load[i] * (z[i] - beta.values()[i]);
      }
      PwlBid cand = PwlBid::from_samples(grid, z);
      const double u = ex_ante_utility(cand, beta, prior, rule);
      if (u >= base_u + 1e-4 * pairing || pairing <= 1e-16) {
        std::vector<double> d(m);
        for (size_t i = 0; i < m; ++i) d[i] = z[i] - beta.values()[i];
        change = gram.norm_l2(d);
        next = std::move(cand);
        step = std::min(step_max, 2.0 * s);
        break;
      }
      s *= 0.5;
    }

    const PwlBid to_bne = pwl_combine(1.0, beta, -1.0, bne.bid);
    tr.grad_norm.push_back(gram.dual_norm_h1(load));
    tr.dist_to_bne.push_back(norm_l2(to_bne, prior));
    tr.step_change.push_back(change);
    tr.feas_violation.push_back(set.violation(next));
    beta = std::move(next);
    if (change <= tol) {
      tr.status = RunStatus::Converged;
      return {std::move(beta), std::move(tr)};
    }
  }
  tr.status = RunStatus::MaxSteps;
  return {std::move(beta), std::move(tr)};
}

double lipschitz_constant(const Prior& prior, double delta) {
  if (!(delta > 0)) throw ConfigError("delta must be positive");
  return 2.0 / (delta * delta) * prior.max_rival_pdf_sup();
}

ProxOperator::ProxOperator(std::span<const double> grid, const Prior& prior,
                           double delta)
    : gram_(grid, prior), delta_(delta) {
  FeasibleSet set{delta, SetVariant::WDelta};
  set.validate();
}

PwlBid ProxOperator::apply(const PwlBid& v,
                           std::span<const double> load) const {
  const auto grid = gram_.grid();
  const size_t m = grid.size();
  FeasibleSet set{delta_, SetVariant::WDelta};
  if (!set.contains(v, 1e-8)) {
    throw PreconditionError("prox center is not in W_delta");
  }
  std::vector<double> vvals = v.sampled(grid);

  BoundedSlopeQp qp;
  qp.P = gram_.h1();
  qp.q.assign(m, 0.0);
  qp.P.multiply(vvals, qp.q);
  for (size_t i = 0; i < m; ++i) qp.q[i] = load[i] - qp.q[i];
  qp.lower.assign(m, 0.0);
  qp.upper.assign(m, 1.0);
  qp.min_rise.resize(m - 1);
  for (size_t i = 0; i + 1 < m; ++i) {
    qp.min_rise[i] = delta_ * (grid[i + 1] - grid[i]);
  }

  QpSolution sol = solve_bounded_slope_qp(qp);
  last_kkt_ = sol.kkt_residual;
  return PwlBid::from_samples(grid, std::move(sol.z));
}

PwlBid ProxOperator::apply(const PwlBid& v,
                           const GradientDensity& functional) const {
  const auto load = gram_.load(functional.exact, functional.breakpoints);
  return apply(v, load);
}

PwlBid prox_map(const PwlBid& v, const GradientDensity& functional,
                double delta, const Prior& prior) {
  ProxOperator prox(v.knots(), prior, delta);
  return prox.apply(v, functional);
}

OdeaResult odea_run(const PwlBid& beta0, AuctionRule rule, const Prior& prior,
                    double delta, double alpha, int iterations,
                    double gap_probe_radius, bool keep_iterates) {
  constexpr double kAlphaMax = 0.17677669529663687;  // 1/(4 sqrt 2)
  if (!(alpha > 0.0 && alpha <= kAlphaMax + 1e-12)) {
    throw PreconditionError("alpha must lie in (0, 1/(4 sqrt 2)]");
  }
  if (iterations < 1) throw PreconditionError("need at least one iteration");
  FeasibleSet set{delta, SetVariant::WDelta};
  if (!set.contains(beta0, 1e-8)) {
    throw PreconditionError("beta0 is not in W_delta");
  }

  auto grid = uniform_grid();
  const PwlBid b0 = beta0.refined(grid);
  ProxOperator prox(grid, prior, delta);
  const GramOperator& gram = prox.gram();
  const double L = lipschitz_constant(prior, delta);
  const double scale = alpha / L;
  const BneSolution bne = analytic_bne(prior, rule, delta, grid);
  const auto bne_vals = bne.bid.sampled(grid);

  const size_t m = grid.size();
  OdeaState st;
  st.beta = b0;
  st.z = b0;
  st.dual_load.assign(m, 0.0);
  st.dual_samples.assign(m, 0.0);
  st.alpha = alpha;
  st.lipschitz = L;

  OdeaResult out;
  if (rule == AuctionRule::FirstPrice) {
    out.note = "no MVI solution exists - convergence not guaranteed";
  }

  auto h_dist = [&](const PwlBid& a, std::span<const double> ref) {
    std::vector<double> d(m);
    const auto av = a.values();
    for (size_t i = 0; i < m; ++i) d[i] = av[i] - ref[i];
    return gram.norm_h1(d);
  };

  std::vector<double> load(m), neg_load(m);
  double best_sel = std::numeric_limits<double>::infinity();
  PwlBid best_beta = b0;
  int best_k = 0;

  for (int k = 1; k <= iterations; ++k) {
    // line 3: beta_k = P_{z_{k-1}}( -(alpha/L) DU(beta_{k-1}) )
    const GradientDensity w_prev =
        diagonal_density(st.beta, prior, rule, delta, grid);
    load = gram.load(w_prev.exact, w_prev.breakpoints);
    for (size_t i = 0; i < m; ++i) neg_load[i] = -scale * load[i];
    const PwlBid beta_prev = st.beta;
    const PwlBid beta_k = prox.apply(st.z, neg_load);

    // line 4: accumulate the dual functional
    const GradientDensity w_k =
        diagonal_density(beta_k, prior, rule, delta, grid);
    const auto load_k = gram.load(w_k.exact, w_k.breakpoints);
    for (size_t i = 0; i < m; ++i) {
      st.dual_load[i] -= scale * load_k[i];
      st.dual_samples[i] -= scale * w_k.values[i];
    }

    // line 5: z_k = P_{beta_0}( g_k )
    const PwlBid z_prev = st.z;
    st.z = prox.apply(b0, st.dual_load);
    st.beta = beta_k;
    st.k = k;

    // line 7 bookkeeping
    const auto zp = z_prev.values();
    const double sel = h_dist(beta_k, zp) + h_dist(beta_prev, zp);
    out.selection_value.push_back(sel);
    if (sel < best_sel) {
      best_sel = sel;
      best_beta = beta_k;
      best_k = k;
    }
    out.dist_to_bne.push_back(h_dist(beta_k, bne_vals));
    // restricted-gap lower bound via the Riesz probe: |E[dir]| with
    // ||dir||_H = radius gives radius * ||E||_{H*}
    out.restricted_gap.push_back(gap_probe_radius *
                                 gram.dual_norm_h1(load_k));
    out.feas_violation.push_back(
        std::max(set.violation(st.beta), set.violation(st.z)));
    if (keep_iterates) {
      out.beta_iterates.push_back(st.beta);
      out.z_iterates.push_back(z_prev);
    }
  }

  out.beta_tilde = best_beta;
  out.selected_k = best_k;
  out.final_state = std::move(st);
  return out;
}

double restricted_gap(const PwlBid& beta_tilde, AuctionRule rule,
                      const Prior& prior, double delta, double radius,
                      int probe_count, uint64_t seed) {
  if (!(radius > 0)) throw PreconditionError("radius must be positive");
  FeasibleSet set{delta, SetVariant::WDelta};
  if (!set.contains(beta_tilde, 1e-8)) {
    throw PreconditionError("beta_tilde is not in W_delta");
  }
  auto grid = uniform_grid();
  const PwlBid bt = beta_tilde.refined(grid);
  const GramOperator gram(grid, prior);
  const size_t m = grid.size();

  const GradientDensity w = diagonal_density(bt, prior, rule, delta, grid);
  const auto load = gram.load(w.exact, w.breakpoints);

  double best = 0.0;
  auto consider = [&](std::span<const double> probe_vals) {
    // direction = probe - beta_tilde, scaled into the H-ball
    std::vector<double> dir(m);
    for (size_t i = 0; i < m; ++i) dir[i] = probe_vals[i] - bt.values()[i];
    const double nrm = gram.norm_h1(dir);
    if (nrm < 1e-15) return;
    const double s = std::min(1.0, radius / nrm);
    double pairing = 0.0;
    for (size_t i = 0; i < m; ++i) pairing += dir[i] * s * load[i];
    best = std::max(best, std::abs(pairing));
  };

  // Riesz-optimal directions, pulled back into W_delta by the H-projection
  {
    const auto r = gram.riesz_h1(load);
    const double rn = gram.dual_norm_h1(load);
    if (rn > 1e-15) {
      Projector wproj(grid, prior, set, Metric::H1);
      std::vector<double> target(m);
      for (int sign : {-1, 1}) {
        for (size_t i = 0; i < m; ++i) {
          target[i] = bt.values()[i] + sign * radius * r[i] / rn;
        }
        consider(wproj.project_values(target));
      }
    }
  }
  for (int i = 0; i < probe_count; ++i) {
    const PwlBid probe =
        sample_feasible(set, prior, seed + static_cast<uint64_t>(i), 2.0);
    consider(probe.sampled(grid));
  }
  return best;
}

}  // namespace auctionvi
