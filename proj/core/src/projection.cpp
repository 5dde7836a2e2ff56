#include "auctionvi/projection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "auctionvi/errors.hpp"

namespace auctionvi {

GramOperator::GramOperator(std::span<const double> grid, const Prior& prior)
    : grid_(grid.begin(), grid.end()) {
  const size_t m = grid_.size();
  if (m < 2) throw PreconditionError("grid needs at least 2 points");
  mass_.diag.assign(m, 0.0);
  mass_.off.assign(m - 1, 0.0);
  h1_.diag.assign(m, 0.0);
  h1_.off.assign(m - 1, 0.0);

  for (size_t i = 0; i + 1 < m; ++i) {
    const double a = grid_[i], b = grid_[i + 1];
    const double h = b - a;
    const std::vector<double> cell = {a, b};
    auto phi_l = [&](double x) { return (b - x) / h; };
    auto phi_r = [&](double x) { return (x - a) / h; };
    const double m_ll =
        prior.integrate_dF([&](double x) { return phi_l(x) * phi_l(x); }, cell)
            .value;
    const double m_lr =
        prior.integrate_dF([&](double x) { return phi_l(x) * phi_r(x); }, cell)
            .value;
    const double m_rr =
        prior.integrate_dF([&](double x) { return phi_r(x) * phi_r(x); }, cell)
            .value;
    // stiffness is exact: slopes are +-1/h, so the cell integral is dF/h^2
    const double k = (prior.cdf(b) - prior.cdf(a)) / (h * h);
    mass_.diag[i] += m_ll;
    mass_.diag[i + 1] += m_rr;
    mass_.off[i] += m_lr;
    h1_.diag[i] += m_ll + k;
    h1_.diag[i + 1] += m_rr + k;
    h1_.off[i] += m_lr - k;
  }
  h1_ldlt_.factor(h1_);
}

std::vector<double> GramOperator::load(
    const Integrand& fn, std::span<const double> breakpoints) const {
  const size_t m = grid_.size();
  std::vector<double> c(m, 0.0);
  // per-cell tolerance so the total stays near 1e-12
  const double tol = 1e-13;
  size_t bp = 0;
  std::vector<double> cell;
  for (size_t i = 0; i + 1 < m; ++i) {
    const double a = grid_[i], b = grid_[i + 1];
    const double h = b - a;
    cell.clear();
    cell.push_back(a);
    while (bp < breakpoints.size() && breakpoints[bp] <= a) ++bp;
    size_t k = bp;
    while (k < breakpoints.size() && breakpoints[k] < b) {
      if (breakpoints[k] > cell.back() + 1e-15) cell.push_back(breakpoints[k]);
      ++k;
    }
    cell.push_back(b);
    const QuadResult left = integrate_segments(
        [&](double x) { return fn(x) * (b - x) / h; }, cell, tol);
    const QuadResult right = integrate_segments(
        [&](double x) { return fn(x) * (x - a) / h; }, cell, tol);
    c[i] += left.value;
    c[i + 1] += right.value;
  }
  return c;
}

std::vector<double> GramOperator::riesz_h1(std::span<const double> load) const {
  return h1_ldlt_.solve(load);
}

double GramOperator::dual_norm_h1(std::span<const double> load) const {
  auto r = riesz_h1(load);
  double s = 0.0;
  for (size_t i = 0; i < r.size(); ++i) s += r[i] * load[i];
  return std::sqrt(std::max(0.0, s));
}

double GramOperator::norm_h1(std::span<const double> values) const {
  std::vector<double> y(values.size());
  h1_.multiply(values, y);
  double s = 0.0;
  for (size_t i = 0; i < y.size(); ++i) s += y[i] * values[i];
  return std::sqrt(std::max(0.0, s));
}

double GramOperator::norm_l2(std::span<const double> values) const {
  std::vector<double> y(values.size());
  mass_.multiply(values, y);
  double s = 0.0;
  for (size_t i = 0; i < y.size(); ++i) s += y[i] * values[i];
  return std::sqrt(std::max(0.0, s));
}

Projector::Projector(std::span<const double> grid, const Prior& prior,
                     FeasibleSet set, Metric metric)
    : gram_(grid, prior), set_(set), metric_(metric) {
  set_.validate();
}

std::vector<double> Projector::project_values(
    std::span<const double> values) const {
  const auto grid = gram_.grid();
  const size_t m = grid.size();
  if (values.size() != m) throw PreconditionError("grid/value size mismatch");

  BoundedSlopeQp qp;
  qp.P = metric_ == Metric::L2 ? gram_.mass() : gram_.h1();
  qp.q.assign(m, 0.0);
  qp.P.multiply(values, qp.q);
  for (auto& v : qp.q) v = -v;
  qp.lower.assign(m, 0.0);
  qp.upper.assign(m, 1.0);
  if (set_.variant == SetVariant::BDelta) {
    qp.lower[0] = qp.upper[0] = 0.0;
  }
  qp.min_rise.resize(m - 1);
  for (size_t i = 0; i + 1 < m; ++i) {
    qp.min_rise[i] = set_.delta * (grid[i + 1] - grid[i]);
  }

  QpSolution sol = solve_bounded_slope_qp(qp);
  last_kkt_ = sol.kkt_residual;
  return std::move(sol.z);
}

PwlBid Projector::operator()(const PwlBid& bid) const {
  const auto grid = gram_.grid();
  std::vector<double> vals = bid.sampled(grid);
  return PwlBid::from_samples(grid, project_values(vals));
}

PwlBid project(const PwlBid& bid, const FeasibleSet& set, Metric metric,
               const Prior& prior) {
  Projector p(bid.knots(), prior, set, metric);
  return p(bid);
}

}  // namespace auctionvi
