#include "auctionvi/equilibria.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "auctionvi/errors.hpp"

namespace auctionvi {
namespace {

std::vector<double> grid_or_default(std::span<const double> grid) {
  if (!grid.empty()) return {grid.begin(), grid.end()};
  return uniform_grid();
}

}  // namespace

BneSolution bne_second_price(const Prior& prior, double delta,
                             std::span<const double> grid) {
  if (!(delta > 0.0)) throw ConfigError("delta must be positive");
  if (delta > 1.0) {
    throw ConfigError("identity bid is infeasible for delta > 1");
  }
  auto g = grid_or_default(grid);
  std::vector<double> vals(g.begin(), g.end());
  return BneSolution{PwlBid::from_samples(g, std::move(vals)),
                     AuctionRule::SecondPrice, prior.label(), delta, 1.0};
}

BneSolution bne_first_price(const Prior& prior, double delta,
                            std::span<const double> grid) {
  if (!(delta > 0.0)) throw ConfigError("delta must be positive");
  const double f_inf = prior.pdf_inf();
  const double f_sup = prior.pdf_sup();
  if (!(f_inf > 0.0)) {
    throw UnsupportedOperation(
        "first-price BNE needs a density bounded away from zero");
  }
  const int n = prior.bidders();
  const double slope_bound =
      (static_cast<double>(n - 1) / n) * (f_inf / f_sup);
  if (delta > slope_bound + 1e-12) {
    throw ConfigError("delta exceeds the certified equilibrium slope bound " +
                      std::to_string(slope_bound));
  }

  auto g = grid_or_default(grid);
  std::vector<double> vals(g.size(), 0.0);
  double acc = 0.0;  // int_0^x y dG(y)
  for (size_t i = 1; i < g.size(); ++i) {
    const std::vector<double> seg = {g[i - 1], g[i]};
    acc += prior.integrate_dG([](double y) { return y; }, seg, 1e-14).value;
    const double G = prior.max_rival_cdf(g[i]);
    vals[i] = G > 0.0 ? acc / G : 0.0;
  }
  vals[0] = 0.0;
  return BneSolution{PwlBid::from_samples(g, std::move(vals)),
                     AuctionRule::FirstPrice, prior.label(), delta,
                     slope_bound};
}

BneSolution analytic_bne(const Prior& prior, AuctionRule rule, double delta,
                         std::span<const double> grid) {
  return rule == AuctionRule::SecondPrice
             ? bne_second_price(prior, delta, grid)
             : bne_first_price(prior, delta, grid);
}

double vi_residual(const PwlBid& candidate, const Prior& prior,
                   AuctionRule rule, double delta, int sampled_probes,
                   uint64_t seed) {
  FeasibleSet set{delta, SetVariant::BDelta};
  set.validate();

  const std::vector<double> tiny_grid = {0.0, 1.0};
  const PwlBid cand = candidate.simplified();
  GradientDensity w = diagonal_density(cand, prior, rule, delta, tiny_grid);

  std::vector<PwlBid> probes;
  probes.push_back(PwlBid::linear(delta));  // minimal slope ray
  probes.push_back(PwlBid::identity());
  // earliest feasible saturation toward the upper box bound
  {
    auto grid = uniform_grid(65);
    std::vector<double> vs(grid.size());
    for (size_t i = 0; i < grid.size(); ++i) {
      vs[i] = i == 0 ? 0.0 : 1.0 - delta * (1.0 - grid[i]);
    }
    probes.push_back(PwlBid::from_samples(grid, std::move(vs)));
  }
  std::mt19937_64 subs(seed);
  for (int i = 0; i < sampled_probes; ++i) {
    probes.push_back(sample_feasible(set, prior, subs()));
  }

  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& probe : probes) {
    const PwlBid dir = pwl_combine(1.0, probe, -1.0, cand);
    worst = std::max(worst, apply_density(w, dir, prior));
  }
  return worst;
}

double fpa_ode_residual(const PwlBid& bid, const Prior& prior) {
  auto bps =
      merge_breakpoints({bid.knots(), prior.smoothness_breakpoints()});
  auto residual_at = [&](double x, double slope) {
    const double g = prior.max_rival_pdf(x);
    const double G = prior.max_rival_cdf(x);
    return std::abs(g * bid.eval(x) + G * slope - x * g);
  };
  // piece midpoints plus the domain endpoints with their one-sided slopes
  double worst = std::max(residual_at(0.0, bid.slope_at(0.0)),
                          residual_at(1.0, bid.slope_at(1.0)));
  for (size_t i = 0; i + 1 < bps.size(); ++i) {
    const double mid = 0.5 * (bps[i] + bps[i + 1]);
    worst = std::max(worst, residual_at(mid, bid.slope_at(mid)));
  }
  return worst;
}

}  // namespace auctionvi
