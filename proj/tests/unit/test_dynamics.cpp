#include <cmath>

#include <doctest.h>

#include "auctionvi/dynamics.hpp"
#include "auctionvi/errors.hpp"
#include "auctionvi/qp.hpp"

using namespace auctionvi;

namespace {
const Prior kUniform2 = Prior::uniform(2);
constexpr double kAlphaMax = 0.17677669529663687;

// closed forms of the two-slope gradient for two uniform bidders
// (independent single-variable calculus, frozen)
std::array<double, 2> spa_gradient(double b1, double b2) {
  return {-b1 / (8 * b2) - 5.0 / 48.0 + 3.0 / (16 * b2) + 1.0 / (24 * b1),
          (-3 * b1 - 2 * b2 + 5) / (48 * b2)};
}
std::array<double, 2> fpa_gradient(double b1, double b2) {
  return {-b1 / (8 * b2) - 1.0 / 3.0 + 3.0 / (16 * b2) + 1.0 / (24 * b1),
          (-3 * b1 - 7 * b2 + 5) / (48 * b2)};
}
}  // namespace

TEST_CASE("two-slope gradients") {
  const auto z1 = two_slope_gradient(TwoSlope{0.5, 0.5}, kUniform2,
                                     AuctionRule::FirstPrice, 0.01);
  CHECK(std::abs(z1[0]) <= 1e-12);
  CHECK(std::abs(z1[1]) <= 1e-12);

  const auto z2 = two_slope_gradient(TwoSlope{1.0, 1.0}, kUniform2,
                                     AuctionRule::SecondPrice, 0.01);
  CHECK(std::abs(z2[0]) <= 1e-12);
  CHECK(std::abs(z2[1]) <= 1e-12);

  const auto g = two_slope_gradient(TwoSlope{1.0, 1.0}, kUniform2,
                                    AuctionRule::FirstPrice, 0.01);
  CHECK(g[0] == doctest::Approx(-11.0 / 48.0).epsilon(1e-12));
  CHECK(g[1] == doctest::Approx(-5.0 / 48.0).epsilon(1e-12));

  const auto s = two_slope_gradient(TwoSlope{0.5, 0.5}, kUniform2,
                                    AuctionRule::SecondPrice, 0.01);
  CHECK(s[0] == doctest::Approx(11.0 / 48.0).epsilon(1e-12));

  CHECK_THROWS_AS(two_slope_gradient(TwoSlope{0.001, 0.5}, kUniform2,
                                     AuctionRule::FirstPrice, 0.01),
                  PreconditionError);
}

TEST_CASE("two-slope gradients match the closed forms") {
  for (double b1 : {0.15, 0.4, 0.85}) {
    for (double b2 : {0.2, 0.6, 1.0}) {
      const auto gs = two_slope_gradient(TwoSlope{b1, b2}, kUniform2,
                                         AuctionRule::SecondPrice, 0.01);
      const auto es = spa_gradient(b1, b2);
      CHECK(std::abs(gs[0] - es[0]) <= 1e-10);
      CHECK(std::abs(gs[1] - es[1]) <= 1e-10);
      const auto gf = two_slope_gradient(TwoSlope{b1, b2}, kUniform2,
                                         AuctionRule::FirstPrice, 0.01);
      const auto ef = fpa_gradient(b1, b2);
      CHECK(std::abs(gf[0] - ef[0]) <= 1e-10);
      CHECK(std::abs(gf[1] - ef[1]) <= 1e-10);
    }
  }
}

TEST_CASE("flow field") {
  const FlowField f = flow_field(AuctionRule::FirstPrice, kUniform2, 0.01,
                                 0.0, 1.0, 21);
  const size_t i_half = 10;
  REQUIRE(f.b1[i_half] == doctest::Approx(0.5).epsilon(1e-15));
  const size_t k = f.index(i_half, i_half);
  CHECK(std::hypot(f.g1[k], f.g2[k]) <= 1e-10);
  CHECK_FALSE(f.feasible[f.index(0, 3)]);  // masked below delta

  const TwoSlope star = bne_two_slope(AuctionRule::FirstPrice, kUniform2, 0.01);
  CHECK(star.b1 == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(star.b2 == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("trajectories reach the equilibrium") {
  // start at the star: immediate convergence
  const Trajectory at_star = integrate_trajectory(
      TwoSlope{0.5, 0.5}, AuctionRule::FirstPrice, kUniform2, 0.01, 0.05,
      100, 1e-6);
  CHECK(at_star.status == RunStatus::Converged);
  CHECK(at_star.dist_to_bne.back() <= 1e-12);

  const Trajectory t1 = integrate_trajectory(
      TwoSlope{0.9, 0.9}, AuctionRule::FirstPrice, kUniform2, 0.01, 0.05,
      20000, 1e-5);
  CHECK(t1.status == RunStatus::Converged);
  CHECK(t1.dist_to_bne.back() <= 1e-3);

  const Trajectory t2 = integrate_trajectory(
      TwoSlope{0.2, 0.9}, AuctionRule::SecondPrice, kUniform2, 0.01, 0.05,
      20000, 1e-5);
  CHECK(t2.status == RunStatus::Converged);
  CHECK(t2.dist_to_bne.back() <= 1e-3);

  // feasibility along the way
  for (double v : t1.feas_violation) CHECK(v <= 1e-12);

  // short budget reports max_iters_reached rather than throwing
  const Trajectory t3 = integrate_trajectory(
      TwoSlope{0.9, 0.9}, AuctionRule::FirstPrice, kUniform2, 0.01, 0.05, 3,
      1e-9);
  CHECK(t3.status == RunStatus::MaxSteps);

  // a Runge-Kutta streamline settles at the same stationary point
  const Trajectory t4 = integrate_trajectory(
      TwoSlope{0.8, 0.3}, AuctionRule::FirstPrice, kUniform2, 0.01, 0.05,
      20000, 1e-5, true);
  CHECK(t4.status == RunStatus::Converged);
  CHECK(t4.dist_to_bne.back() <= 1e-3);

  CHECK_THROWS_AS(integrate_trajectory(TwoSlope{0.9, 0.9},
                                       AuctionRule::FirstPrice, kUniform2,
                                       0.01, -0.1, 10, 1e-5),
                  PreconditionError);
}

TEST_CASE("projected gradient learning on the grid") {
  auto grid = uniform_grid(257);

  // starting at the equilibrium converges immediately
  const LearnResult fixed = projected_gradient_learn(
      PwlBid::linear(0.5), AuctionRule::FirstPrice, kUniform2, 0.01, 1.0, 50,
      1e-6, grid);
  CHECK(fixed.trace.status == RunStatus::Converged);
  CHECK(fixed.trace.step_change.size() <= 3);

  // first price from truthful bidding descends to x/2
  const LearnResult fpa = projected_gradient_learn(
      PwlBid::identity(), AuctionRule::FirstPrice, kUniform2, 0.01, 4.0, 3000,
      1e-7, grid);
  CHECK(fpa.trace.dist_to_bne.back() <= 1e-3);
  for (double v : fpa.trace.feas_violation) CHECK(v <= 1e-8);

  // second price from x/2 climbs to truthful bidding
  const LearnResult spa = projected_gradient_learn(
      PwlBid::linear(0.5), AuctionRule::SecondPrice, kUniform2, 0.01, 4.0,
      2000, 1e-7, grid);
  CHECK(spa.trace.dist_to_bne.back() <= 1e-3);

  CHECK_THROWS_AS(
      projected_gradient_learn(PwlBid::linear(0.5, 0.2),
                               AuctionRule::FirstPrice, kUniform2, 0.01, 1.0,
                               10, 1e-6, grid),
      PreconditionError);
}

TEST_CASE("prox mapping") {
  auto grid = uniform_grid(129);
  ProxOperator prox(grid, kUniform2, 0.1);

  // zero functional: the prox returns its center
  const PwlBid v = PwlBid::linear(0.6, 0.1).refined(grid);
  const PwlBid back = prox.apply(v, std::vector<double>(grid.size(), 0.0));
  for (size_t i = 0; i < grid.size(); ++i) {
    CHECK(std::abs(back.values()[i] - v.values()[i]) <= 1e-9);
  }
  CHECK(prox.last_kkt_residual() <= 1e-9);

  // infeasible centers are rejected
  CHECK_THROWS_AS(
      prox.apply(PwlBid::linear(0.05).refined(grid),
                 std::vector<double>(grid.size(), 0.0)),
      PreconditionError);

  // at the second-price equilibrium the derivative functional vanishes:
  // the prox fixes the equilibrium
  const PwlBid id = PwlBid::identity().refined(grid);
  const auto w =
      diagonal_density(id, kUniform2, AuctionRule::SecondPrice, 0.1, grid);
  const PwlBid next = prox.apply(id, w);
  for (size_t i = 0; i < grid.size(); ++i) {
    CHECK(std::abs(next.values()[i] - id.values()[i]) <= 1e-8);
  }
}

TEST_CASE("lipschitz constant") {
  CHECK(lipschitz_constant(kUniform2, 0.1) ==
        doctest::Approx(200.0).epsilon(1e-14));
  CHECK(lipschitz_constant(Prior::uniform(3), 0.2) ==
        doctest::Approx(100.0).epsilon(1e-14));
}

TEST_CASE("derivative operator is Lipschitz in the Hilbert norm") {
  auto grid = uniform_grid(257);
  GramOperator gram(grid, kUniform2);
  FeasibleSet set{0.1, SetVariant::WDelta};
  const double L = lipschitz_constant(kUniform2, 0.1);
  for (uint64_t seed = 0; seed < 100; ++seed) {
    const PwlBid a = sample_feasible(set, kUniform2, 3000 + seed, 2.0);
    const PwlBid b = sample_feasible(set, kUniform2, 4000 + seed, 2.0);
    const auto wa = diagonal_density(a.refined(grid), kUniform2,
                                     AuctionRule::SecondPrice, 0.1, grid);
    const auto wb = diagonal_density(b.refined(grid), kUniform2,
                                     AuctionRule::SecondPrice, 0.1, grid);
    const auto la = gram.load(wa.exact, wa.breakpoints);
    const auto lb = gram.load(wb.exact, wb.breakpoints);
    std::vector<double> dl(grid.size()), db(grid.size());
    const PwlBid ar = a.refined(grid), br = b.refined(grid);
    for (size_t i = 0; i < grid.size(); ++i) {
      dl[i] = la[i] - lb[i];
      db[i] = ar.values()[i] - br.values()[i];
    }
    CHECK(gram.dual_norm_h1(dl) <= L * gram.norm_h1(db) + 1e-8);
  }
}

TEST_CASE("optimistic dual extrapolation") {
  // starting at the second-price equilibrium: everything stays put
  const OdeaResult at_bne =
      odea_run(PwlBid::identity(), AuctionRule::SecondPrice, kUniform2, 0.1,
               kAlphaMax, 10);
  for (double d : at_bne.dist_to_bne) CHECK(d <= 1e-8);
  for (double v : at_bne.feas_violation) CHECK(v <= 1e-8);

  // a short run from x/2 makes progress and satisfies the selection rule
  const OdeaResult run =
      odea_run(PwlBid::linear(0.5), AuctionRule::SecondPrice, kUniform2, 0.1,
               kAlphaMax, 40, 0.1, true);
  REQUIRE(run.selection_value.size() == 40);
  CHECK(run.dist_to_bne.back() < run.dist_to_bne.front());
  int argmin = 0;
  for (int k = 1; k < 40; ++k) {
    if (run.selection_value[k] < run.selection_value[argmin]) argmin = k;
  }
  CHECK(run.selected_k == argmin + 1);

  // recompute the selection series from the stored iterates
  REQUIRE(run.beta_iterates.size() == 40);
  auto grid = uniform_grid();
  GramOperator gram(grid, kUniform2);
  auto hdist = [&](const PwlBid& x, const PwlBid& y) {
    std::vector<double> d(grid.size());
    for (size_t i = 0; i < grid.size(); ++i) {
      d[i] = x.values()[i] - y.values()[i];
    }
    return gram.norm_h1(d);
  };
  const PwlBid b0 = PwlBid::linear(0.5).refined(grid);
  for (int k = 0; k < 40; ++k) {
    const PwlBid& prev = k == 0 ? b0 : run.beta_iterates[k - 1];
    const double expect =
        hdist(run.beta_iterates[k], run.z_iterates[k]) +
        hdist(prev, run.z_iterates[k]);
    CHECK(std::abs(expect - run.selection_value[k]) <= 1e-10);
  }

  // parameter guards
  CHECK_THROWS_AS(odea_run(PwlBid::identity(), AuctionRule::SecondPrice,
                           kUniform2, 0.1, 0.3, 10),
                  PreconditionError);
  CHECK_THROWS_AS(odea_run(PwlBid::linear(0.05), AuctionRule::SecondPrice,
                           kUniform2, 0.1, kAlphaMax, 10),
                  PreconditionError);

  // first-price runs are allowed but annotated
  const OdeaResult fpa =
      odea_run(PwlBid::linear(0.5), AuctionRule::FirstPrice, kUniform2, 0.1,
               kAlphaMax, 5);
  CHECK(fpa.note.find("MVI") != std::string::npos);
}

TEST_CASE("restricted gap") {
  // at the second-price equilibrium the functional is zero
  CHECK(restricted_gap(PwlBid::identity(), AuctionRule::SecondPrice,
                       kUniform2, 0.1, 0.1, 4, 5) <= 1e-10);

  // the gap scales linearly with the radius at an interior point
  const PwlBid point = PwlBid::linear(0.8, 0.05);
  const double g1 = restricted_gap(point, AuctionRule::SecondPrice, kUniform2,
                                   0.1, 0.02, 4, 5);
  const double g2 = restricted_gap(point, AuctionRule::SecondPrice, kUniform2,
                                   0.1, 0.04, 4, 5);
  CHECK(g1 > 0.0);
  CHECK(g2 / g1 == doctest::Approx(2.0).epsilon(0.05));
}
