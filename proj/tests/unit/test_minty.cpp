#include <cmath>

#include <doctest.h>

#include "auctionvi/errors.hpp"
#include "auctionvi/minty.hpp"

using namespace auctionvi;

namespace {
const Prior kUniform2 = Prior::uniform(2);

// frozen family residuals and distances (exact piecewise-polynomial
// integration, computed independently and fixed)
struct FamilyRow {
  int n;
  double residual;
  double v_norm;
};
constexpr FamilyRow kFamily[] = {
    {0, 3.0 / 320.0, 3.0 / 8.0},
    {2, 33.0 / 5120.0, 27.0 / 160.0},
    {5, 3.0 / 1120.0, 9.0 / 98.0},
    {10, 47.0 / 46080.0, 5.0 / 96.0},
    {20, 69.0 / 212960.0, 27.0 / 968.0},
};
}  // namespace

TEST_CASE("second-price strategies satisfy the dual condition") {
  FeasibleSet set{0.05, SetVariant::BDelta};
  for (uint64_t seed = 0; seed < 50; ++seed) {
    const PwlBid beta = sample_feasible(set, kUniform2, seed, 2.5);
    const PwlBid bt = sample_feasible(set, kUniform2, seed + 1000, 2.5);
    const MintyReport rep =
        minty_residual(beta, bt, kUniform2, AuctionRule::SecondPrice, 0.05);
    CHECK(rep.residual <= 1e-10);
    CHECK_FALSE(rep.certified_violation);
  }
}

TEST_CASE("residual vanishes at the equilibrium itself") {
  const PwlBid id = PwlBid::identity();
  const PwlBid bt = PwlBid::linear(0.7);
  const MintyReport rep =
      minty_residual(id, bt, kUniform2, AuctionRule::SecondPrice, 0.05);
  CHECK(std::abs(rep.residual) <= 1e-15);
}

TEST_CASE("first-price counterexample family") {
  double prev_norm = 1e9;
  for (const auto& row : kFamily) {
    const PwlBid member = fpa_mvi_counterexample(row.n);
    // continuity at the first breakpoint
    if (row.n > 0) {
      const double a = static_cast<double>(row.n) / (row.n + 2.0);
      CHECK(member.eval(a) ==
            doctest::Approx(row.n / (2.0 * (row.n + 2.0))).epsilon(1e-14));
    }
    FeasibleSet set{0.2, SetVariant::BDelta};
    CHECK(set.contains(member, 1e-12));

    const MintyReport rep =
        minty_residual(member, member, kUniform2, AuctionRule::FirstPrice, 0.2);
    CHECK(rep.residual == doctest::Approx(row.residual).epsilon(1e-10));
    CHECK(rep.certified_violation);

    const PwlBid diff =
        pwl_combine(1.0, member, -1.0, PwlBid::linear(0.5));
    const double vn = norm_v(diff, kUniform2);
    CHECK(vn == doctest::Approx(row.v_norm).epsilon(1e-12));
    CHECK(vn < prev_norm);
    prev_norm = vn;
  }
  CHECK_THROWS_AS(fpa_mvi_counterexample(-1), PreconditionError);
}

TEST_CASE("family approaches the equilibrium") {
  double prev = 1e9;
  for (int n : {20, 50, 100, 200}) {
    const PwlBid diff = pwl_combine(1.0, fpa_mvi_counterexample(n), -1.0,
                                    PwlBid::linear(0.5));
    const double vn = norm_v(diff, kUniform2);
    CHECK(vn < prev);
    prev = vn;
  }
  CHECK(prev <= 0.006);
}

TEST_CASE("two-slope violation map") {
  const ViolationMap fpa = scan_two_slope(
      AuctionRule::FirstPrice, kUniform2, 0.01, 0.0, 1.0, 0.0, 1.0, 41);
  CHECK(fpa.any_violated());

  // the equilibrium lattice point carries a zero residual
  size_t i_half = 20;  // 0.5 on a 41-point [0,1] axis
  REQUIRE(fpa.b1[i_half] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(std::abs(fpa.residual[fpa.index(i_half, i_half)]) <= 1e-12);
  CHECK_FALSE(fpa.violated[fpa.index(i_half, i_half)]);

  // a known point inside the violation region (closed-form residual > 0)
  size_t i_b1 = 36, i_b2 = 6;  // (0.9, 0.15)
  REQUIRE(fpa.b1[i_b1] == doctest::Approx(0.9).epsilon(1e-12));
  REQUIRE(fpa.b2[i_b2] == doctest::Approx(0.15).epsilon(1e-12));
  CHECK(fpa.violated[fpa.index(i_b1, i_b2)]);

  // infeasible cells are masked, not errored
  CHECK_FALSE(fpa.feasible[fpa.index(0, 5)]);

  const ViolationMap spa = scan_two_slope(
      AuctionRule::SecondPrice, kUniform2, 0.01, 0.0, 1.0, 0.0, 1.0, 41);
  CHECK_FALSE(spa.any_violated());
  CHECK(spa.violated_count() == 0);

  CHECK_THROWS_AS(scan_two_slope(AuctionRule::FirstPrice, kUniform2, 0.5, 0.0,
                                 0.1, 0.0, 0.1, 11),
                  ConfigError);
}

TEST_CASE("probe sweeps") {
  const MintyProbeSummary spa = minty_probe_sweep(
      100, kUniform2, AuctionRule::SecondPrice, 0.05, 7);
  CHECK(spa.max_residual <= 1e-8);
  CHECK_FALSE(spa.any_certified_violation);

  const MintyProbeSummary fpa = minty_probe_sweep(
      50, kUniform2, AuctionRule::FirstPrice, 0.1, 7);
  CHECK(fpa.max_residual > 1e-8);
  CHECK(fpa.any_certified_violation);

  const MintyProbeSummary again = minty_probe_sweep(
      100, kUniform2, AuctionRule::SecondPrice, 0.05, 7);
  CHECK(spa.to_json() == again.to_json());
}
