#include <cmath>
#include <cstdio>
#include <fstream>
#include <utility>

#include <doctest.h>

#include "auctionvi/bid.hpp"
#include "auctionvi/derivative.hpp"
#include "auctionvi/errors.hpp"

using namespace auctionvi;

namespace {
const Prior kUniform2 = Prior::uniform(2);
}

TEST_CASE("ex-ante utility closed forms") {
  const PwlBid id = PwlBid::identity();
  const PwlBid half = PwlBid::linear(0.5);

  CHECK(ex_ante_utility(id, id, kUniform2, AuctionRule::SecondPrice) ==
        doctest::Approx(1.0 / 6.0).epsilon(1e-12));
  CHECK(ex_ante_utility(id, id, kUniform2, AuctionRule::FirstPrice) ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK(ex_ante_utility(half, half, kUniform2, AuctionRule::FirstPrice) ==
        doctest::Approx(1.0 / 6.0).epsilon(1e-12));

  // overbidding the whole rival range wins everything: int (x - 1) dx
  const PwlBid above = PwlBid::linear(0.0, 1.0);
  CHECK(ex_ante_utility(above, half, kUniform2, AuctionRule::FirstPrice) ==
        doctest::Approx(-0.5).epsilon(1e-12));

  const PwlBid decreasing({0.0, 1.0}, {0.5, 0.2});
  CHECK_THROWS_AS(
      ex_ante_utility(id, decreasing, kUniform2, AuctionRule::FirstPrice),
      PreconditionError);
}

TEST_CASE("second-price density") {
  const PwlBid id = PwlBid::identity();
  const PwlBid half = PwlBid::linear(0.5);

  const auto w0 = gateaux_density(id, id, kUniform2,
                                  AuctionRule::SecondPrice, 0.01);
  CHECK(w0.max_abs_sample() <= 1e-12);

  // beta = beta~ = x/2: w(x) = (x - x/2) * 1 / (1/2) = x
  const auto w1 = gateaux_density(half, half, kUniform2,
                                  AuctionRule::SecondPrice, 0.01);
  for (double x : {0.1, 0.35, 0.8, 0.99}) {
    CHECK(w1.exact(x) == doctest::Approx(x).epsilon(1e-13));
  }

  // indicator: bids above the rival's top bid contribute nothing
  const auto w2 = gateaux_density(PwlBid::linear(0.8), half, kUniform2,
                                  AuctionRule::SecondPrice, 0.01);
  CHECK(w2.exact(0.7) == 0.0);   // 0.56 > max rival bid 0.5
  CHECK(w2.exact(0.63) == 0.0);
  // below the top: (x - 0.8x) * g / (1/2) with g = 1
  CHECK(w2.exact(0.3) == doctest::Approx(0.3 * 0.2 * 2.0).epsilon(1e-13));
}

TEST_CASE("first-price density") {
  const PwlBid id = PwlBid::identity();
  const PwlBid half = PwlBid::linear(0.5);

  const auto w0 = gateaux_density(half, half, kUniform2,
                                  AuctionRule::FirstPrice, 0.01);
  CHECK(w0.max_abs_sample() <= 1e-12);

  // beta = beta~ = Id: w(x) = -G(x) = -x
  const auto w1 = diagonal_density(id, kUniform2, AuctionRule::FirstPrice,
                                   0.01);
  for (double x : {0.2, 0.5, 0.9}) {
    CHECK(w1.exact(x) == doctest::Approx(-x).epsilon(1e-13));
  }

  // beta = beta~ = 0.9x: w(x) = (x - 0.9x)/0.9 - x = -(8/9) x
  const auto w2 = diagonal_density(PwlBid::linear(0.9), kUniform2,
                                   AuctionRule::FirstPrice, 0.01);
  for (double x : {0.25, 0.75}) {
    CHECK(w2.exact(x) == doctest::Approx(-8.0 / 9.0 * x).epsilon(1e-12));
  }

  const PwlBid shallow = PwlBid::linear(0.005);
  CHECK_THROWS_AS(
      gateaux_density(id, shallow, kUniform2, AuctionRule::FirstPrice, 0.01),
      PreconditionError);
}

TEST_CASE("pairing against directions") {
  const PwlBid id = PwlBid::identity();
  const auto w = diagonal_density(id, kUniform2, AuctionRule::FirstPrice,
                                  0.01);
  CHECK(apply_density(w, id, kUniform2) ==
        doctest::Approx(-1.0 / 3.0).epsilon(1e-12));

  // zero density pairs to zero
  const auto w0 = diagonal_density(PwlBid::linear(0.5), kUniform2,
                                   AuctionRule::FirstPrice, 0.01);
  CHECK(apply_density(w0, id, kUniform2) == doctest::Approx(0.0).epsilon(1e-13));

  // linearity
  FeasibleSet set{0.05, SetVariant::BDelta};
  const PwlBid d1 = sample_feasible(set, kUniform2, 3, 2.0);
  const PwlBid d2 = sample_feasible(set, kUniform2, 4, 2.0);
  const double a = 1.3, b = -0.8;
  const PwlBid mix = pwl_combine(a, d1, b, d2);
  CHECK(apply_density(w, mix, kUniform2) ==
        doctest::Approx(a * apply_density(w, d1, kUniform2) +
                        b * apply_density(w, d2, kUniform2))
            .epsilon(1e-12));
  CHECK(apply_density(w, pwl_combine(2.0, d1, 0.0, d2), kUniform2) ==
        doctest::Approx(2.0 * apply_density(w, d1, kUniform2)).epsilon(1e-12));
}

TEST_CASE("diagonal shortcut agrees with the generic path") {
  FeasibleSet set{0.05, SetVariant::BDelta};
  for (auto rule : {AuctionRule::SecondPrice, AuctionRule::FirstPrice}) {
    for (uint64_t seed = 20; seed < 26; ++seed) {
      const PwlBid beta = sample_feasible(set, kUniform2, seed, 2.0);
      const PwlBid dir = sample_feasible(set, kUniform2, seed + 50, 2.0);
      const auto generic = gateaux_density(beta, beta, kUniform2, rule, 0.05);
      const auto diag = diagonal_density(beta, kUniform2, rule, 0.05);
      CHECK(std::abs(apply_density(generic, dir, kUniform2) -
                     apply_density(diag, dir, kUniform2)) <= 1e-12);
    }
  }
}

TEST_CASE("finite differences converge to the density pairing") {
  const PwlBid id = PwlBid::identity();

  // second price at the truthful profile: derivative vanishes
  const PwlBid d({0.0, 0.5, 1.0}, {0.0, 0.3, 0.1});
  const double fd0 = finite_difference_pairing(
      id, id, d, 1e-5, kUniform2, AuctionRule::SecondPrice);
  CHECK(std::abs(fd0) <= 1e-4);

  // first price at (Id, Id) along Id: exact value -1/3
  const double fd1 = finite_difference_pairing(
      id, id, id, 1e-3, kUniform2, AuctionRule::FirstPrice);
  CHECK(std::abs(fd1 + 1.0 / 3.0) <= 5e-3);

  // halving eps halves the error (first-order convergence); the pairs are
  // ordered so the deviator stays inside the rival's bid range, where the
  // derivative formula applies
  FeasibleSet set{0.2, SetVariant::BDelta};
  for (auto rule : {AuctionRule::SecondPrice, AuctionRule::FirstPrice}) {
    double rms_top = 0.0, rms_bot = 0.0;
    int used = 0;
    for (uint64_t seed = 0; seed < 8; ++seed) {
      PwlBid beta = sample_feasible(set, kUniform2, 100 + seed, 2.0);
      PwlBid bt = sample_feasible(set, kUniform2, 200 + seed, 2.0);
      if (beta.values().back() > bt.values().back()) std::swap(beta, bt);
      const PwlBid dir = sample_feasible(set, kUniform2, 300 + seed, 2.0);
      const auto w = gateaux_density(beta, bt, kUniform2, rule, 0.2);
      const double exact = apply_density(w, dir, kUniform2);
      const double e1 = std::abs(finite_difference_pairing(beta, bt, dir,
                                                           1e-2, kUniform2,
                                                           rule) -
                                 exact);
      const double e2 = std::abs(finite_difference_pairing(beta, bt, dir,
                                                           2.5e-3, kUniform2,
                                                           rule) -
                                 exact);
      if (e1 < 1e-11) continue;  // derivative locally exact, no order to fit
      rms_top += e1 * e1;
      rms_bot += e2 * e2;
      ++used;
    }
    REQUIRE(used > 0);
    const double order =
        std::log(std::sqrt(rms_top / rms_bot)) / std::log(4.0);
    CHECK(order >= 0.9);
  }

  CHECK_THROWS_AS(finite_difference_pairing(id, id, id, 0.0, kUniform2,
                                            AuctionRule::FirstPrice),
                  PreconditionError);
}

TEST_CASE("second-price pairing respects the operator-norm bound") {
  FeasibleSet set{0.08, SetVariant::BDelta};
  const double bound_scale =
      2.0 / 0.08 * kUniform2.max_rival_pdf_sup();
  for (uint64_t seed = 0; seed < 15; ++seed) {
    const PwlBid beta = sample_feasible(set, kUniform2, 400 + seed, 2.5);
    const PwlBid bt = sample_feasible(set, kUniform2, 500 + seed, 2.5);
    const PwlBid dir = sample_feasible(set, kUniform2, 600 + seed, 2.5);
    const auto w =
        gateaux_density(beta, bt, kUniform2, AuctionRule::SecondPrice, 0.08);
    const double val = std::abs(apply_density(w, dir, kUniform2));
    CHECK(val <= bound_scale * dir.max_abs_value() + 1e-10);
  }
}

TEST_CASE("density export") {
  const auto w = diagonal_density(PwlBid::linear(0.5), kUniform2,
                                  AuctionRule::SecondPrice, 0.01,
                                  uniform_grid(9));
  CHECK(w.grid.size() == 9);
  CHECK(w.values.size() == 9);
  CHECK(w.rule == AuctionRule::SecondPrice);
  CHECK(w.prior_label == "uniform");

  const char* path = "density_test.csv";
  w.write_csv(path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "x,w");
  double x, v;
  char comma;
  int rows = 0;
  while (in >> x >> comma >> v) {
    CHECK(std::abs(v - x) <= 1e-13);  // w(x) = x at beta = x/2
    ++rows;
  }
  CHECK(rows == 9);
  std::remove(path);
}
