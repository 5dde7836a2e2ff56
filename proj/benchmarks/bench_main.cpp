#include <benchmark/benchmark.h>

#include "auctionvi/bid.hpp"
#include "auctionvi/derivative.hpp"
#include "auctionvi/dynamics.hpp"
#include "auctionvi/equilibria.hpp"
#include "auctionvi/projection.hpp"

using namespace auctionvi;

namespace {
const Prior kPrior = Prior::uniform(2);
}

static void BM_DiagonalDensityPairing(benchmark::State& state) {
  FeasibleSet set{0.05, SetVariant::BDelta};
  const PwlBid beta = sample_feasible(set, kPrior, 1, 2.0,
                                      static_cast<size_t>(state.range(0)));
  const PwlBid dir = sample_feasible(set, kPrior, 2, 2.0,
                                     static_cast<size_t>(state.range(0)));
  const std::vector<double> tiny = {0.0, 1.0};
  for (auto _ : state) {
    const auto w =
        diagonal_density(beta, kPrior, AuctionRule::FirstPrice, 0.05, tiny);
    benchmark::DoNotOptimize(apply_density(w, dir, kPrior));
  }
}
BENCHMARK(BM_DiagonalDensityPairing)->Arg(32)->Arg(128)->Arg(1024);

static void BM_ExAnteUtility(benchmark::State& state) {
  FeasibleSet set{0.05, SetVariant::BDelta};
  const PwlBid beta = sample_feasible(set, kPrior, 3, 2.0,
                                      static_cast<size_t>(state.range(0)));
  const PwlBid bt = sample_feasible(set, kPrior, 4, 2.0,
                                    static_cast<size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        ex_ante_utility(beta, bt, kPrior, AuctionRule::SecondPrice));
  }
}
BENCHMARK(BM_ExAnteUtility)->Arg(32)->Arg(256);

static void BM_Projection(benchmark::State& state) {
  auto grid = uniform_grid(static_cast<size_t>(state.range(0)));
  FeasibleSet set{0.01, SetVariant::BDelta};
  Projector proj(grid, kPrior, set, Metric::L2);
  const PwlBid wild = PwlBid::linear(2.0).refined(grid);
  for (auto _ : state) {
    benchmark::DoNotOptimize(proj.project_values(wild.values()));
  }
}
BENCHMARK(BM_Projection)->Arg(129)->Arg(1025);

static void BM_ProxStep(benchmark::State& state) {
  auto grid = uniform_grid(static_cast<size_t>(state.range(0)));
  ProxOperator prox(grid, kPrior, 0.1);
  const PwlBid v = PwlBid::linear(0.5).refined(grid);
  const auto w =
      diagonal_density(v, kPrior, AuctionRule::SecondPrice, 0.1, grid);
  auto load = prox.gram().load(w.exact, w.breakpoints);
  for (auto& x : load) x *= -8.8e-4;
  for (auto _ : state) {
    benchmark::DoNotOptimize(prox.apply(v, load));
  }
}
BENCHMARK(BM_ProxStep)->Arg(129)->Arg(1025);

static void BM_TwoSlopeGradient(benchmark::State& state) {
  const TwoSlope s{0.8, 0.3};
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        two_slope_gradient(s, kPrior, AuctionRule::FirstPrice, 0.01));
  }
}
BENCHMARK(BM_TwoSlopeGradient);

BENCHMARK_MAIN();
