#pragma once

#include <span>
#include <string>

#include "auctionvi/bid.hpp"
#include "auctionvi/derivative.hpp"
#include "auctionvi/prior.hpp"

namespace auctionvi {

struct BneSolution {
  PwlBid bid;
  AuctionRule rule;
  std::string prior_label;
  double delta = 0.0;
  // certified lower bound on the equilibrium slope ((n-1)/n * inf f / sup f
  // for first price, 1 for second price)
  double slope_bound = 0.0;
};

// beta* = Id for every prior.
BneSolution bne_second_price(const Prior& prior, double delta,
                             std::span<const double> grid = {});

// beta*(x) = G(x)^{-1} int_0^x y dG(y), beta*(0) = 0 by continuous
// extension; requires inf f > 0 and delta within the certified slope bound.
BneSolution bne_first_price(const Prior& prior, double delta,
                            std::span<const double> grid = {});

BneSolution analytic_bne(const Prior& prior, AuctionRule rule, double delta,
                         std::span<const double> grid = {});

// sup over a probe set of DU(beta*, ...)[beta - beta*]; <= tol at the BNE.
// Probes: extreme feasible bids (minimal slope, earliest saturation),
// the identity, and sampled members of B_delta.
double vi_residual(const PwlBid& candidate, const Prior& prior,
                   AuctionRule rule, double delta, int sampled_probes = 16,
                   uint64_t seed = 1);

// sup over piece midpoints of |d/dx (G beta) - x g|; zero exactly at the
// first-price BNE.
double fpa_ode_residual(const PwlBid& bid, const Prior& prior);

}  // namespace auctionvi
