#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "auctionvi/bid.hpp"
#include "auctionvi/derivative.hpp"
#include "auctionvi/equilibria.hpp"
#include "auctionvi/prior.hpp"

namespace auctionvi {

// Dual-VI residual DU(beta, beta_tilde, ...)[beta - beta*]; positive values
// falsify the Minty condition at (beta, beta_tilde).
struct MintyReport {
  double residual = 0.0;
  double error = 0.0;
  bool certified_violation = false;  // residual > 1e-8 beyond quadrature error
  std::string beta_json, beta_tilde_json, bne_json;

  std::string to_json() const;
};

MintyReport minty_residual(const PwlBid& beta, const PwlBid& beta_tilde,
                           const Prior& prior, AuctionRule rule, double delta);

// Three-piece bids with slopes (1/2, 4/5, 1/5) and breakpoints n/(n+2),
// (n+1)/(n+2); converge to x/2 in the W^{1,1} norm as n grows yet keep a
// positive Minty residual for the first-price auction.
PwlBid fpa_mvi_counterexample(int family_index);

struct ViolationMap {
  std::vector<double> b1, b2;       // lattice axes
  std::vector<double> residual;     // row-major: index(i1, i2)
  std::vector<char> feasible;
  std::vector<char> violated;       // certified residual > 1e-8
  AuctionRule rule = AuctionRule::FirstPrice;
  double delta = 0.0;

  size_t index(size_t i1, size_t i2) const { return i1 * b2.size() + i2; }
  bool any_violated() const;
  size_t violated_count() const;
  void write_csv(const std::string& path,
                 std::span<const std::string> header_lines = {}) const;
};

// Diagonal (self-play) Minty residual over the two-slope lattice.
// Infeasible lattice points are masked, not errored.
ViolationMap scan_two_slope(AuctionRule rule, const Prior& prior, double delta,
                            double b1_lo, double b1_hi, double b2_lo,
                            double b2_hi, size_t resolution);

struct MintyProbeSummary {
  int count = 0;
  double max_residual = 0.0;
  bool any_certified_violation = false;
  std::string worst_beta_json, worst_beta_tilde_json;

  std::string to_json() const;
};

// Random bilateral probes (beta, beta_tilde) over B_delta; for the first
// price auction the counterexample family is added to the probe list.
MintyProbeSummary minty_probe_sweep(int count, const Prior& prior,
                                    AuctionRule rule, double delta,
                                    uint64_t seed,
                                    bool include_family = true);

}  // namespace auctionvi
