#pragma once

#include <span>
#include <string>
#include <vector>

#include "auctionvi/bid.hpp"
#include "auctionvi/prior.hpp"
#include "auctionvi/quadrature.hpp"

namespace auctionvi {

enum class AuctionRule { SecondPrice, FirstPrice };

std::string to_string(AuctionRule rule);
AuctionRule auction_rule_from_string(const std::string& name);

// Pointwise weight w with DU[d] = int d(x) w(x) dF(x). Carries both grid
// samples (export, sup-norm checks) and the exact evaluator with its
// smooth-piece boundaries (exact pairings).
struct GradientDensity {
  std::vector<double> grid;
  std::vector<double> values;
  std::vector<double> breakpoints;
  Integrand exact;
  AuctionRule rule = AuctionRule::SecondPrice;
  double delta = 0.0;
  std::string prior_label;

  double max_abs_sample() const;
  void write_csv(const std::string& path,
                 std::span<const std::string> header_lines = {}) const;
};

// Ex-ante utility of bidding beta against rivals who all play beta_tilde.
// beta_tilde must be increasing; beta is unrestricted (deviations along
// arbitrary directions are allowed).
double ex_ante_utility(const PwlBid& beta, const PwlBid& beta_tilde,
                       const Prior& prior, AuctionRule rule);

// Gateaux-derivative density at (beta, beta_tilde, ..., beta_tilde).
GradientDensity gateaux_density(const PwlBid& beta, const PwlBid& beta_tilde,
                                const Prior& prior, AuctionRule rule,
                                double delta,
                                std::span<const double> sample_grid = {});

// Symmetric diagonal (beta == beta_tilde): the inverse drops out and the
// weight reduces to (x - beta) g / beta' (minus G for first price).
GradientDensity diagonal_density(const PwlBid& beta, const Prior& prior,
                                 AuctionRule rule, double delta,
                                 std::span<const double> sample_grid = {});

double apply_density(const GradientDensity& w, const PwlBid& direction,
                     const Prior& prior);
QuadResult apply_density_certified(const GradientDensity& w,
                                   const PwlBid& direction,
                                   const Prior& prior);

// (U(beta + eps d, ...) - U(beta, ...)) / eps; derivative oracle.
double finite_difference_pairing(const PwlBid& beta, const PwlBid& beta_tilde,
                                 const PwlBid& direction, double eps,
                                 const Prior& prior, AuctionRule rule);

}  // namespace auctionvi
