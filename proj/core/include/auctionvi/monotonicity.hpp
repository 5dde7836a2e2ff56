#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "auctionvi/bid.hpp"
#include "auctionvi/derivative.hpp"
#include "auctionvi/prior.hpp"

namespace auctionvi {

enum class Verdict {
  Consistent,
  ViolatesQuasi,
  ViolatesPseudoOnly,
  ViolatesMonotoneOnly,
  Indeterminate,
};

std::string to_string(Verdict v);

// Sign test of the (quasi/pseudo/full) monotonicity conditions on the
// symmetric diagonal. lhs = DU(beta,...)[bt - b], rhs = DU(bt,...)[bt - b];
// a certified lhs < 0 with rhs > 0 falsifies quasi-monotonicity (and the
// two stronger conditions with it).
struct MonotonicityReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double gap = 0.0;  // rhs - lhs, the monotonicity pairing
  double lhs_error = 0.0;
  double rhs_error = 0.0;
  Verdict verdict = Verdict::Consistent;
  std::string beta_json, beta_tilde_json;

  std::string to_json() const;
};

MonotonicityReport quasi_mono_check(const PwlBid& beta,
                                    const PwlBid& beta_tilde,
                                    const Prior& prior, AuctionRule rule,
                                    double delta);

// (DU(beta_tilde,...) - DU(beta,...))[beta_tilde - beta]
double monotone_gap(const PwlBid& beta, const PwlBid& beta_tilde,
                    const Prior& prior, AuctionRule rule, double delta);

struct SweepSummary {
  int count = 0;
  int consistent = 0;
  int violates_quasi = 0;
  int violates_pseudo_only = 0;
  int violates_monotone_only = 0;
  int indeterminate = 0;
  double worst_margin = 0.0;  // min(-lhs, rhs) over quasi violations
  std::string worst_beta_json, worst_beta_tilde_json;

  std::string to_json() const;
  static SweepSummary from_json(const std::string& text);
};

SweepSummary random_monotonicity_sweep(int count, const Prior& prior,
                                       AuctionRule rule, double delta,
                                       uint64_t seed, double roughness = 2.5);

// The constructed piecewise-linear pairs falsifying quasi-monotonicity
// (second price: slope dip to 9/100; first price: dip to 1/10).
std::pair<PwlBid, PwlBid> spa_counterexample_pair();
std::pair<PwlBid, PwlBid> fpa_counterexample_pair();

}  // namespace auctionvi
