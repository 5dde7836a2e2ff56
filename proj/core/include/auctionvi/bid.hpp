#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "auctionvi/prior.hpp"

namespace auctionvi {

inline constexpr size_t kMasterGridSize = 1025;

// Equispaced grid on [0,1].
std::vector<double> uniform_grid(size_t points = kMasterGridSize);

// Continuous piecewise-linear function on [0,1] given by strictly
// increasing knots (first 0, last 1) and a value per knot. Also used for
// unconstrained directions; feasibility lives in FeasibleSet.
class PwlBid {
 public:
  PwlBid(std::vector<double> knots, std::vector<double> values);

  static PwlBid linear(double slope, double intercept = 0.0);
  static PwlBid identity() { return linear(1.0); }
  static PwlBid zero() { return linear(0.0); }
  static PwlBid from_samples(std::span<const double> grid,
                             std::vector<double> values);

  double operator()(double x) const { return eval(x); }
  double eval(double x) const;
  double slope_at(double x) const;  // right-continuous piece slope
  // inverse of a strictly increasing bid; b must lie in [v(0), v(1)]
  double inverse(double b) const;

  double min_slope() const;
  double max_abs_value() const;  // sup-norm (attained at a knot)
  bool increasing(double min_slope_required = 0.0) const;

  std::span<const double> knots() const { return knots_; }
  std::span<const double> values() const { return values_; }
  size_t segments() const { return knots_.size() - 1; }

  // Exact re-representation on a refined knot set (must contain [0,1]).
  PwlBid refined(std::span<const double> new_knots) const;
  // Drop knots where adjacent slopes agree within slope_tol.
  PwlBid simplified(double slope_tol = 1e-12) const;
  // Values sampled on an arbitrary grid (lossy if grid misses knots).
  std::vector<double> sampled(std::span<const double> grid) const;

  std::string to_json() const;
  static PwlBid from_json(const std::string& text);
  void write_csv(const std::string& path,
                 std::span<const double> grid,
                 std::span<const std::string> header_lines = {}) const;

 private:
  std::vector<double> knots_, values_;
  size_t segment_of(double x) const;
};

// a*u + b*v on the merged knot set (exact for piecewise-linear inputs).
PwlBid pwl_combine(double a, const PwlBid& u, double b, const PwlBid& v);
std::vector<double> merged_knots(const PwlBid& u, const PwlBid& v);

enum class SetVariant { BDelta, WDelta };

// Admissible strategies: slope >= delta, values in [0,1]; BDelta pins
// beta(0) = 0, WDelta does not.
struct FeasibleSet {
  double delta = 0.01;
  SetVariant variant = SetVariant::BDelta;

  void validate() const;  // delta in (0,1]
  bool contains(const PwlBid& bid, double tol = 1e-9) const;
  double violation(const PwlBid& bid) const;  // max constraint violation
};

// Two-piece bids of the numerical study: slopes (b1, b2) on [0,1/2], (1/2,1].
struct TwoSlope {
  double b1 = 0.0;
  double b2 = 0.0;

  PwlBid to_bid() const;
  static TwoSlope from_bid(const PwlBid& bid);
  bool feasible(double delta) const {
    return b1 >= delta && b2 >= delta && 0.5 * (b1 + b2) <= 1.0 + 1e-12;
  }
};

// L2(F) and H1(F) inner products of piecewise-linear functions and the
// W^{1,1}(F) norm (integrals are exact on the common refinement).
double inner_l2(const PwlBid& u, const PwlBid& v, const Prior& prior);
double inner_h1(const PwlBid& u, const PwlBid& v, const Prior& prior);
double norm_l2(const PwlBid& u, const Prior& prior);
double norm_h1(const PwlBid& u, const Prior& prior);
double norm_v(const PwlBid& u, const Prior& prior);  // int |u| + |u'| dF

// Deterministic random member of the feasible set. roughness 0 gives a
// linear bid; larger values concentrate slope in fewer segments (near the
// delta bound elsewhere).
PwlBid sample_feasible(const FeasibleSet& set, const Prior& prior,
                       uint64_t seed, double roughness = 2.0,
                       size_t segments = 32);

}  // namespace auctionvi
