#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "auctionvi/quadrature.hpp"

namespace auctionvi {

enum class PriorKind { Uniform, Power, Tabulated };

// Value distribution F on [0,1] for n symmetric bidders, together with the
// highest-rival order statistic G = F^{n-1} and integration against dF/dG.
// Immutable after construction; all evaluations are pure.
class Prior {
 public:
  static Prior uniform(int bidders);
  // F(x) = x^exponent, exponent >= 1 (keeps the density bounded).
  static Prior power(double exponent, int bidders);
  // Monotone piecewise-linear CDF through (xs, cdf); the density is the
  // piecewise-constant slope unless with_density is false.
  static Prior tabulated(std::vector<double> xs, std::vector<double> cdf,
                         int bidders, bool with_density = true);
  // Two-column CSV (x, F(x)) with strictly increasing x from 0 to 1.
  static Prior tabulated_from_csv(const std::string& path, int bidders);

  double cdf(double x) const;            // F(x)
  double pdf(double x) const;            // f(x), right-continuous
  double max_rival_cdf(double x) const;  // G(x) = F(x)^{n-1}
  double max_rival_pdf(double x) const;  // g(x) = (n-1) F^{n-2} f

  int bidders() const { return n_; }
  PriorKind kind() const { return kind_; }
  bool has_density() const { return has_density_; }

  double pdf_inf() const;
  double pdf_sup() const;
  std::optional<double> pdf_lipschitz() const;
  double max_rival_pdf_sup() const;  // ||g||_inf

  // Points where the density has kinks or jumps (always contains 0 and 1).
  std::span<const double> smoothness_breakpoints() const {
    return breakpoints_;
  }
  std::string label() const;

  // integral of fn against dF (resp. dG), refining the given segment list
  // with the prior's own breakpoints. Exact up to rounding for piecewise
  // polynomials against uniform / integral-power priors.
  QuadResult integrate_dF(const Integrand& fn,
                          std::span<const double> breakpoints,
                          double abs_tol = 1e-12) const;
  QuadResult integrate_dG(const Integrand& fn,
                          std::span<const double> breakpoints,
                          double abs_tol = 1e-12) const;

 private:
  Prior() = default;

  PriorKind kind_ = PriorKind::Uniform;
  int n_ = 2;
  double exponent_ = 1.0;           // power prior
  std::vector<double> tab_x_;       // tabulated knots
  std::vector<double> tab_cdf_;     // tabulated CDF values
  std::vector<double> tab_slope_;   // per-segment density
  bool has_density_ = true;
  std::vector<double> breakpoints_;
};

}  // namespace auctionvi
