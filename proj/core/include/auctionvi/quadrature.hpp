#pragma once

#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

namespace auctionvi {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;  // accumulated error estimate
  long evals = 0;

  QuadResult& operator+=(const QuadResult& o) {
    value += o.value;
    error += o.error;
    evals += o.evals;
    return *this;
  }
};

using Integrand = std::function<double(double)>;

// Adaptive Gauss-Kronrod (G7,K15) on [a,b]: bisects the worst panel first
// under a global error budget. Exact for polynomials up to degree 21;
// non-finite integrand values raise NumericalError with the offending
// abscissa.
QuadResult integrate_adaptive(const Integrand& fn, double a, double b,
                              double abs_tol = 1e-13, int max_panels = 512);

// Integrate over consecutive segments given by sorted breakpoints,
// splitting the tolerance across segments.
QuadResult integrate_segments(const Integrand& fn,
                              std::span<const double> breakpoints,
                              double abs_tol = 1e-12);

// Sorted union of breakpoint lists, deduplicated within 1e-15 and clipped
// to [lo, hi]. lo/hi are always included.
std::vector<double> merge_breakpoints(
    std::initializer_list<std::span<const double>> lists, double lo = 0.0,
    double hi = 1.0);

}  // namespace auctionvi
