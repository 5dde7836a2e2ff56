#include "auctionvi/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "auctionvi/errors.hpp"

namespace auctionvi {
namespace {

// Gauss-Kronrod 15-point nodes/weights on [-1,1]; the embedded 7-point
// Gauss rule uses the even-indexed nodes.
constexpr double kXgk[15] = {
    -0.991455371120812639206854697526329,
    -0.949107912342758524526189684047851,
    -0.864864423359769072789712788640926,
    -0.741531185599394439863864773280788,
    -0.586087235467691130294144838258730,
    -0.405845151377397166906606412076961,
    -0.207784955007898467600689403773245,
    0.0,
    0.207784955007898467600689403773245,
    0.405845151377397166906606412076961,
    0.586087235467691130294144838258730,
    0.741531185599394439863864773280788,
    0.864864423359769072789712788640926,
    0.949107912342758524526189684047851,
    0.991455371120812639206854697526329};

constexpr double kWgk[15] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
    0.204432940075298892414161999234649,
    0.190350578064785409913256402421014,
    0.169004726639267902826583426598550,
    0.140653259715525918745189590510238,
    0.104790010322250183839876322541518,
    0.063092092629978553290700663189204,
    0.022935322010529224963732008058970};

constexpr double kWg[7] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
    0.381830050505118944950369775488975,
    0.279705391489276667901467771423780,
    0.129484966168869693270611432679082};

struct PanelResult {
  double kronrod;
  double gauss;
  double err;
};

PanelResult gk15(const Integrand& fn, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double rk = 0.0, rg = 0.0;
  for (int i = 0; i < 15; ++i) {
    const double x = c + h * kXgk[i];
    const double v = fn(x);
    if (!std::isfinite(v)) {
      throw NumericalError("non-finite integrand value at x = " +
                           std::to_string(x));
    }
    rk += kWgk[i] * v;
    if (i % 2 == 1) rg += kWg[i / 2] * v;
  }
  rk *= h;
  rg *= h;
  // conservative estimate: the sharpened QUADPACK heuristic underrates
  // the error of integrands with endpoint singularities
  const double diff = std::abs(rk - rg);
  return {rk, rg, std::max(diff, 1e-17 * std::abs(rk))};
}

struct Panel {
  double a, b, value, err;
};

}  // namespace

// Globally adaptive: repeatedly bisect the panel with the largest error
// estimate until the summed estimate meets the tolerance or the panel
// budget is exhausted.
QuadResult integrate_adaptive(const Integrand& fn, double a, double b,
                              double abs_tol, int max_panels) {
  if (!(b > a)) return {0.0, 0.0, 0};
  std::vector<Panel> panels;
  panels.reserve(32);
  {
    PanelResult p = gk15(fn, a, b);
    panels.push_back({a, b, p.kronrod, p.err});
  }
  long evals = 15;
  double total_err = panels[0].err;
  while (total_err > abs_tol &&
         panels.size() < static_cast<size_t>(max_panels)) {
    size_t worst = 0;
    for (size_t i = 1; i < panels.size(); ++i) {
      if (panels[i].err > panels[worst].err) worst = i;
    }
    const Panel p = panels[worst];
    if (p.b - p.a < 1e-14) break;  // width floor; estimate will not improve
    const double mid = 0.5 * (p.a + p.b);
    PanelResult l = gk15(fn, p.a, mid);
    PanelResult r = gk15(fn, mid, p.b);
    evals += 30;
    panels[worst] = {p.a, mid, l.kronrod, l.err};
    panels.push_back({mid, p.b, r.kronrod, r.err});
    total_err += l.err + r.err - p.err;
  }
  QuadResult out;
  double carry = 0.0;
  for (const Panel& p : panels) {
    const double y = p.value - carry;
    const double t = out.value + y;
    carry = (t - out.value) - y;
    out.value = t;
    out.error += p.err;
  }
  out.evals = evals;
  return out;
}

QuadResult integrate_segments(const Integrand& fn,
                              std::span<const double> breakpoints,
                              double abs_tol) {
  QuadResult total;
  if (breakpoints.size() < 2) return total;
  const double per_seg =
      abs_tol / static_cast<double>(breakpoints.size() - 1);
  double carry = 0.0;  // Kahan compensation over segments
  for (size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    const double a = breakpoints[i], b = breakpoints[i + 1];
    if (!(b > a)) continue;
    QuadResult r = integrate_adaptive(fn, a, b, per_seg);
    const double y = r.value - carry;
    const double t = total.value + y;
    carry = (t - total.value) - y;
    total.value = t;
    total.error += r.error;
    total.evals += r.evals;
  }
  return total;
}

std::vector<double> merge_breakpoints(
    std::initializer_list<std::span<const double>> lists, double lo,
    double hi) {
  std::vector<double> out;
  out.push_back(lo);
  out.push_back(hi);
  for (const auto& l : lists) {
    for (double x : l) {
      if (x > lo && x < hi) out.push_back(x);
    }
  }
  std::sort(out.begin(), out.end());
  std::vector<double> dedup;
  dedup.reserve(out.size());
  for (double x : out) {
    if (dedup.empty() || x - dedup.back() > 1e-15) dedup.push_back(x);
  }
  if (dedup.back() != hi) dedup.back() = hi;
  return dedup;
}

}  // namespace auctionvi
