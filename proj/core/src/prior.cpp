#include "auctionvi/prior.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "auctionvi/errors.hpp"

namespace auctionvi {
namespace {

void check_domain(double x) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::domain_error("value outside [0,1]: " + std::to_string(x));
  }
}

void check_bidders(int n) {
  if (n < 2) throw ConfigError("bidder count must be >= 2");
}

}  // namespace

Prior Prior::uniform(int bidders) {
  check_bidders(bidders);
  Prior p;
  p.kind_ = PriorKind::Uniform;
  p.n_ = bidders;
  p.breakpoints_ = {0.0, 1.0};
  return p;
}

Prior Prior::power(double exponent, int bidders) {
  check_bidders(bidders);
  if (!(exponent >= 1.0)) {
    throw ConfigError("power prior requires exponent >= 1");
  }
  Prior p;
  p.kind_ = PriorKind::Power;
  p.n_ = bidders;
  p.exponent_ = exponent;
  p.breakpoints_ = {0.0, 1.0};
  return p;
}

Prior Prior::tabulated(std::vector<double> xs, std::vector<double> cdf,
                       int bidders, bool with_density) {
  check_bidders(bidders);
  if (xs.size() < 2 || xs.size() != cdf.size()) {
    throw ConfigError("tabulated prior needs matching x/F columns, >= 2 rows");
  }
  if (xs.front() != 0.0 || xs.back() != 1.0) {
    throw ConfigError("tabulated prior must cover x in [0,1]");
  }
  if (std::abs(cdf.front()) > 1e-12 || std::abs(cdf.back() - 1.0) > 1e-12) {
    throw ConfigError("tabulated CDF must run from 0 to 1");
  }
  cdf.front() = 0.0;
  cdf.back() = 1.0;
  Prior p;
  p.kind_ = PriorKind::Tabulated;
  p.n_ = bidders;
  p.has_density_ = with_density;
  p.tab_slope_.reserve(xs.size() - 1);
  for (size_t i = 0; i + 1 < xs.size(); ++i) {
    const double dx = xs[i + 1] - xs[i];
    if (!(dx > 0)) throw ConfigError("tabulated x column must be strictly increasing");
    const double dF = cdf[i + 1] - cdf[i];
    if (dF < 0) throw ConfigError("tabulated CDF must be nondecreasing");
    p.tab_slope_.push_back(dF / dx);
  }
  p.breakpoints_ = xs;
  p.tab_x_ = std::move(xs);
  p.tab_cdf_ = std::move(cdf);
  return p;
}

Prior Prior::tabulated_from_csv(const std::string& path, int bidders) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open prior CSV: " + path);
  std::vector<double> xs, cdf;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double x, F;
    if (!(row >> x >> F)) {
      throw ConfigError("bad row in prior CSV: " + line);
    }
    xs.push_back(x);
    cdf.push_back(F);
  }
  return tabulated(std::move(xs), std::move(cdf), bidders);
}

double Prior::cdf(double x) const {
  check_domain(x);
  switch (kind_) {
    case PriorKind::Uniform:
      return x;
    case PriorKind::Power:
      return std::pow(x, exponent_);
    case PriorKind::Tabulated: {
      auto it = std::upper_bound(tab_x_.begin(), tab_x_.end(), x);
      size_t i = static_cast<size_t>(std::max<ptrdiff_t>(
          0, std::distance(tab_x_.begin(), it) - 1));
      i = std::min(i, tab_x_.size() - 2);
      return tab_cdf_[i] + tab_slope_[i] * (x - tab_x_[i]);
    }
  }
  return 0.0;
}

double Prior::pdf(double x) const {
  check_domain(x);
  if (!has_density_) {
    throw UnsupportedOperation("prior carries no density data");
  }
  switch (kind_) {
    case PriorKind::Uniform:
      return 1.0;
    case PriorKind::Power:
      return exponent_ == 1.0 ? 1.0 : exponent_ * std::pow(x, exponent_ - 1.0);
    case PriorKind::Tabulated: {
      auto it = std::upper_bound(tab_x_.begin(), tab_x_.end(), x);
      size_t i = static_cast<size_t>(std::max<ptrdiff_t>(
          0, std::distance(tab_x_.begin(), it) - 1));
      i = std::min(i, tab_x_.size() - 2);
      return tab_slope_[i];
    }
  }
  return 0.0;
}

double Prior::max_rival_cdf(double x) const {
  const double F = cdf(x);
  return n_ == 2 ? F : std::pow(F, n_ - 1);
}

double Prior::max_rival_pdf(double x) const {
  const double f = pdf(x);
  if (n_ == 2) return f;
  const double F = cdf(x);
  return (n_ - 1) * std::pow(F, n_ - 2) * f;
}

double Prior::pdf_inf() const {
  if (!has_density_) throw UnsupportedOperation("prior carries no density data");
  switch (kind_) {
    case PriorKind::Uniform:
      return 1.0;
    case PriorKind::Power:
      return exponent_ == 1.0 ? 1.0 : 0.0;
    case PriorKind::Tabulated:
      return *std::min_element(tab_slope_.begin(), tab_slope_.end());
  }
  return 0.0;
}

double Prior::pdf_sup() const {
  if (!has_density_) throw UnsupportedOperation("prior carries no density data");
  switch (kind_) {
    case PriorKind::Uniform:
      return 1.0;
    case PriorKind::Power:
      return exponent_;
    case PriorKind::Tabulated:
      return *std::max_element(tab_slope_.begin(), tab_slope_.end());
  }
  return 0.0;
}

std::optional<double> Prior::pdf_lipschitz() const {
  switch (kind_) {
    case PriorKind::Uniform:
      return 0.0;
    case PriorKind::Power:
      if (exponent_ == 1.0) return 0.0;
      if (exponent_ >= 2.0) return exponent_ * (exponent_ - 1.0);
      return std::nullopt;  // f' unbounded at 0 for 1 < p < 2
    case PriorKind::Tabulated: {
      const bool constant = std::all_of(
          tab_slope_.begin(), tab_slope_.end(),
          [&](double s) { return std::abs(s - tab_slope_[0]) < 1e-14; });
      if (constant) return 0.0;
      return std::nullopt;  // piecewise-constant density has jumps
    }
  }
  return std::nullopt;
}

double Prior::max_rival_pdf_sup() const {
  switch (kind_) {
    case PriorKind::Uniform:
      return static_cast<double>(n_ - 1);
    case PriorKind::Power:
      return exponent_ * (n_ - 1);
    case PriorKind::Tabulated: {
      if (!has_density_) throw UnsupportedOperation("prior carries no density data");
      double best = 0.0;
      for (size_t i = 0; i < tab_slope_.size(); ++i) {
        // F^{n-2} increases, f constant per segment: max at right end
        const double F = tab_cdf_[i + 1];
        best = std::max(best, (n_ - 1) * std::pow(F, n_ - 2) * tab_slope_[i]);
      }
      return best;
    }
  }
  return 0.0;
}

std::string Prior::label() const {
  switch (kind_) {
    case PriorKind::Uniform:
      return "uniform";
    case PriorKind::Power: {
      std::ostringstream os;
      os << "power:" << exponent_;
      return os.str();
    }
    case PriorKind::Tabulated: {
      std::ostringstream os;
      os << "tabulated[" << tab_x_.size() << "]";
      return os.str();
    }
  }
  return "?";
}

QuadResult Prior::integrate_dF(const Integrand& fn,
                               std::span<const double> breakpoints,
                               double abs_tol) const {
  if (!has_density_) throw UnsupportedOperation("prior carries no density data");
  const double lo = breakpoints.empty() ? 0.0 : breakpoints.front();
  const double hi = breakpoints.empty() ? 1.0 : breakpoints.back();
  auto merged = merge_breakpoints({breakpoints, smoothness_breakpoints()}, lo, hi);
  auto weighted = [&](double x) { return fn(x) * pdf(x); };
  return integrate_segments(weighted, merged, abs_tol);
}

QuadResult Prior::integrate_dG(const Integrand& fn,
                               std::span<const double> breakpoints,
                               double abs_tol) const {
  if (!has_density_) throw UnsupportedOperation("prior carries no density data");
  const double lo = breakpoints.empty() ? 0.0 : breakpoints.front();
  const double hi = breakpoints.empty() ? 1.0 : breakpoints.back();
  auto merged = merge_breakpoints({breakpoints, smoothness_breakpoints()}, lo, hi);
  auto weighted = [&](double x) { return fn(x) * max_rival_pdf(x); };
  return integrate_segments(weighted, merged, abs_tol);
}

}  // namespace auctionvi
