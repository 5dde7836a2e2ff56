#include "auctionvi/bid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "auctionvi/errors.hpp"

namespace auctionvi {

std::vector<double> uniform_grid(size_t points) {
  if (points < 2) throw ConfigError("grid needs at least 2 points");
  std::vector<double> g(points);
  const double h = 1.0 / static_cast<double>(points - 1);
  for (size_t i = 0; i < points; ++i) g[i] = static_cast<double>(i) * h;
  g.back() = 1.0;
  return g;
}

PwlBid::PwlBid(std::vector<double> knots, std::vector<double> values)
    : knots_(std::move(knots)), values_(std::move(values)) {
  if (knots_.size() < 2 || knots_.size() != values_.size()) {
    throw PreconditionError("bid needs matching knot/value lists, >= 2 knots");
  }
  if (knots_.front() != 0.0 || knots_.back() != 1.0) {
    throw PreconditionError("bid knots must span [0,1]");
  }
  for (size_t i = 0; i + 1 < knots_.size(); ++i) {
    if (!(knots_[i + 1] > knots_[i])) {
      throw PreconditionError("bid knots must be strictly increasing");
    }
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw PreconditionError("bid values must be finite");
  }
}

PwlBid PwlBid::linear(double slope, double intercept) {
  return PwlBid({0.0, 1.0}, {intercept, intercept + slope});
}

PwlBid PwlBid::from_samples(std::span<const double> grid,
                            std::vector<double> values) {
  return PwlBid(std::vector<double>(grid.begin(), grid.end()),
                std::move(values));
}

size_t PwlBid::segment_of(double x) const {
  auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
  auto i = std::distance(knots_.begin(), it);
  if (i <= 0) return 0;
  return std::min<size_t>(static_cast<size_t>(i - 1), knots_.size() - 2);
}

double PwlBid::eval(double x) const {
  const size_t i = segment_of(x);
  const double t = (x - knots_[i]) / (knots_[i + 1] - knots_[i]);
  return values_[i] + t * (values_[i + 1] - values_[i]);
}

double PwlBid::slope_at(double x) const {
  const size_t i = segment_of(x);
  return (values_[i + 1] - values_[i]) / (knots_[i + 1] - knots_[i]);
}

double PwlBid::inverse(double b) const {
  if (!increasing(0.0)) {
    throw PreconditionError("inverse requires a strictly increasing bid");
  }
  if (b < values_.front() - 1e-12 || b > values_.back() + 1e-12) {
    throw std::out_of_range("bid level outside the range of the bid function");
  }
  b = std::clamp(b, values_.front(), values_.back());
  auto it = std::upper_bound(values_.begin(), values_.end(), b);
  auto i = std::distance(values_.begin(), it);
  size_t s = i <= 0 ? 0 : std::min<size_t>(static_cast<size_t>(i - 1),
                                           values_.size() - 2);
  const double dv = values_[s + 1] - values_[s];
  const double t = dv > 0 ? (b - values_[s]) / dv : 0.0;
  return knots_[s] + t * (knots_[s + 1] - knots_[s]);
}

double PwlBid::min_slope() const {
  double m = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i + 1 < knots_.size(); ++i) {
    m = std::min(m, (values_[i + 1] - values_[i]) / (knots_[i + 1] - knots_[i]));
  }
  return m;
}

double PwlBid::max_abs_value() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

bool PwlBid::increasing(double min_slope_required) const {
  return min_slope() > min_slope_required - 1e-15;
}

PwlBid PwlBid::refined(std::span<const double> new_knots) const {
  std::vector<double> ks = merge_breakpoints({new_knots, knots()});
  std::vector<double> vs(ks.size());
  for (size_t i = 0; i < ks.size(); ++i) vs[i] = eval(ks[i]);
  // keep original knot values bit-exact
  size_t j = 0;
  for (size_t i = 0; i < ks.size(); ++i) {
    while (j + 1 < knots_.size() && knots_[j] < ks[i] - 1e-15) ++j;
    if (std::abs(knots_[j] - ks[i]) <= 1e-15) vs[i] = values_[j];
  }
  return PwlBid(std::move(ks), std::move(vs));
}

PwlBid PwlBid::simplified(double slope_tol) const {
  std::vector<double> ks{knots_.front()};
  std::vector<double> vs{values_.front()};
  for (size_t i = 1; i + 1 < knots_.size(); ++i) {
    const double s_in =
        (values_[i] - vs.back()) / (knots_[i] - ks.back());
    const double s_out =
        (values_[i + 1] - values_[i]) / (knots_[i + 1] - knots_[i]);
    if (std::abs(s_out - s_in) > slope_tol) {
      ks.push_back(knots_[i]);
      vs.push_back(values_[i]);
    }
  }
  ks.push_back(knots_.back());
  vs.push_back(values_.back());
  return PwlBid(std::move(ks), std::move(vs));
}

std::vector<double> PwlBid::sampled(std::span<const double> grid) const {
  std::vector<double> vs(grid.size());
  for (size_t i = 0; i < grid.size(); ++i) vs[i] = eval(grid[i]);
  return vs;
}

std::string PwlBid::to_json() const {
  nlohmann::json j;
  j["knots"] = knots_;
  j["values"] = values_;
  return j.dump();
}

PwlBid PwlBid::from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  return PwlBid(j.at("knots").get<std::vector<double>>(),
                j.at("values").get<std::vector<double>>());
}

void PwlBid::write_csv(const std::string& path, std::span<const double> grid,
                       std::span<const std::string> header_lines) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  for (const auto& l : header_lines) out << "# " << l << "\n";
  out << "x,bid\n";
  out.precision(17);
  for (double x : grid) out << x << "," << eval(x) << "\n";
}

std::vector<double> merged_knots(const PwlBid& u, const PwlBid& v) {
  return merge_breakpoints({u.knots(), v.knots()});
}

PwlBid pwl_combine(double a, const PwlBid& u, double b, const PwlBid& v) {
  auto ks = merged_knots(u, v);
  std::vector<double> vs(ks.size());
  for (size_t i = 0; i < ks.size(); ++i) {
    vs[i] = a * u.eval(ks[i]) + b * v.eval(ks[i]);
  }
  return PwlBid(std::move(ks), std::move(vs));
}

void FeasibleSet::validate() const {
  if (!(delta > 0.0 && delta <= 1.0)) {
    throw ConfigError("slope bound delta must lie in (0,1]");
  }
}

double FeasibleSet::violation(const PwlBid& bid) const {
  double worst = 0.0;
  const auto ks = bid.knots();
  const auto vs = bid.values();
  for (size_t i = 0; i < vs.size(); ++i) {
    worst = std::max(worst, -vs[i]);
    worst = std::max(worst, vs[i] - 1.0);
  }
  for (size_t i = 0; i + 1 < vs.size(); ++i) {
    const double s = (vs[i + 1] - vs[i]) / (ks[i + 1] - ks[i]);
    worst = std::max(worst, (delta - s) * (ks[i + 1] - ks[i]));
  }
  if (variant == SetVariant::BDelta) {
    worst = std::max(worst, std::abs(vs.front()));
  }
  return worst;
}

bool FeasibleSet::contains(const PwlBid& bid, double tol) const {
  validate();
  return violation(bid) <= tol;
}

PwlBid TwoSlope::to_bid() const {
  return PwlBid({0.0, 0.5, 1.0}, {0.0, 0.5 * b1, 0.5 * (b1 + b2)});
}

TwoSlope TwoSlope::from_bid(const PwlBid& bid) {
  const auto ks = bid.knots();
  if (ks.size() != 3 || ks[1] != 0.5 || bid.values()[0] != 0.0) {
    throw PreconditionError("not a two-slope bid (knots 0, 1/2, 1, zero at 0)");
  }
  const auto vs = bid.values();
  return TwoSlope{2.0 * vs[1], 2.0 * (vs[2] - vs[1])};
}

namespace {

// breakpoints of u and v merged with the prior's kinks
std::vector<double> product_breakpoints(const PwlBid& u, const PwlBid& v,
                                        const Prior& prior) {
  return merge_breakpoints(
      {u.knots(), v.knots(), prior.smoothness_breakpoints()});
}

}  // namespace

double inner_l2(const PwlBid& u, const PwlBid& v, const Prior& prior) {
  auto bps = product_breakpoints(u, v, prior);
  auto fn = [&](double x) { return u.eval(x) * v.eval(x); };
  return prior.integrate_dF(fn, bps).value;
}

double inner_h1(const PwlBid& u, const PwlBid& v, const Prior& prior) {
  auto bps = product_breakpoints(u, v, prior);
  auto fn = [&](double x) {
    return u.eval(x) * v.eval(x) + u.slope_at(x) * v.slope_at(x);
  };
  return prior.integrate_dF(fn, bps).value;
}

double norm_l2(const PwlBid& u, const Prior& prior) {
  return std::sqrt(std::max(0.0, inner_l2(u, u, prior)));
}

double norm_h1(const PwlBid& u, const Prior& prior) {
  return std::sqrt(std::max(0.0, inner_h1(u, u, prior)));
}

double norm_v(const PwlBid& u, const Prior& prior) {
  // refine at the sign crossings of u so |u| is linear per segment
  std::vector<double> zeros;
  const auto ks = u.knots();
  const auto vs = u.values();
  for (size_t i = 0; i + 1 < ks.size(); ++i) {
    if ((vs[i] < 0) != (vs[i + 1] < 0) && vs[i] != vs[i + 1]) {
      const double t = vs[i] / (vs[i] - vs[i + 1]);
      zeros.push_back(ks[i] + t * (ks[i + 1] - ks[i]));
    }
  }
  auto bps = merge_breakpoints(
      {u.knots(), std::span<const double>(zeros), prior.smoothness_breakpoints()});
  auto fn = [&](double x) { return std::abs(u.eval(x)) + std::abs(u.slope_at(x)); };
  return prior.integrate_dF(fn, bps).value;
}

PwlBid sample_feasible(const FeasibleSet& set, const Prior& prior,
                       uint64_t seed, double roughness, size_t segments) {
  (void)prior;  // sampling is prior-independent; kept for call-site symmetry
  set.validate();
  if (roughness < 0) throw PreconditionError("roughness must be >= 0");
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  auto next_unit = [&rng]() {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
  };
  auto next_gauss = [&]() {
    // Box-Muller; keeps the stream implementation-independent
    double u1 = std::max(next_unit(), 1e-300), u2 = next_unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  };

  const double delta = set.delta;
  const size_t m = std::max<size_t>(1, segments);
  std::vector<double> weights(m);
  double wsum = 0.0;
  for (auto& w : weights) {
    w = std::exp(roughness * next_gauss());
    wsum += w;
  }
  // total rise in [delta, 1]; the extra above delta*x is spread by weight
  const double rise = delta + (1.0 - delta) * next_unit();
  const double extra = rise - delta;
  double offset = 0.0;
  if (set.variant == SetVariant::WDelta) {
    offset = (1.0 - rise) * next_unit();
  }

  std::vector<double> ks(m + 1), vs(m + 1);
  const double h = 1.0 / static_cast<double>(m);
  ks[0] = 0.0;
  vs[0] = offset;
  for (size_t i = 0; i < m; ++i) {
    ks[i + 1] = (i + 1 == m) ? 1.0 : ks[i] + h;
    const double share = extra * weights[i] / wsum;
    vs[i + 1] = vs[i] + delta * h + share;
  }
  vs.back() = std::min(vs.back(), 1.0);
  return PwlBid(std::move(ks), std::move(vs));
}

}  // namespace auctionvi
