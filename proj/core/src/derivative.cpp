#include "auctionvi/derivative.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "auctionvi/errors.hpp"

namespace auctionvi {

std::string to_string(AuctionRule rule) {
  return rule == AuctionRule::SecondPrice ? "spa" : "fpa";
}

AuctionRule auction_rule_from_string(const std::string& name) {
  if (name == "spa" || name == "second-price" || name == "second_price") {
    return AuctionRule::SecondPrice;
  }
  if (name == "fpa" || name == "first-price" || name == "first_price") {
    return AuctionRule::FirstPrice;
  }
  throw ConfigError("unknown auction rule: " + name);
}

double GradientDensity::max_abs_sample() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

void GradientDensity::write_csv(
    const std::string& path, std::span<const std::string> header_lines) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  for (const auto& l : header_lines) out << "# " << l << "\n";
  out << "x,w\n";
  out.precision(17);
  for (size_t i = 0; i < grid.size(); ++i) {
    out << grid[i] << "," << values[i] << "\n";
  }
}

namespace {

// x-locations where the piecewise-linear bid crosses any of the given
// levels (one solution per linear piece and level).
std::vector<double> level_crossings(const PwlBid& bid,
                                    std::span<const double> levels) {
  std::vector<double> xs;
  const auto ks = bid.knots();
  const auto vs = bid.values();
  for (size_t i = 0; i + 1 < ks.size(); ++i) {
    const double va = vs[i], vb = vs[i + 1];
    if (va == vb) continue;
    const double lo = std::min(va, vb), hi = std::max(va, vb);
    for (double lvl : levels) {
      if (lvl <= lo || lvl >= hi) continue;
      const double t = (lvl - va) / (vb - va);
      xs.push_back(ks[i] + t * (ks[i + 1] - ks[i]));
    }
  }
  return xs;
}

// levels of beta_tilde that matter for composites: its knot values plus
// its values at the prior's kinks
std::vector<double> rival_levels(const PwlBid& beta_tilde,
                                 const Prior& prior) {
  std::vector<double> lv(beta_tilde.values().begin(),
                         beta_tilde.values().end());
  for (double t : prior.smoothness_breakpoints()) {
    lv.push_back(beta_tilde.eval(t));
  }
  return lv;
}

// cumulative S(t) = int_0^t beta_tilde(y) dG(y) with exact prefix sums at
// the rival's knots
class CumulativeBidAgainstG {
 public:
  CumulativeBidAgainstG(const PwlBid& bid, const Prior& prior)
      : bid_(bid), prior_(prior) {
    nodes_ = merge_breakpoints({bid.knots(), prior.smoothness_breakpoints()});
    prefix_.assign(nodes_.size(), 0.0);
    for (size_t i = 0; i + 1 < nodes_.size(); ++i) {
      const std::vector<double> seg = {nodes_[i], nodes_[i + 1]};
      prefix_[i + 1] =
          prefix_[i] +
          prior_.integrate_dG([&](double y) { return bid_.eval(y); }, seg,
                              1e-14)
              .value;
    }
  }

  double operator()(double t) const {
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t);
    size_t i = static_cast<size_t>(
        std::max<ptrdiff_t>(0, std::distance(nodes_.begin(), it) - 1));
    i = std::min(i, nodes_.size() - 2);
    if (t <= nodes_[i]) return prefix_[i];
    const std::vector<double> seg = {nodes_[i], t};
    return prefix_[i] +
           prior_.integrate_dG([&](double y) { return bid_.eval(y); }, seg,
                               1e-14)
               .value;
  }

 private:
  const PwlBid& bid_;
  const Prior& prior_;
  std::vector<double> nodes_;
  std::vector<double> prefix_;
};

void require_increasing_rival(const PwlBid& beta_tilde) {
  if (!(beta_tilde.min_slope() > 0.0)) {
    throw PreconditionError("rival bid must be strictly increasing");
  }
}

void require_rival_slope(const PwlBid& beta_tilde, double delta) {
  if (beta_tilde.min_slope() < delta - 1e-12) {
    throw PreconditionError(
        "rival bid slope falls below delta (division guard)");
  }
}

std::vector<double> density_breakpoints(const PwlBid& beta,
                                        const PwlBid& beta_tilde,
                                        const Prior& prior) {
  auto levels = rival_levels(beta_tilde, prior);
  auto cross = level_crossings(beta, levels);
  return merge_breakpoints({beta.knots(), std::span<const double>(cross),
                            prior.smoothness_breakpoints()});
}

std::vector<double> default_grid_if_empty(std::span<const double> grid) {
  if (!grid.empty()) return {grid.begin(), grid.end()};
  return uniform_grid();
}

}  // namespace

double ex_ante_utility(const PwlBid& beta, const PwlBid& beta_tilde,
                       const Prior& prior, AuctionRule rule) {
  require_increasing_rival(beta_tilde);
  const double bt_lo = beta_tilde.values().front();
  const double bt_hi = beta_tilde.values().back();
  CumulativeBidAgainstG S(beta_tilde, prior);

  auto integrand = [&](double x) {
    const double b = beta.eval(x);
    if (b <= bt_lo) return 0.0;  // never wins
    const double y = beta_tilde.inverse(std::min(b, bt_hi));
    const double G = prior.max_rival_cdf(y);
    if (rule == AuctionRule::FirstPrice) return (x - b) * G;
    return x * G - S(y);
  };

  auto bps = density_breakpoints(beta, beta_tilde, prior);
  return prior.integrate_dF(integrand, bps).value;
}

GradientDensity gateaux_density(const PwlBid& beta, const PwlBid& beta_tilde,
                                const Prior& prior, AuctionRule rule,
                                double delta,
                                std::span<const double> sample_grid) {
  require_rival_slope(beta_tilde, delta);
  const double bt_lo = beta_tilde.values().front();
  const double bt_hi = beta_tilde.values().back();

  GradientDensity w;
  w.rule = rule;
  w.delta = delta;
  w.prior_label = prior.label();
  w.breakpoints = density_breakpoints(beta, beta_tilde, prior);

  // copies keep the evaluator valid after the arguments go away
  auto beta_c = beta;
  auto bt_c = beta_tilde;
  w.exact = [beta_c, bt_c, prior, rule, bt_lo, bt_hi](double x) {
    const double b = beta_c.eval(x);
    if (!(b < bt_hi)) return 0.0;  // strict indicator at the top of the range
    if (b <= bt_lo) return 0.0;    // below the rival range
    const double t = bt_c.inverse(b);
    const double q = prior.max_rival_pdf(t) / bt_c.slope_at(t);
    const double lead = (x - b) * q;
    if (rule == AuctionRule::SecondPrice) return lead;
    return lead - prior.max_rival_cdf(t);
  };

  w.grid = default_grid_if_empty(sample_grid);
  w.values.resize(w.grid.size());
  for (size_t i = 0; i < w.grid.size(); ++i) w.values[i] = w.exact(w.grid[i]);
  return w;
}

GradientDensity diagonal_density(const PwlBid& beta, const Prior& prior,
                                 AuctionRule rule, double delta,
                                 std::span<const double> sample_grid) {
  require_rival_slope(beta, delta);

  GradientDensity w;
  w.rule = rule;
  w.delta = delta;
  w.prior_label = prior.label();
  w.breakpoints =
      merge_breakpoints({beta.knots(), prior.smoothness_breakpoints()});

  auto beta_c = beta;
  w.exact = [beta_c, prior, rule](double x) {
    const double lead = (x - beta_c.eval(x)) * prior.max_rival_pdf(x) /
                        beta_c.slope_at(x);
    if (rule == AuctionRule::SecondPrice) return lead;
    return lead - prior.max_rival_cdf(x);
  };

  w.grid = default_grid_if_empty(sample_grid);
  w.values.resize(w.grid.size());
  for (size_t i = 0; i < w.grid.size(); ++i) w.values[i] = w.exact(w.grid[i]);
  return w;
}

QuadResult apply_density_certified(const GradientDensity& w,
                                   const PwlBid& direction,
                                   const Prior& prior) {
  if (!w.exact) throw PreconditionError("density has no evaluator");
  auto bps = merge_breakpoints(
      {std::span<const double>(w.breakpoints), direction.knots()});
  auto fn = [&](double x) { return direction.eval(x) * w.exact(x); };
  return prior.integrate_dF(fn, bps);
}

double apply_density(const GradientDensity& w, const PwlBid& direction,
                     const Prior& prior) {
  return apply_density_certified(w, direction, prior).value;
}

double finite_difference_pairing(const PwlBid& beta, const PwlBid& beta_tilde,
                                 const PwlBid& direction, double eps,
                                 const Prior& prior, AuctionRule rule) {
  if (!(eps > 0)) throw PreconditionError("eps must be positive");
  const PwlBid perturbed = pwl_combine(1.0, beta, eps, direction);
  const double up = ex_ante_utility(perturbed, beta_tilde, prior, rule);
  const double base = ex_ante_utility(beta, beta_tilde, prior, rule);
  return (up - base) / eps;
}

}  // namespace auctionvi
