#include "auctionvi/monotonicity.hpp"

#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

#include "auctionvi/errors.hpp"

namespace auctionvi {
namespace {

constexpr double kSignTol = 1e-8;    // certified-sign threshold
constexpr double kExactZero = 1e-12; // treated as a true zero

int certified_sign(double v) {
  if (v > kSignTol) return 1;
  if (v < -kSignTol) return -1;
  return 0;
}

bool uncertain(double v) {
  return std::abs(v) > kExactZero && std::abs(v) <= kSignTol;
}

void require_feasible(const PwlBid& bid, const FeasibleSet& set,
                      const char* which) {
  if (!set.contains(bid, 1e-9)) {
    throw PreconditionError(std::string(which) +
                            " is not in the feasible set");
  }
}

}  // namespace

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Consistent:
      return "consistent";
    case Verdict::ViolatesQuasi:
      return "violates_quasi";
    case Verdict::ViolatesPseudoOnly:
      return "violates_pseudo_only";
    case Verdict::ViolatesMonotoneOnly:
      return "violates_monotone_only";
    case Verdict::Indeterminate:
      return "indeterminate";
  }
  return "?";
}

MonotonicityReport quasi_mono_check(const PwlBid& beta,
                                    const PwlBid& beta_tilde,
                                    const Prior& prior, AuctionRule rule,
                                    double delta) {
  FeasibleSet set{delta, SetVariant::BDelta};
  require_feasible(beta, set, "beta");
  require_feasible(beta_tilde, set, "beta_tilde");

  const PwlBid dir = pwl_combine(1.0, beta_tilde, -1.0, beta);

  const GradientDensity w_b = diagonal_density(beta, prior, rule, delta);
  const GradientDensity w_t = diagonal_density(beta_tilde, prior, rule, delta);
  const QuadResult lhs = apply_density_certified(w_b, dir, prior);
  const QuadResult rhs = apply_density_certified(w_t, dir, prior);

  MonotonicityReport rep;
  rep.lhs = lhs.value;
  rep.rhs = rhs.value;
  rep.gap = rhs.value - lhs.value;
  rep.lhs_error = lhs.error;
  rep.rhs_error = rhs.error;
  rep.beta_json = beta.to_json();
  rep.beta_tilde_json = beta_tilde.to_json();

  const int sl = certified_sign(rep.lhs);
  const int sr = certified_sign(rep.rhs);
  const bool gap_pos = rep.gap > kSignTol;

  if (sl < 0 && sr > 0) {
    rep.verdict = Verdict::ViolatesQuasi;
  } else if (sl == 0 && !uncertain(rep.lhs) && sr > 0) {
    // lhs is a true zero: the weak premise lhs <= 0 holds, quasi does not
    rep.verdict = Verdict::ViolatesPseudoOnly;
  } else if (gap_pos) {
    rep.verdict = Verdict::ViolatesMonotoneOnly;
  } else if (uncertain(rep.lhs) || uncertain(rep.rhs)) {
    rep.verdict = Verdict::Indeterminate;
  } else {
    rep.verdict = Verdict::Consistent;
  }
  return rep;
}

double monotone_gap(const PwlBid& beta, const PwlBid& beta_tilde,
                    const Prior& prior, AuctionRule rule, double delta) {
  return quasi_mono_check(beta, beta_tilde, prior, rule, delta).gap;
}

std::string MonotonicityReport::to_json() const {
  nlohmann::json j;
  j["lhs"] = lhs;
  j["rhs"] = rhs;
  j["gap"] = gap;
  j["lhs_error"] = lhs_error;
  j["rhs_error"] = rhs_error;
  j["verdict"] = ::auctionvi::to_string(verdict);
  j["beta"] = nlohmann::json::parse(beta_json);
  j["beta_tilde"] = nlohmann::json::parse(beta_tilde_json);
  return j.dump(2);
}

std::string SweepSummary::to_json() const {
  nlohmann::json j;
  j["count"] = count;
  j["consistent"] = consistent;
  j["violates_quasi"] = violates_quasi;
  j["violates_pseudo_only"] = violates_pseudo_only;
  j["violates_monotone_only"] = violates_monotone_only;
  j["indeterminate"] = indeterminate;
  j["worst_margin"] = worst_margin;
  if (!worst_beta_json.empty()) {
    j["worst_beta"] = nlohmann::json::parse(worst_beta_json);
    j["worst_beta_tilde"] = nlohmann::json::parse(worst_beta_tilde_json);
  }
  return j.dump(2);
}

SweepSummary SweepSummary::from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  SweepSummary s;
  s.count = j.at("count").get<int>();
  s.consistent = j.at("consistent").get<int>();
  s.violates_quasi = j.at("violates_quasi").get<int>();
  s.violates_pseudo_only = j.at("violates_pseudo_only").get<int>();
  s.violates_monotone_only = j.at("violates_monotone_only").get<int>();
  s.indeterminate = j.at("indeterminate").get<int>();
  s.worst_margin = j.at("worst_margin").get<double>();
  if (j.contains("worst_beta")) {
    s.worst_beta_json = j["worst_beta"].dump();
    s.worst_beta_tilde_json = j["worst_beta_tilde"].dump();
  }
  return s;
}

SweepSummary random_monotonicity_sweep(int count, const Prior& prior,
                                       AuctionRule rule, double delta,
                                       uint64_t seed, double roughness) {
  if (count < 1) throw PreconditionError("sweep needs count >= 1");
  FeasibleSet set{delta, SetVariant::BDelta};
  SweepSummary summary;
  summary.count = count;
  std::mt19937_64 subs(seed);
  for (int i = 0; i < count; ++i) {
    const uint64_t s1 = subs(), s2 = subs();
    const PwlBid beta = sample_feasible(set, prior, s1, roughness);
    const PwlBid beta_tilde = sample_feasible(set, prior, s2, roughness);
    const MonotonicityReport rep =
        quasi_mono_check(beta, beta_tilde, prior, rule, delta);
    switch (rep.verdict) {
      case Verdict::Consistent:
        ++summary.consistent;
        break;
      case Verdict::ViolatesQuasi: {
        ++summary.violates_quasi;
        const double margin = std::min(-rep.lhs, rep.rhs);
        if (margin > summary.worst_margin) {
          summary.worst_margin = margin;
          summary.worst_beta_json = rep.beta_json;
          summary.worst_beta_tilde_json = rep.beta_tilde_json;
        }
        break;
      }
      case Verdict::ViolatesPseudoOnly:
        ++summary.violates_pseudo_only;
        break;
      case Verdict::ViolatesMonotoneOnly:
        ++summary.violates_monotone_only;
        break;
      case Verdict::Indeterminate:
        ++summary.indeterminate;
        break;
    }
  }
  return summary;
}

std::pair<PwlBid, PwlBid> spa_counterexample_pair() {
  PwlBid beta = PwlBid::linear(0.61);
  PwlBid beta_tilde({0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0},
                    {0.0, 1.0 / 3.0, 109.0 / 300.0, 43.0 / 75.0});
  return {std::move(beta), std::move(beta_tilde)};
}

std::pair<PwlBid, PwlBid> fpa_counterexample_pair() {
  PwlBid beta = PwlBid::linear(0.61);
  PwlBid beta_tilde({0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0},
                    {0.0, 1.0 / 3.0, 11.0 / 30.0, 0.63 - 4.0 / 75.0});
  return {std::move(beta), std::move(beta_tilde)};
}

}  // namespace auctionvi
