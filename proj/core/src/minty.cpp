#include "auctionvi/minty.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <fstream>

#include <nlohmann/json.hpp>

#include "auctionvi/errors.hpp"

namespace auctionvi {
namespace {

constexpr double kViolationTol = 1e-8;

}  // namespace

std::string MintyReport::to_json() const {
  nlohmann::json j;
  j["residual"] = residual;
  j["error"] = error;
  j["certified_violation"] = certified_violation;
  j["beta"] = nlohmann::json::parse(beta_json);
  j["beta_tilde"] = nlohmann::json::parse(beta_tilde_json);
  j["bne"] = nlohmann::json::parse(bne_json);
  return j.dump(2);
}

MintyReport minty_residual(const PwlBid& beta, const PwlBid& beta_tilde,
                           const Prior& prior, AuctionRule rule,
                           double delta) {
  const BneSolution bne = analytic_bne(prior, rule, delta);
  const PwlBid bne_bid = bne.bid.simplified();
  const std::vector<double> tiny_grid = {0.0, 1.0};
  const GradientDensity w =
      gateaux_density(beta, beta_tilde, prior, rule, delta, tiny_grid);
  const PwlBid dir = pwl_combine(1.0, beta, -1.0, bne_bid);
  const QuadResult r = apply_density_certified(w, dir, prior);

  MintyReport rep;
  rep.residual = r.value;
  rep.error = r.error;
  rep.certified_violation = r.value - r.error > kViolationTol;
  rep.beta_json = beta.to_json();
  rep.beta_tilde_json = beta_tilde.to_json();
  rep.bne_json = bne_bid.to_json();
  return rep;
}

PwlBid fpa_mvi_counterexample(int family_index) {
  if (family_index < 0) throw PreconditionError("family index must be >= 0");
  const double n = static_cast<double>(family_index);
  const double a = n / (n + 2.0);
  const double b = (n + 1.0) / (n + 2.0);
  const double va = n / (2.0 * (n + 2.0));
  const double vb = va + 0.8 / (n + 2.0);
  const double v1 = vb + 0.2 * (1.0 - b);
  if (family_index == 0) {
    return PwlBid({0.0, b, 1.0}, {0.0, vb, v1});
  }
  return PwlBid({0.0, a, b, 1.0}, {0.0, va, vb, v1});
}

bool ViolationMap::any_violated() const { return violated_count() > 0; }

size_t ViolationMap::violated_count() const {
  size_t c = 0;
  for (char v : violated) c += v != 0;
  return c;
}

void ViolationMap::write_csv(const std::string& path,
                             std::span<const std::string> header_lines) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  for (const auto& l : header_lines) out << "# " << l << "\n";
  out << "b1,b2,feasible,residual,violated\n";
  out.precision(17);
  for (size_t i = 0; i < b1.size(); ++i) {
    for (size_t j = 0; j < b2.size(); ++j) {
      const size_t k = index(i, j);
      out << b1[i] << "," << b2[j] << "," << int(feasible[k]) << ","
          << residual[k] << "," << int(violated[k]) << "\n";
    }
  }
}

ViolationMap scan_two_slope(AuctionRule rule, const Prior& prior, double delta,
                            double b1_lo, double b1_hi, double b2_lo,
                            double b2_hi, size_t resolution) {
  if (resolution < 2) throw ConfigError("scan needs resolution >= 2");
  const BneSolution bne = analytic_bne(prior, rule, delta);
  const PwlBid bne_bid = bne.bid.simplified();
  const std::vector<double> tiny_grid = {0.0, 1.0};

  ViolationMap map;
  map.rule = rule;
  map.delta = delta;
  auto axis = [&](double lo, double hi) {
    std::vector<double> xs(resolution);
    for (size_t i = 0; i < resolution; ++i) {
      xs[i] = lo + (hi - lo) * static_cast<double>(i) /
                       static_cast<double>(resolution - 1);
    }
    return xs;
  };
  map.b1 = axis(b1_lo, b1_hi);
  map.b2 = axis(b2_lo, b2_hi);
  const size_t cells = resolution * resolution;
  map.residual.assign(cells, 0.0);
  map.feasible.assign(cells, 0);
  map.violated.assign(cells, 0);

  size_t feasible_count = 0;
  for (size_t i = 0; i < resolution; ++i) {
    for (size_t j = 0; j < resolution; ++j) {
      const size_t k = map.index(i, j);
      const TwoSlope ts{map.b1[i], map.b2[j]};
      if (!ts.feasible(delta)) continue;
      map.feasible[k] = 1;
      ++feasible_count;
      const PwlBid bid = ts.to_bid();
      const GradientDensity w =
          diagonal_density(bid, prior, rule, delta, tiny_grid);
      const PwlBid dir = pwl_combine(1.0, bid, -1.0, bne_bid);
      const QuadResult r = apply_density_certified(w, dir, prior);
      map.residual[k] = r.value;
      map.violated[k] = (r.value - r.error > kViolationTol) ? 1 : 0;
    }
  }
  if (feasible_count == 0) {
    throw ConfigError("two-slope scan has an empty feasible lattice");
  }
  return map;
}

std::string MintyProbeSummary::to_json() const {
  nlohmann::json j;
  j["count"] = count;
  j["max_residual"] = max_residual;
  j["any_certified_violation"] = any_certified_violation;
  if (!worst_beta_json.empty()) {
    j["worst_beta"] = nlohmann::json::parse(worst_beta_json);
    j["worst_beta_tilde"] = nlohmann::json::parse(worst_beta_tilde_json);
  }
  return j.dump(2);
}

MintyProbeSummary minty_probe_sweep(int count, const Prior& prior,
                                    AuctionRule rule, double delta,
                                    uint64_t seed, bool include_family) {
  if (count < 1) throw PreconditionError("sweep needs count >= 1");
  FeasibleSet set{delta, SetVariant::BDelta};
  set.validate();

  std::vector<std::pair<PwlBid, PwlBid>> probes;
  probes.reserve(static_cast<size_t>(count) + 4);
  std::mt19937_64 subs(seed);
  for (int i = 0; i < count; ++i) {
    const uint64_t s1 = subs(), s2 = subs();
    probes.emplace_back(sample_feasible(set, prior, s1, 2.5),
                        sample_feasible(set, prior, s2, 2.5));
  }
  if (include_family && rule == AuctionRule::FirstPrice && delta <= 0.2) {
    for (int n : {2, 5, 10, 20}) {
      PwlBid member = fpa_mvi_counterexample(n);
      probes.emplace_back(member, member);
    }
  }

  MintyProbeSummary summary;
  summary.count = static_cast<int>(probes.size());
  summary.max_residual = -std::numeric_limits<double>::infinity();
  for (const auto& [beta, beta_tilde] : probes) {
    const MintyReport rep =
        minty_residual(beta, beta_tilde, prior, rule, delta);
    if (rep.residual > summary.max_residual) {
      summary.max_residual = rep.residual;
      summary.worst_beta_json = rep.beta_json;
      summary.worst_beta_tilde_json = rep.beta_tilde_json;
    }
    summary.any_certified_violation |= rep.certified_violation;
  }
  return summary;
}

}  // namespace auctionvi
