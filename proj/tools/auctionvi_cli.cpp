#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "auctionvi/bid.hpp"
#include "auctionvi/derivative.hpp"
#include "auctionvi/dynamics.hpp"
#include "auctionvi/equilibria.hpp"
#include "auctionvi/errors.hpp"
#include "auctionvi/minty.hpp"
#include "auctionvi/monotonicity.hpp"
#include "auctionvi/prior.hpp"
#include "auctionvi/serialization.hpp"
#include "auctionvi/svg.hpp"

namespace fs = std::filesystem;
using namespace auctionvi;

namespace {

constexpr double kAlphaMax = 0.17677669529663687;  // 1/(4 sqrt 2)

struct Options {
  std::optional<std::string> config_path;
  std::optional<std::string> rule;
  std::optional<std::string> prior;
  std::optional<int> n;
  std::optional<double> delta;
  std::optional<int> grid;
  std::optional<unsigned long long> seed;
  std::optional<std::string> out;

  // command-specific
  std::optional<std::string> counterexample;
  std::optional<std::string> minty;
  std::optional<int> count;
  std::optional<std::string> start;
  std::optional<double> step;
  std::optional<int> max_iters;
  std::optional<double> tol;
  std::optional<double> alpha;
  std::optional<int> iterations;
  std::optional<int> resolution;
  std::optional<double> b_lo, b_hi;
  std::optional<int> trajectories;
  std::optional<double> gap_radius;

  RunConfig file_cfg;

  void load_config() {
    if (config_path) file_cfg = RunConfig::from_file(*config_path);
  }

  template <typename T>
  T resolve(const std::optional<T>& cli, const std::string& key, T def) const {
    if (cli) return *cli;
    auto it = file_cfg.entries.find(key);
    if (it == file_cfg.entries.end()) return def;
    if constexpr (std::is_same_v<T, std::string>) {
      return it->second;
    } else if constexpr (std::is_same_v<T, double>) {
      return std::stod(it->second);
    } else if constexpr (std::is_same_v<T, int>) {
      return std::stoi(it->second);
    } else if constexpr (std::is_same_v<T, unsigned long long>) {
      return std::stoull(it->second);
    }
  }
};

void add_common(CLI::App* cmd, Options& o, bool with_rule = true) {
  cmd->add_option("--config", o.config_path,
                  "flat key=value file; flags override file entries");
  if (with_rule) cmd->add_option("--rule", o.rule, "auction rule: spa | fpa");
  cmd->add_option("--prior", o.prior,
                  "uniform | power:<p> | tab:<csv path> (default uniform)");
  cmd->add_option("--n", o.n, "number of bidders (default 2)");
  cmd->add_option("--delta", o.delta, "slope lower bound (default 0.01)");
  cmd->add_option("--grid", o.grid, "master grid points (default 1025)");
  cmd->add_option("--seed", o.seed, "random seed (default 1)");
  cmd->add_option("--out", o.out,
                  "output directory (default $AUCTIONVI_OUTDIR or .)");
}

Prior make_prior(const std::string& spec, int n) {
  if (spec == "uniform") return Prior::uniform(n);
  if (spec.rfind("power:", 0) == 0) {
    return Prior::power(std::stod(spec.substr(6)), n);
  }
  if (spec.rfind("tab:", 0) == 0) {
    return Prior::tabulated_from_csv(spec.substr(4), n);
  }
  throw ConfigError("unknown prior spec: " + spec);
}

fs::path resolve_outdir(const Options& o) {
  std::string out = o.resolve(o.out, "out", std::string());
  if (out.empty()) {
    if (const char* env = std::getenv("AUCTIONVI_OUTDIR")) out = env;
  }
  if (out.empty()) out = ".";
  fs::create_directories(out);
  return out;
}

struct Resolved {
  AuctionRule rule;
  Prior prior;
  double delta;
  int grid;
  unsigned long long seed;
  fs::path outdir;
  RunConfig cfg;
};

Resolved resolve_common(const Options& o, const std::string& command,
                        bool need_rule = true) {
  const std::string rule_s = o.resolve(o.rule, "rule", std::string());
  if (need_rule && rule_s.empty()) {
    throw ConfigError("--rule is required (spa or fpa)");
  }
  const std::string prior_s =
      o.resolve(o.prior, "prior", std::string("uniform"));
  const int n = o.resolve(o.n, "n", 2);
  const double delta = o.resolve(o.delta, "delta", 0.01);
  const int grid = o.resolve(o.grid, "grid", static_cast<int>(kMasterGridSize));
  const unsigned long long seed = o.resolve(o.seed, "seed", 1ULL);

  Resolved r{need_rule ? auction_rule_from_string(rule_s)
                       : AuctionRule::SecondPrice,
             make_prior(prior_s, n),
             delta,
             grid,
             seed,
             resolve_outdir(o),
             RunConfig{}};
  r.cfg.set("command", command);
  if (!rule_s.empty()) r.cfg.set("rule", rule_s);
  r.cfg.set("prior", prior_s);
  r.cfg.set("n", n);
  r.cfg.set("delta", delta);
  r.cfg.set("grid", grid);
  r.cfg.set("seed", seed);
  // the output directory is deliberately not embedded: outputs stay
  // byte-identical when the same run is written elsewhere
  return r;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

PwlBid parse_start(const std::string& spec, const Resolved& r,
                   std::span<const double> grid) {
  if (spec == "identity") return PwlBid::identity().refined(grid);
  if (spec == "bne") {
    return analytic_bne(r.prior, r.rule, r.delta, grid).bid;
  }
  if (spec.rfind("linear:", 0) == 0) {
    return PwlBid::linear(std::stod(spec.substr(7))).refined(grid);
  }
  std::ifstream in(spec);
  if (!in) throw ConfigError("cannot open start bid: " + spec);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return PwlBid::from_json(text).refined(grid);
}

// ---------- subcommands ----------

int cmd_bne(const Options& o) {
  Resolved r = resolve_common(o, "bne");
  auto grid = uniform_grid(static_cast<size_t>(r.grid));
  const BneSolution bne = analytic_bne(r.prior, r.rule, r.delta, grid);
  const double residual =
      vi_residual(bne.bid, r.prior, r.rule, r.delta, 16, r.seed);

  const auto headers = r.cfg.csv_header_lines();
  bne.bid.write_csv((r.outdir / "bne.csv").string(), grid, headers);
  write_text(r.outdir / "bne.json",
             with_config_envelope(bne.bid.to_json(), r.cfg));

  nlohmann::json rep;
  rep["vi_residual"] = residual;
  rep["slope_bound"] = bne.slope_bound;
  rep["rule"] = to_string(r.rule);
  if (r.rule == AuctionRule::FirstPrice) {
    rep["ode_residual"] = fpa_ode_residual(bne.bid, r.prior);
  }
  write_text(r.outdir / "bne_report.json",
             with_config_envelope(rep.dump(), r.cfg));
  std::cout << "bne written to " << (r.outdir / "bne.csv").string()
            << " (VI residual " << residual << ")\n";
  return 0;
}

int cmd_check(const Options& o) {
  Resolved r = resolve_common(o, "check");
  const std::string ce = o.resolve(o.counterexample, "counterexample",
                                   std::string());
  const std::string minty_spec = o.resolve(o.minty, "minty", std::string());
  const int count = o.resolve(o.count, "count", 1000);
  if (!ce.empty()) r.cfg.set("counterexample", ce);
  if (!minty_spec.empty()) r.cfg.set("minty", minty_spec);
  r.cfg.set("count", count);

  nlohmann::json rep;
  if (!ce.empty()) {
    std::pair<PwlBid, PwlBid> pair =
        ce == "spa-prop" ? spa_counterexample_pair()
        : ce == "fpa-prop"
            ? fpa_counterexample_pair()
            : throw ConfigError("unknown counterexample: " + ce);
    const AuctionRule rule =
        ce == "spa-prop" ? AuctionRule::SecondPrice : AuctionRule::FirstPrice;
    const double delta = ce == "spa-prop" ? 0.09 : 0.1;
    const MonotonicityReport m =
        quasi_mono_check(pair.first, pair.second, r.prior, rule, delta);
    rep = nlohmann::json::parse(m.to_json());
  } else if (minty_spec.rfind("family:", 0) == 0) {
    const int index = std::stoi(minty_spec.substr(7));
    const PwlBid member = fpa_mvi_counterexample(index);
    const MintyReport m =
        minty_residual(member, member, r.prior, r.rule, r.delta);
    rep = nlohmann::json::parse(m.to_json());
    rep["family_index"] = index;
  } else if (minty_spec == "sweep") {
    const MintyProbeSummary s =
        minty_probe_sweep(count, r.prior, r.rule, r.delta, r.seed);
    rep = nlohmann::json::parse(s.to_json());
  } else {
    // default: random monotonicity sweep
    const SweepSummary s =
        random_monotonicity_sweep(count, r.prior, r.rule, r.delta, r.seed);
    rep = nlohmann::json::parse(s.to_json());
  }
  const std::string out = with_config_envelope(rep.dump(), r.cfg);
  write_text(r.outdir / "check_report.json", out);
  std::cout << out << "\n";
  return 0;
}

int cmd_flow(const Options& o) {
  Resolved r = resolve_common(o, "flow");
  const int res = o.resolve(o.resolution, "resolution", 101);
  const double b_lo = o.resolve(o.b_lo, "b-lo", 0.0);
  const double b_hi = o.resolve(o.b_hi, "b-hi", 1.0);
  const int n_traj = o.resolve(o.trajectories, "trajectories", 0);
  const double step = o.resolve(o.step, "step", 0.05);
  const int max_iters = o.resolve(o.max_iters, "max-iters", 20000);
  const double tol = o.resolve(o.tol, "tol", 1e-5);
  r.cfg.set("resolution", res);
  r.cfg.set("b-lo", b_lo);
  r.cfg.set("b-hi", b_hi);
  r.cfg.set("trajectories", n_traj);
  r.cfg.set("step", step);
  r.cfg.set("max-iters", max_iters);
  r.cfg.set("tol", tol);

  const auto headers = r.cfg.csv_header_lines();
  const FlowField field = flow_field(r.rule, r.prior, r.delta, b_lo, b_hi,
                                     static_cast<size_t>(res));
  field.write_csv((r.outdir / "flow.csv").string(), headers);
  const ViolationMap map = scan_two_slope(r.rule, r.prior, r.delta, b_lo,
                                          b_hi, b_lo, b_hi,
                                          static_cast<size_t>(res));
  map.write_csv((r.outdir / "flow_minty.csv").string(), headers);

  std::vector<Trajectory> streams;
  std::mt19937_64 rng(r.seed);
  auto next_unit = [&rng]() {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
  };
  for (int t = 0; t < n_traj; ++t) {
    TwoSlope s{r.delta + (1.0 - r.delta) * next_unit(),
               r.delta + (1.0 - r.delta) * next_unit()};
    streams.push_back(integrate_trajectory(s, r.rule, r.prior, r.delta, step,
                                           max_iters, tol));
  }
  if (!streams.empty()) {
    std::ofstream out(r.outdir / "flow_trajectories.csv");
    for (const auto& l : headers) out << "# " << l << "\n";
    out << "trajectory,iter,b1,b2,grad_norm,dist_to_bne,status\n";
    out.precision(17);
    for (size_t t = 0; t < streams.size(); ++t) {
      const auto& tr = streams[t];
      for (size_t i = 0; i < tr.states.size(); ++i) {
        out << t << "," << i << "," << tr.states[i][0] << ","
            << tr.states[i][1] << "," << tr.grad_norm[i] << ","
            << tr.dist_to_bne[i] << "," << to_string(tr.status) << "\n";
      }
    }
  }

  const TwoSlope star = bne_two_slope(r.rule, r.prior, r.delta);
  write_flow_svg((r.outdir / "flow.svg").string(), field, &map, streams,
                 star.b1, star.b2,
                 std::string("gradient field, ") + to_string(r.rule) +
                     ", prior " + r.prior.label(),
                 headers);

  nlohmann::json jf;
  jf["b1"] = field.b1;
  jf["b2"] = field.b2;
  jf["g1"] = field.g1;
  jf["g2"] = field.g2;
  jf["feasible"] = field.feasible;
  jf["violated"] = map.violated;
  jf["star"] = {star.b1, star.b2};
  write_text(r.outdir / "flow.json", with_config_envelope(jf.dump(), r.cfg));
  std::cout << "flow field written to " << (r.outdir / "flow.svg").string()
            << "\n";
  return 0;
}

int cmd_learn(const Options& o) {
  Resolved r = resolve_common(o, "learn");
  auto grid = uniform_grid(static_cast<size_t>(r.grid));
  const std::string start_s =
      o.resolve(o.start, "start", std::string("identity"));
  const double step = o.resolve(o.step, "step", 1.0);
  const int max_iters = o.resolve(o.max_iters, "max-iters", 1500);
  const double tol = o.resolve(o.tol, "tol", 1e-7);
  r.cfg.set("start", start_s);
  r.cfg.set("step", step);
  r.cfg.set("max-iters", max_iters);
  r.cfg.set("tol", tol);

  const PwlBid start = parse_start(start_s, r, grid);
  const LearnResult res = projected_gradient_learn(
      start, r.rule, r.prior, r.delta, step, max_iters, tol, grid);
  const auto headers = r.cfg.csv_header_lines();
  res.trace.write_csv((r.outdir / "learn_trace.csv").string(), headers);

  nlohmann::json j;
  j["status"] = to_string(res.trace.status);
  j["iterations"] = res.trace.step_change.size();
  j["final_dist_to_bne"] =
      res.trace.dist_to_bne.empty() ? 0.0 : res.trace.dist_to_bne.back();
  j["final_bid"] = nlohmann::json::parse(res.final_bid.to_json());
  write_text(r.outdir / "learn_final.json",
             with_config_envelope(j.dump(), r.cfg));
  std::cout << "learn finished: " << to_string(res.trace.status) << " after "
            << res.trace.step_change.size() << " iterations\n";
  return 0;
}

int cmd_odea(const Options& o) {
  Resolved r = resolve_common(o, "odea");
  auto grid = uniform_grid(static_cast<size_t>(r.grid));
  const std::string start_s =
      o.resolve(o.start, "start", std::string("linear:0.5"));
  const double alpha = o.resolve(o.alpha, "alpha", kAlphaMax);
  const int iters = o.resolve(o.iterations, "iterations", 500);
  const double gap_radius = o.resolve(o.gap_radius, "gap-radius", 0.1);
  const double delta = r.delta;  // note: odea default delta comes from --delta
  r.cfg.set("start", start_s);
  r.cfg.set("alpha", alpha);
  r.cfg.set("iterations", iters);
  r.cfg.set("gap-radius", gap_radius);

  const PwlBid start = parse_start(start_s, r, grid);
  const OdeaResult res =
      odea_run(start, r.rule, r.prior, delta, alpha, iters, gap_radius);

  const auto headers = r.cfg.csv_header_lines();
  {
    std::ofstream out(r.outdir / "odea_trace.csv");
    for (const auto& l : headers) out << "# " << l << "\n";
    out << "k,selection_value,dist_to_bne,restricted_gap\n";
    out.precision(17);
    for (size_t k = 0; k < res.selection_value.size(); ++k) {
      out << (k + 1) << "," << res.selection_value[k] << ","
          << res.dist_to_bne[k] << "," << res.restricted_gap[k] << "\n";
    }
    if (!res.note.empty()) out << "# note=" << res.note << "\n";
  }
  nlohmann::json j;
  j["selected_k"] = res.selected_k;
  j["final_dist_to_bne"] =
      res.dist_to_bne.empty() ? 0.0 : res.dist_to_bne.back();
  j["lipschitz"] = res.final_state.lipschitz;
  if (!res.note.empty()) j["note"] = res.note;
  j["beta_tilde"] = nlohmann::json::parse(res.beta_tilde.to_json());
  write_text(r.outdir / "odea_final.json",
             with_config_envelope(j.dump(), r.cfg));
  std::cout << "odea finished, selected k=" << res.selected_k << "\n";
  if (!res.note.empty()) std::cout << "note: " << res.note << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayes-Nash equilibria of first/second-price auctions via "
               "variational inequalities over piecewise-linear bids"};
  app.require_subcommand(1);

  Options o;
  auto* bne = app.add_subcommand("bne", "compute the analytic equilibrium");
  add_common(bne, o);

  auto* check = app.add_subcommand(
      "check", "monotonicity / Minty checks and counterexamples");
  add_common(check, o);
  check->add_option("--counterexample", o.counterexample,
                    "spa-prop | fpa-prop");
  check->add_option("--minty", o.minty, "family:<n> | sweep");
  check->add_option("--count", o.count, "probe count for sweeps");

  auto* flow = app.add_subcommand("flow",
                                  "two-slope gradient field, Minty overlay, "
                                  "trajectories, SVG figure");
  add_common(flow, o);
  flow->add_option("--resolution", o.resolution, "lattice resolution");
  flow->add_option("--b-lo", o.b_lo, "lattice lower bound");
  flow->add_option("--b-hi", o.b_hi, "lattice upper bound");
  flow->add_option("--trajectories", o.trajectories, "number of streamlines");
  flow->add_option("--step", o.step, "ascent step size");
  flow->add_option("--max-iters", o.max_iters, "trajectory step limit");
  flow->add_option("--tol", o.tol, "gradient-norm stop tolerance");

  auto* learn = app.add_subcommand("learn", "projected gradient ascent");
  add_common(learn, o);
  learn->add_option("--start", o.start,
                    "identity | bne | linear:<a> | <bid json path>");
  learn->add_option("--step", o.step, "ascent step size");
  learn->add_option("--max-iters", o.max_iters, "iteration limit");
  learn->add_option("--tol", o.tol, "L2 change stop tolerance");

  auto* odea =
      app.add_subcommand("odea", "optimistic dual extrapolation");
  add_common(odea, o);
  odea->add_option("--start", o.start,
                   "identity | bne | linear:<a> | <bid json path>");
  odea->add_option("--alpha", o.alpha, "step parameter in (0, 1/(4 sqrt 2)]");
  odea->add_option("--iterations", o.iterations, "iteration count K");
  odea->add_option("--gap-radius", o.gap_radius,
                   "radius of the restricted-gap probe");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    o.load_config();
    if (bne->parsed()) return cmd_bne(o);
    if (check->parsed()) return cmd_check(o);
    if (flow->parsed()) return cmd_flow(o);
    if (learn->parsed()) return cmd_learn(o);
    if (odea->parsed()) return cmd_odea(o);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const PreconditionError& e) {
    std::cerr << "invalid request: " << e.what() << "\n";
    return 2;
  } catch (const UnsupportedOperation& e) {
    std::cerr << "unsupported: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
