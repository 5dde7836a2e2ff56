#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "auctionvi/bid.hpp"
#include "auctionvi/derivative.hpp"
#include "auctionvi/equilibria.hpp"
#include "auctionvi/prior.hpp"
#include "auctionvi/projection.hpp"

namespace auctionvi {

// Gradient of the ex-ante utility in the two-slope coordinates (b1, b2):
// the diagonal density paired with d1 = min(x, 1/2), d2 = (x - 1/2)_+.
std::array<double, 2> two_slope_gradient(const TwoSlope& s, const Prior& prior,
                                         AuctionRule rule, double delta);

// Two-slope coordinates of the analytic equilibrium (exact when the BNE is
// linear, e.g. uniform priors).
TwoSlope bne_two_slope(AuctionRule rule, const Prior& prior, double delta);

struct FlowField {
  std::vector<double> b1, b2;  // lattice axes
  std::vector<double> g1, g2;  // row-major: index(i1, i2)
  std::vector<char> feasible;
  AuctionRule rule = AuctionRule::FirstPrice;
  double delta = 0.0;

  size_t index(size_t i1, size_t i2) const { return i1 * b2.size() + i2; }
  void write_csv(const std::string& path,
                 std::span<const std::string> header_lines = {}) const;
};

FlowField flow_field(AuctionRule rule, const Prior& prior, double delta,
                     double b_lo, double b_hi, size_t resolution);

enum class RunStatus { Converged, MaxSteps, Diverged };
std::string to_string(RunStatus s);

struct Trajectory {
  std::vector<std::array<double, 2>> states;  // two-slope paths only
  std::vector<double> grad_norm;
  std::vector<double> dist_to_bne;
  std::vector<double> step_change;
  std::vector<double> feas_violation;  // membership check per iterate
  RunStatus status = RunStatus::MaxSteps;
  std::string note;

  void write_csv(const std::string& path,
                 std::span<const std::string> header_lines = {}) const;
};

// Explicit gradient ascent in the two-slope plane, clipped to the feasible
// box [delta, 1]^2; RK4 is available for smoother streamlines.
Trajectory integrate_trajectory(const TwoSlope& start, AuctionRule rule,
                                const Prior& prior, double delta, double step,
                                int max_steps, double tol, bool rk4 = false);

struct LearnResult {
  PwlBid final_bid;
  Trajectory trace;
};

// Projected gradient ascent on the full piecewise-linear grid. The ascent
// direction is the H1(F) Riesz representative of the utility derivative
// (the raw L2 density anti-diffuses through the 1/beta' term and blows up
// grid-frequency modes at any fixed step); an Armijo backtracking test on
// the deviation payoff picks the step, capped at step_max.
LearnResult projected_gradient_learn(const PwlBid& start, AuctionRule rule,
                                     const Prior& prior, double delta,
                                     double step_max, int max_iters,
                                     double tol,
                                     std::span<const double> grid = {});

// L_DU <= 2 delta^{-2} ||g||_inf, the certified Lipschitz constant of the
// derivative operator on W_delta.
double lipschitz_constant(const Prior& prior, double delta);

// P_v(E) = argmin_{z in W_delta} E[z] + 1/2 ||z - v||_H^2 on a fixed grid.
class ProxOperator {
 public:
  ProxOperator(std::span<const double> grid, const Prior& prior, double delta);

  // load_i = E[phi_i]
  PwlBid apply(const PwlBid& v, std::span<const double> load) const;
  PwlBid apply(const PwlBid& v, const GradientDensity& functional) const;
  const GramOperator& gram() const { return gram_; }
  double last_kkt_residual() const { return last_kkt_; }

 private:
  GramOperator gram_;
  double delta_;
  mutable double last_kkt_ = 0.0;
};

PwlBid prox_map(const PwlBid& v, const GradientDensity& functional,
                double delta, const Prior& prior);

struct OdeaState {
  PwlBid beta = PwlBid::identity();
  PwlBid z = PwlBid::identity();
  std::vector<double> dual_load;     // accumulated functional E[phi_i]
  std::vector<double> dual_samples;  // running density on the grid
  int k = 0;
  double alpha = 0.0;
  double lipschitz = 0.0;
};

struct OdeaResult {
  PwlBid beta_tilde = PwlBid::identity();  // selected iterate (line 7)
  int selected_k = 0;
  OdeaState final_state;
  std::vector<double> selection_value;  // ||b_k - z_{k-1}|| + ||b_{k-1} - z_{k-1}||
  std::vector<double> dist_to_bne;      // H-norm distance per iterate
  std::vector<double> restricted_gap;   // Riesz-probe lower bound per iterate
  std::vector<double> feas_violation;   // max violation of beta_k / z_k
  std::vector<PwlBid> beta_iterates;    // kept when requested
  std::vector<PwlBid> z_iterates;
  std::string note;
};

// Optimistic dual extrapolation with the H1(F) prox; alpha in (0, 1/(4*sqrt 2)].
OdeaResult odea_run(const PwlBid& beta0, AuctionRule rule, const Prior& prior,
                    double delta, double alpha, int iterations,
                    double gap_probe_radius = 0.1,
                    bool keep_iterates = false);

// Sampled lower bound of sup |DU(beta_tilde)[beta_tilde - beta]| over
// feasible beta within H-distance radius; includes the Riesz-optimal probe.
double restricted_gap(const PwlBid& beta_tilde, AuctionRule rule,
                      const Prior& prior, double delta, double radius,
                      int probe_count, uint64_t seed);

}  // namespace auctionvi
