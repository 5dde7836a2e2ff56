#pragma once

#include <span>
#include <vector>

#include "auctionvi/bid.hpp"
#include "auctionvi/prior.hpp"
#include "auctionvi/qp.hpp"

namespace auctionvi {

enum class Metric { L2, H1 };

// FEM Gram matrices of the piecewise-linear hat basis on a grid, with
// respect to the L2(F) and H1(F) inner products, plus load vectors and
// H1 Riesz solves.
class GramOperator {
 public:
  GramOperator(std::span<const double> grid, const Prior& prior);

  const TridiagonalMatrix& mass() const { return mass_; }
  const TridiagonalMatrix& h1() const { return h1_; }
  std::span<const double> grid() const { return grid_; }

  // c_i = int phi_i(x) fn(x) dF(x), refined at the given breakpoints
  std::vector<double> load(const Integrand& fn,
                           std::span<const double> breakpoints) const;

  // Riesz representative r of the functional c w.r.t. the H1(F) product
  std::vector<double> riesz_h1(std::span<const double> load) const;
  // sqrt(c' M_H^{-1} c): dual norm of the functional c
  double dual_norm_h1(std::span<const double> load) const;

  double norm_h1(std::span<const double> values) const;
  double norm_l2(std::span<const double> values) const;

 private:
  std::vector<double> grid_;
  TridiagonalMatrix mass_, h1_;
  TridiagonalLDLT h1_ldlt_;
};

// Metric projection onto the discretized feasible set; reusable (Gram
// matrices are assembled once per grid/prior).
class Projector {
 public:
  Projector(std::span<const double> grid, const Prior& prior,
            FeasibleSet set, Metric metric);

  PwlBid operator()(const PwlBid& bid) const;
  // projection of raw grid values (must match the grid)
  std::vector<double> project_values(std::span<const double> values) const;
  double last_kkt_residual() const { return last_kkt_; }
  const GramOperator& gram() const { return gram_; }

 private:
  GramOperator gram_;
  FeasibleSet set_;
  Metric metric_;
  mutable double last_kkt_ = 0.0;
};

// One-shot projection on the bid's own knot grid.
PwlBid project(const PwlBid& bid, const FeasibleSet& set, Metric metric,
               const Prior& prior);

}  // namespace auctionvi
