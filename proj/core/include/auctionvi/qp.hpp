#pragma once

#include <span>
#include <vector>

namespace auctionvi {

// Symmetric tridiagonal matrix: diag[i], off[i] couples (i, i+1).
struct TridiagonalMatrix {
  std::vector<double> diag;
  std::vector<double> off;

  size_t size() const { return diag.size(); }
  void multiply(std::span<const double> x, std::span<double> y) const;
};

// LDL^T factorization of an SPD tridiagonal matrix (Thomas algorithm).
class TridiagonalLDLT {
 public:
  TridiagonalLDLT() = default;
  explicit TridiagonalLDLT(const TridiagonalMatrix& m) { factor(m); }
  void factor(const TridiagonalMatrix& m);
  void solve_in_place(std::span<double> rhs_to_solution) const;
  std::vector<double> solve(std::span<const double> rhs) const;

 private:
  std::vector<double> d_, l_;
};

// min 1/2 z'Pz + q'z  s.t.  lower <= z <= upper,  z[i+1]-z[i] >= min_rise[i].
// P must be SPD tridiagonal. Equalities are encoded as lower == upper.
struct BoundedSlopeQp {
  TridiagonalMatrix P;
  std::vector<double> q;
  std::vector<double> lower, upper;  // size m, +-inf allowed
  std::vector<double> min_rise;      // size m-1
};

struct QpSolution {
  std::vector<double> z;
  std::vector<double> mult_lower, mult_upper;  // box multipliers, >= 0
  std::vector<double> mult_slope;              // rise multipliers, >= 0
  double kkt_residual = 0.0;
  int admm_iterations = 0;
  int polish_rounds = 0;
  bool polished = false;
};

// Operator splitting (ADMM) with an active-set polish; the returned point
// satisfies the stated KKT residual or NumericalError is thrown.
QpSolution solve_bounded_slope_qp(const BoundedSlopeQp& qp,
                                  double kkt_tol = 1e-9,
                                  int max_admm_iterations = 200000);

}  // namespace auctionvi
