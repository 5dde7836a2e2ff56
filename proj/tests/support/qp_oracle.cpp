#include "qp_oracle.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace auctionvi::testing {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// constraint row: a'z >= b, where a is +-e_i or e_{i+1}-e_i
struct Row {
  int kind;    // 0: z_i >= lo, 1: -z_i >= -hi, 2: z_{i+1}-z_i >= rise
  size_t i;
  double rhs;
  bool equality;
};

double row_value(const Row& r, const Eigen::VectorXd& z) {
  switch (r.kind) {
    case 0:
      return z[static_cast<Eigen::Index>(r.i)];
    case 1:
      return -z[static_cast<Eigen::Index>(r.i)];
    default:
      return z[static_cast<Eigen::Index>(r.i + 1)] -
             z[static_cast<Eigen::Index>(r.i)];
  }
}

void add_row(Eigen::MatrixXd& A, Eigen::Index r, const Row& row) {
  switch (row.kind) {
    case 0:
      A(r, static_cast<Eigen::Index>(row.i)) = 1.0;
      break;
    case 1:
      A(r, static_cast<Eigen::Index>(row.i)) = -1.0;
      break;
    default:
      A(r, static_cast<Eigen::Index>(row.i)) = -1.0;
      A(r, static_cast<Eigen::Index>(row.i + 1)) = 1.0;
  }
}

}  // namespace

std::vector<double> qp_oracle_solve(const BoundedSlopeQp& qp,
                                    int max_iterations,
                                    const std::vector<double>* warm) {
  const size_t m = qp.q.size();
  const auto mi = static_cast<Eigen::Index>(m);

  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(mi, mi);
  for (size_t i = 0; i < m; ++i) {
    P(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) =
        qp.P.diag[i];
    if (i + 1 < m) {
      P(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i + 1)) =
          qp.P.off[i];
      P(static_cast<Eigen::Index>(i + 1), static_cast<Eigen::Index>(i)) =
          qp.P.off[i];
    }
  }
  Eigen::VectorXd q(mi);
  for (size_t i = 0; i < m; ++i) q[static_cast<Eigen::Index>(i)] = qp.q[i];

  std::vector<Row> rows;
  for (size_t i = 0; i < m; ++i) {
    const bool eq = qp.lower[i] == qp.upper[i];
    if (qp.lower[i] > -kInf) rows.push_back({0, i, qp.lower[i], eq});
    if (!eq && qp.upper[i] < kInf) rows.push_back({1, i, -qp.upper[i], false});
  }
  for (size_t i = 0; i + 1 < m; ++i) rows.push_back({2, i, qp.min_rise[i], false});

  // feasible start: a supplied warm point or the minimal-slope ramp
  Eigen::VectorXd z(mi);
  if (warm != nullptr && warm->size() == m) {
    for (size_t i = 0; i < m; ++i) z[static_cast<Eigen::Index>(i)] = (*warm)[i];
    // nudge into strict feasibility where roundoff left it outside
    for (size_t i = 0; i < m; ++i) {
      auto& zi = z[static_cast<Eigen::Index>(i)];
      if (qp.lower[i] > -kInf) zi = std::max(zi, qp.lower[i]);
      if (qp.upper[i] < kInf) zi = std::min(zi, qp.upper[i]);
    }
    for (size_t i = 1; i < m; ++i) {
      auto& zi = z[static_cast<Eigen::Index>(i)];
      zi = std::max(zi, z[static_cast<Eigen::Index>(i - 1)] + qp.min_rise[i - 1]);
      if (qp.upper[i] < kInf && zi > qp.upper[i] + 1e-9) {
        warm = nullptr;  // inconsistent warm point; fall back to the ramp
        break;
      }
    }
  }
  if (warm == nullptr || warm->size() != m) {
    double base = qp.lower[0] > -kInf ? qp.lower[0] : 0.0;
    z[0] = base;
    for (size_t i = 1; i < m; ++i) {
      z[static_cast<Eigen::Index>(i)] =
          z[static_cast<Eigen::Index>(i - 1)] + qp.min_rise[i - 1];
    }
    for (size_t i = 0; i < m; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      if (qp.lower[i] > -kInf && z[ii] < qp.lower[i]) {
        const double shift = qp.lower[i] - z[ii];
        for (size_t j = i; j < m; ++j) z[static_cast<Eigen::Index>(j)] += shift;
      }
    }
    for (size_t i = 0; i < m; ++i) {
      if (qp.upper[i] < kInf &&
          z[static_cast<Eigen::Index>(i)] > qp.upper[i] + 1e-12) {
        throw std::runtime_error("qp oracle: could not build a feasible start");
      }
    }
  }

  std::vector<char> active(rows.size(), 0);
  for (size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].equality || row_value(rows[r], z) <= rows[r].rhs + 1e-12) {
      active[r] = 1;
    }
  }

  for (int it = 0; it < max_iterations; ++it) {
    std::vector<size_t> act;
    for (size_t r = 0; r < rows.size(); ++r) {
      if (active[r]) act.push_back(r);
    }
    const auto k = static_cast<Eigen::Index>(act.size());

    Eigen::MatrixXd KKT = Eigen::MatrixXd::Zero(mi + k, mi + k);
    KKT.topLeftCorner(mi, mi) = P;
    Eigen::VectorXd rhs(mi + k);
    rhs.head(mi) = -q;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(k, mi);
    for (Eigen::Index r = 0; r < k; ++r) {
      add_row(A, r, rows[act[static_cast<size_t>(r)]]);
      rhs[mi + r] = rows[act[static_cast<size_t>(r)]].rhs;
    }
    KKT.topRightCorner(mi, k) = A.transpose();
    KKT.bottomLeftCorner(k, mi) = A;

    Eigen::VectorXd sol = KKT.partialPivLu().solve(rhs);
    Eigen::VectorXd z_eq = sol.head(mi);
    Eigen::VectorXd lambda = sol.tail(k);

    const double move = (z_eq - z).lpNorm<Eigen::Infinity>();
    if (move <= 1e-12) {
      // optimal on the working set; check multiplier signs. The KKT block
      // solves P z + A' lambda = -q, so the inequality multiplier in the
      // a'z >= b convention is mu = -lambda.
      double worst = -1e-10;
      ptrdiff_t drop = -1;
      for (Eigen::Index r = 0; r < k; ++r) {
        const Row& row = rows[act[static_cast<size_t>(r)]];
        if (row.equality) continue;
        const double mu = -lambda[r];
        if (mu < worst) {
          worst = mu;
          drop = static_cast<ptrdiff_t>(act[static_cast<size_t>(r)]);
        }
      }
      if (drop < 0) {
        return std::vector<double>(z.data(), z.data() + m);
      }
      active[static_cast<size_t>(drop)] = 0;
      continue;
    }

    // step toward z_eq, stopping at the first blocking constraint
    double alpha = 1.0;
    ptrdiff_t block = -1;
    for (size_t r = 0; r < rows.size(); ++r) {
      if (active[r]) continue;
      const double val = row_value(rows[r], z);
      const double val_eq = row_value(rows[r], z_eq);
      if (val_eq >= rows[r].rhs - 1e-14) continue;
      const double a = (val - rows[r].rhs) / (val - val_eq);
      if (a < alpha - 1e-15) {
        alpha = a;
        block = static_cast<ptrdiff_t>(r);
      }
    }
    z = z + alpha * (z_eq - z);
    if (block >= 0) active[static_cast<size_t>(block)] = 1;
  }
  throw std::runtime_error("qp oracle: active-set iteration limit");
}

}  // namespace auctionvi::testing
