#pragma once

// Independent reference oracle for the OR-calibration QP on tiny instances:
// exhaustive active-set (KKT) enumeration for
//   min ||mu||^2  s.t.  C mu <= d
// with C, d encoding the moment slab and the box. Exact for strictly convex
// objectives; intended for n <= ~6 only. Test-harness code, kept apart from
// the production solver on purpose.

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

namespace dcal_test {

struct QpOracleProblem {
  Eigen::MatrixXd C;
  Eigen::VectorXd d;
};

// ||b - A mu||_inf <= eta, ||mu||_inf <= m  ->  C mu <= d rows.
inline QpOracleProblem or_qp_as_inequalities(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                             double eta, double m) {
  const int p = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  QpOracleProblem prob;
  prob.C.resize(2 * p + 2 * n, n);
  prob.d.resize(2 * p + 2 * n);
  prob.C.topRows(p) = A;
  prob.d.head(p) = b.array() + eta;
  prob.C.middleRows(p, p) = -A;
  prob.d.segment(p, p) = (-b).array() + eta;
  prob.C.middleRows(2 * p, n) = Eigen::MatrixXd::Identity(n, n);
  prob.d.segment(2 * p, n).setConstant(m);
  prob.C.bottomRows(n) = -Eigen::MatrixXd::Identity(n, n);
  prob.d.tail(n).setConstant(m);
  return prob;
}

inline std::optional<Eigen::VectorXd> solve_qp_oracle(const QpOracleProblem& prob) {
  const int n = static_cast<int>(prob.C.cols());
  const int m = static_cast<int>(prob.C.rows());
  constexpr double kFeasTol = 1e-9;
  constexpr double kDualTol = -1e-9;

  auto feasible = [&](const Eigen::VectorXd& mu) {
    return ((prob.C * mu - prob.d).array() <= kFeasTol).all();
  };

  std::optional<Eigen::VectorXd> best;
  double best_norm = std::numeric_limits<double>::infinity();

  // subsets of active constraints up to size n
  std::vector<int> subset;
  std::function<void(int)> recurse = [&](int start) {
    // candidate for the current subset
    if (subset.empty()) {
      const Eigen::VectorXd mu = Eigen::VectorXd::Zero(n);
      if (feasible(mu) && 0.0 < best_norm) {
        best = mu;
        best_norm = 0.0;
      }
    } else {
      const int k = static_cast<int>(subset.size());
      Eigen::MatrixXd Cs(k, n);
      Eigen::VectorXd ds(k);
      for (int r = 0; r < k; ++r) {
        Cs.row(r) = prob.C.row(subset[r]);
        ds[r] = prob.d[subset[r]];
      }
      const Eigen::MatrixXd G = Cs * Cs.transpose();
      const Eigen::FullPivLU<Eigen::MatrixXd> lu(G);
      if (lu.isInvertible()) {
        // stationarity: mu = Cs' alpha with Cs mu = ds; multipliers are
        // lambda = -2 alpha, so dual feasibility needs alpha <= 0
        const Eigen::VectorXd alpha = lu.solve(ds);
        const Eigen::VectorXd mu = Cs.transpose() * alpha;
        const bool dual_ok = (alpha.array() <= -kDualTol).all();
        if (dual_ok && feasible(mu)) {
          const double norm = mu.squaredNorm();
          if (norm < best_norm) {
            best = mu;
            best_norm = norm;
          }
        }
      }
    }
    if (static_cast<int>(subset.size()) == n) return;
    for (int j = start; j < m; ++j) {
      subset.push_back(j);
      recurse(j + 1);
      subset.pop_back();
    }
  };
  recurse(0);
  return best;
}

}  // namespace dcal_test
