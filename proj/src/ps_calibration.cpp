#include "dcal/ps_calibration.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "dcal/errors.hpp"
#include "dcal/rng.hpp"

namespace dcal {

AugmentedDesign augment_covariates(const Eigen::MatrixXd& X, std::uint64_t seed) {
  const int n = static_cast<int>(X.rows());
  const int p = static_cast<int>(X.cols());
  if (n < 1) throw invalid_config_error("augment_covariates: empty design");
  AugmentedDesign out;
  out.synth_seed = seed;
  out.n_synth = std::max(0, n - p);
  if (out.n_synth == 0) {
    out.x_tilde = X;
    return out;
  }
  out.x_tilde.resize(n, n);
  out.x_tilde.leftCols(p) = X;
  CounterRng rng(seed, /*stream=*/0x41554743ULL);  // "AUGC"
  for (int j = 0; j < out.n_synth; ++j)
    for (int i = 0; i < n; ++i) out.x_tilde(i, p + j) = rng.uniform(-1.0, 1.0);
  return out;
}

Eigen::VectorXd pad_gamma(const Eigen::VectorXd& gamma_hat, int d) {
  if (gamma_hat.size() > d) throw invalid_config_error("pad_gamma: vector longer than target");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(d);
  out.head(gamma_hat.size()) = gamma_hat;
  return out;
}

double PsConstraintReport::max_violation() const {
  return std::max(
      {glm_direction, mu_direction, augmented, weight_bound, variance_floor, ps_moment});
}

namespace {

constexpr double kPiFloor = 1e-12;
constexpr double kToleranceMargin = 1e-3;  // optimize against tol*(1-margin)
constexpr int kIterCapPerStart = 5000;
constexpr int kRounds = 5;

// Immutable description of one calibration program instance.
struct PsProgram {
  const Eigen::MatrixXd* Xt = nullptr;  // n x d
  Eigen::MatrixXd a;                    // n x K stacked moment columns
  Eigen::VectorXd tol;                  // K true tolerances
  Eigen::VectorXd T;
  double m_pi = 0.0;
  double eta_pi1 = 0.0;
  bool plm = false;
  int k_glm = 0;  // columns [0, k_glm) -> Eq. 8 family
  int k_mu = 0;   // 0 or 1 column after that -> Eq. 9
  int n = 0, d = 0;
};

PsProgram build_program(const Dataset& main, const AugmentedDesign& aug,
                        const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& mu_hat,
                        const Link& psi, const ResolvedTuning& tuning, bool plm) {
  const int n = main.n();
  const int p = main.p();
  const int d = static_cast<int>(aug.x_tilde.cols());
  if (aug.x_tilde.rows() != n) throw invalid_config_error("ps program: augmented design rows");
  if (mu_hat.size() != n && mu_hat.size() != 0)
    throw invalid_config_error("ps program: mu_hat length");

  PsProgram prog;
  prog.Xt = &aug.x_tilde;
  prog.T = main.T;
  prog.m_pi = tuning.m_pi;
  prog.eta_pi1 = tuning.eta_pi1;
  prog.plm = plm;
  prog.n = n;
  prog.d = d;

  const double sqn = std::sqrt(static_cast<double>(n));
  const bool with_mu = mu_hat.size() == n && mu_hat.norm() > 0.0;
  prog.k_glm = p;
  prog.k_mu = with_mu ? 1 : 0;
  const int K = p + prog.k_mu + d;
  prog.a.resize(n, K);
  prog.tol.resize(K);

  Eigen::VectorXd dpsi(n);
  const Eigen::VectorXd eta_beta = main.X * beta_hat;
  for (int i = 0; i < n; ++i) dpsi[i] = psi.deriv(eta_beta[i]);

  for (int j = 0; j < p; ++j) {
    prog.a.col(j) = dpsi.cwiseProduct(main.X.col(j));
    prog.tol[j] = tuning.eta_pi1 * prog.a.col(j).norm() / sqn;
  }
  if (with_mu) {
    prog.a.col(p) = mu_hat;
    prog.tol[p] = tuning.eta_pi1 * mu_hat.norm() / sqn;
  }
  for (int j = 0; j < d; ++j) {
    prog.a.col(p + prog.k_mu + j) = aug.x_tilde.col(j);
    prog.tol[p + prog.k_mu + j] = tuning.eta_pi2 * aug.x_tilde.col(j).norm() / sqn;
  }
  return prog;
}

struct PsEval {
  Eigen::VectorXd m;          // K moments
  double penalty = 0.0;       // squared hinge vs shrunk tolerances
  PsConstraintReport report;  // vs true tolerances
  // cached row quantities for the gradient
  Eigen::VectorXd pi, dpi, w;
  double pi_norm = 0.0, ps_m = 0.0;
};

PsEval evaluate(const PsProgram& prog, const Link& phi, const Eigen::VectorXd& gamma) {
  const int n = prog.n;
  PsEval ev;
  const Eigen::VectorXd z = (*prog.Xt) * gamma;
  ev.pi.resize(n);
  ev.dpi.resize(n);
  ev.w.resize(n);
  for (int i = 0; i < n; ++i) {
    const double pi = std::max(phi.value(z[i]), kPiFloor);
    ev.pi[i] = pi;
    ev.dpi[i] = phi.deriv(z[i]);
    ev.w[i] = prog.plm ? (prog.T[i] - pi) : (prog.T[i] / pi - 1.0);
  }
  ev.m = prog.a.transpose() * ev.w / double(n);

  const double shrink = 1.0 - kToleranceMargin;
  double penalty = 0.0;
  auto family_violation = [&](int lo, int hi) {
    double worst = -std::numeric_limits<double>::infinity();
    for (int k = lo; k < hi; ++k) {
      const double v = std::abs(ev.m[k]) - prog.tol[k];
      worst = std::max(worst, v);
      const double h = std::abs(ev.m[k]) - shrink * prog.tol[k];
      if (h > 0.0) penalty += h * h;
    }
    return worst;
  };
  ev.report.glm_direction = family_violation(0, prog.k_glm);
  if (prog.k_mu) ev.report.mu_direction = family_violation(prog.k_glm, prog.k_glm + 1);
  ev.report.augmented =
      family_violation(prog.k_glm + prog.k_mu, static_cast<int>(prog.a.cols()));

  const double m_shrunk = prog.m_pi * shrink;
  double wb = -std::numeric_limits<double>::infinity();
  if (!prog.plm) {
    for (int i = 0; i < n; ++i) {
      if (prog.T[i] == 0.0) continue;
      const double v = prog.T[i] / ev.pi[i];
      wb = std::max(wb, v - prog.m_pi);
      const double h = v - m_shrunk;
      if (h > 0.0) penalty += h * h;
    }
    if (!std::isfinite(wb)) wb = -prog.m_pi;  // no treated rows: bound holds trivially
  } else {
    for (int i = 0; i < n; ++i) {
      wb = std::max(wb, ev.pi[i] - prog.m_pi);
      const double h = ev.pi[i] - m_shrunk;
      if (h > 0.0) penalty += h * h;
    }
    // variance floor, enforced by rejection (no smooth penalty)
    const double var = ev.w.squaredNorm() / double(n);
    ev.report.variance_floor = 1.0 / prog.m_pi - var;
    // pi-direction moment
    ev.pi_norm = ev.pi.norm();
    ev.ps_m = ev.w.dot(ev.pi) / double(n);
    const double tol_s = prog.eta_pi1 * ev.pi_norm / std::sqrt(double(n));
    ev.report.ps_moment = std::abs(ev.ps_m) - tol_s;
    const double h = std::abs(ev.ps_m) - shrink * tol_s;
    if (h > 0.0) penalty += h * h;
  }
  ev.report.weight_bound = wb;
  ev.penalty = penalty;
  return ev;
}

Eigen::VectorXd penalty_gradient(const PsProgram& prog, const PsEval& ev) {
  const int n = prog.n;
  const int K = static_cast<int>(prog.a.cols());
  const double shrink = 1.0 - kToleranceMargin;

  // dP/dm_k for violated moment constraints
  Eigen::VectorXd av = Eigen::VectorXd::Zero(n);
  for (int k = 0; k < K; ++k) {
    const double h = std::abs(ev.m[k]) - shrink * prog.tol[k];
    if (h > 0.0) {
      const double g = 2.0 * h * (ev.m[k] > 0 ? 1.0 : -1.0);
      av += g * prog.a.col(k);
    }
  }

  Eigen::VectorXd rowfac(n);
  const double m_shrunk = prog.m_pi * shrink;
  for (int i = 0; i < n; ++i) {
    // dw/dz
    const double wprime = prog.plm ? -ev.dpi[i]
                                   : -prog.T[i] * ev.dpi[i] / (ev.pi[i] * ev.pi[i]);
    rowfac[i] = wprime * av[i] / double(n);
    if (!prog.plm) {
      if (prog.T[i] != 0.0) {
        const double v = prog.T[i] / ev.pi[i];
        const double h = v - m_shrunk;
        if (h > 0.0) rowfac[i] += 2.0 * h * (-ev.dpi[i] / (ev.pi[i] * ev.pi[i]));
      }
    } else {
      const double h = ev.pi[i] - m_shrunk;
      if (h > 0.0) rowfac[i] += 2.0 * h * ev.dpi[i];
    }
  }
  if (prog.plm) {
    const double tol_s = prog.eta_pi1 * ev.pi_norm / std::sqrt(double(n));
    const double h = std::abs(ev.ps_m) - shrink * tol_s;
    if (h > 0.0 && ev.pi_norm > 0.0) {
      const double sgn = ev.ps_m > 0 ? 1.0 : -1.0;
      const double c_tol = prog.eta_pi1 / (std::sqrt(double(n)) * ev.pi_norm);
      for (int i = 0; i < n; ++i) {
        const double dm = (prog.T[i] - 2.0 * ev.pi[i]) * ev.dpi[i] / double(n);
        rowfac[i] += 2.0 * h * (sgn * dm - c_tol * ev.pi[i] * ev.dpi[i]);
      }
    }
  }
  return prog.Xt->transpose() * rowfac;
}

bool certified_feasible(const PsEval& ev) { return ev.report.feasible(kPsCertTol); }

// Feasibility-preserving descent on the L1 objective: first shrink the whole
// shift toward the anchor along the segment, then pull individual
// coordinates back as far as the constraints allow. Every accepted move is
// re-certified against the true tolerances.
void pull_back_to_anchor(const PsProgram& prog, const Link& phi, const Eigen::VectorXd& anchor,
                         Eigen::VectorXd& gamma, PsEval& ev) {
  auto feasible_at = [&](const Eigen::VectorXd& g, PsEval& out) {
    out = evaluate(prog, phi, g);
    return certified_feasible(out);
  };

  // segment bisection: smallest feasible t on anchor + t (gamma - anchor)
  {
    const Eigen::VectorXd dir = gamma - anchor;
    if (dir.lpNorm<1>() > 0.0) {
      double lo = 0.0, hi = 1.0;  // hi feasible, lo (anchor) not
      PsEval tmp;
      for (int it = 0; it < 20; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (feasible_at(anchor + mid * dir, tmp)) {
          hi = mid;
        } else {
          lo = mid;
        }
      }
      PsEval at_hi;
      if (hi < 1.0 && feasible_at(anchor + hi * dir, at_hi)) {
        gamma = anchor + hi * dir;
        ev = std::move(at_hi);
      }
    }
  }

  // coordinate pullback, largest shifts first, fractional fallbacks
  for (int pass = 0; pass < 2; ++pass) {
    std::vector<std::pair<double, int>> order;
    for (int j = 0; j < gamma.size(); ++j) {
      const double gap = std::abs(gamma[j] - anchor[j]);
      if (gap > 1e-12) order.emplace_back(gap, j);
    }
    if (order.empty()) break;
    std::sort(order.rbegin(), order.rend());
    if (order.size() > 200) order.resize(200);
    bool any = false;
    PsEval tmp;
    for (const auto& [gap, j] : order) {
      for (double frac : {1.0, 0.5, 0.25}) {
        Eigen::VectorXd trial = gamma;
        trial[j] -= frac * (gamma[j] - anchor[j]);
        if (feasible_at(trial, tmp)) {
          gamma = std::move(trial);
          ev = tmp;
          any = true;
          break;
        }
      }
    }
    if (!any) break;
  }

  // Pairwise exchange for small programs: shrink one shifted coordinate while
  // compensating with another, accepting feasible moves that strictly reduce
  // the L1 objective. Slides along constraint boundaries that single-
  // coordinate moves cannot follow.
  if (gamma.size() <= 32) {
    auto objective = [&](const Eigen::VectorXd& g) { return (g - anchor).lpNorm<1>(); };
    PsEval tmp;
    for (int pass = 0; pass < 40; ++pass) {
      bool improved = false;
      for (int j = 0; j < gamma.size(); ++j) {
        const double shift_j = gamma[j] - anchor[j];
        if (std::abs(shift_j) < 1e-10) continue;
        for (double h : {0.4, 0.2, 0.1, 0.05, 0.02}) {
          if (std::abs(shift_j) < h) continue;
          bool accepted = false;
          for (int k = 0; k < gamma.size() && !accepted; ++k) {
            if (k == j) continue;
            for (double dir : {1.0, -1.0}) {
              Eigen::VectorXd trial = gamma;
              trial[j] -= h * (shift_j > 0 ? 1.0 : -1.0);
              trial[k] += dir * h;
              if (objective(trial) < objective(gamma) - 1e-10 && feasible_at(trial, tmp)) {
                gamma = std::move(trial);
                ev = tmp;
                improved = true;
                accepted = true;
                break;
              }
            }
          }
          if (accepted) break;
        }
      }
      if (!improved) break;
    }
  }
}

struct StartResult {
  Eigen::VectorXd gamma;
  PsEval eval;
  double objective = std::numeric_limits<double>::infinity();
  bool found = false;
  int iters = 0;
};

// Penalty continuation with proximal subgradient steps from one start point.
// Tracks the best feasibility-certified iterate (by L1 objective).
StartResult run_start(const PsProgram& prog, const Link& phi, const Eigen::VectorXd& anchor,
                      const Eigen::VectorXd& start) {
  StartResult best;
  Eigen::VectorXd gamma = start;
  PsEval ev = evaluate(prog, phi, gamma);
  auto consider = [&](const Eigen::VectorXd& g, const PsEval& e) {
    if (!certified_feasible(e)) return;
    const double obj = (g - anchor).lpNorm<1>();
    if (obj < best.objective) {
      best.objective = obj;
      best.gamma = g;
      best.eval = e;
      best.found = true;
    }
  };
  consider(gamma, ev);

  const double mean_tol = std::max(prog.tol.mean(), 1e-8);
  double rho = 10.0 / (mean_tol * mean_tol);
  double step = 1.0 / rho;
  int iters = 0;

  for (int round = 0; round < kRounds && iters < kIterCapPerStart; ++round, rho *= 10.0) {
    const double best_before = best.found ? best.objective : std::numeric_limits<double>::infinity();
    const int round_cap = kIterCapPerStart / kRounds;
    for (int it = 0; it < round_cap && iters < kIterCapPerStart; ++it, ++iters) {
      if (ev.penalty == 0.0) break;  // strictly inside the shrunk set: a local optimum
      const Eigen::VectorXd grad = rho * penalty_gradient(prog, ev);
      bool accepted = false;
      for (int bt = 0; bt < 25; ++bt) {
        // prox of step * ||. - anchor||_1 after the gradient step
        Eigen::VectorXd trial = gamma - step * grad;
        for (int j = 0; j < trial.size(); ++j) {
          const double delta = trial[j] - anchor[j];
          trial[j] = anchor[j] +
                     (delta > step ? delta - step : (delta < -step ? delta + step : 0.0));
        }
        PsEval trial_ev = evaluate(prog, phi, trial);
        const Eigen::VectorXd diff = trial - gamma;
        const double quad = rho * ev.penalty + grad.dot(diff) +
                            diff.squaredNorm() / (2.0 * step);
        if (rho * trial_ev.penalty <= quad + 1e-14 * (1.0 + std::abs(quad))) {
          const double move = diff.lpNorm<Eigen::Infinity>();
          gamma = std::move(trial);
          ev = std::move(trial_ev);
          consider(gamma, ev);
          accepted = true;
          step *= 1.25;
          if (move < 1e-10) it = round_cap;  // converged within round
          break;
        }
        step *= 0.5;
        if (step < 1e-18) break;
      }
      if (!accepted) break;
    }
    // Stop escalating once a certified point exists and stopped improving.
    if (best.found && best.objective >= best_before - 1e-6 && round > 0) break;
  }
  best.iters = iters;
  return best;
}

PsCalibration solve_ps(const Dataset& main, const AugmentedDesign& aug,
                       const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& gamma_hat,
                       const Eigen::VectorXd& mu_hat, const Link& phi, const Link& psi,
                       const ResolvedTuning& tuning, bool plm) {
  const PsProgram prog = build_program(main, aug, beta_hat, mu_hat, psi, tuning, plm);
  const Eigen::VectorXd anchor = pad_gamma(gamma_hat, prog.d);

  PsCalibration out;
  out.gamma_tilde = anchor;

  // The anchor is the global optimum whenever it is feasible.
  PsEval anchor_ev = evaluate(prog, phi, anchor);
  if (certified_feasible(anchor_ev)) {
    out.feasible = true;
    out.fell_back = false;
    out.constraint_report = anchor_ev.report;
    out.objective = 0.0;
    out.start_index = 0;
    return out;
  }

  CounterRng rng(aug.synth_seed, /*stream=*/0x50535054ULL);  // "PSPT"
  Eigen::VectorXd perturbed = anchor;
  for (int j = 0; j < perturbed.size(); ++j) perturbed[j] += rng.uniform(-0.01, 0.01);

  std::vector<Eigen::VectorXd> starts = {anchor, Eigen::VectorXd::Zero(prog.d), perturbed};
  // Constraint-restoration start: one minimum-norm Gauss-Newton step from the
  // anchor onto the violated moment boundaries. Reaches basins (often along
  // the synthetic coordinates) that the plain anchor descent can miss.
  {
    std::vector<int> viol;
    for (int k = 0; k < prog.a.cols(); ++k)
      if (std::abs(anchor_ev.m[k]) > prog.tol[k]) viol.push_back(k);
    if (!viol.empty() && viol.size() <= 400) {
      Eigen::VectorXd wprime(prog.n);
      for (int i = 0; i < prog.n; ++i)
        wprime[i] = plm ? -anchor_ev.dpi[i]
                        : -prog.T[i] * anchor_ev.dpi[i] / (anchor_ev.pi[i] * anchor_ev.pi[i]);
      Eigen::MatrixXd J(viol.size(), prog.d);
      Eigen::VectorXd delta_m(viol.size());
      for (std::size_t r = 0; r < viol.size(); ++r) {
        const int k = viol[r];
        J.row(r) =
            (prog.a.col(k).cwiseProduct(wprime).transpose() * (*prog.Xt)) / double(prog.n);
        const double sgn = anchor_ev.m[k] > 0 ? 1.0 : -1.0;
        delta_m[r] = sgn * 0.5 * prog.tol[k] - anchor_ev.m[k];
      }
      const Eigen::VectorXd step = J.completeOrthogonalDecomposition().solve(delta_m);
      if (step.allFinite()) starts.push_back(anchor + step);
    }
  }
  // Wider seeded starts, budgeted by dimension: tiny programs get a global
  // sweep, production-sized ones stay anchor-centered.
  {
    const int extra = std::clamp(256 / std::max(prog.d, 1), 0, 8);
    for (int k = 0; k < extra; ++k) {
      const double radius = (k % 2 == 0) ? 1.0 : 2.5;
      Eigen::VectorXd s = (k < extra / 2) ? anchor : Eigen::VectorXd::Zero(prog.d);
      for (int j = 0; j < prog.d; ++j) s[j] += rng.uniform(-radius, radius);
      starts.push_back(std::move(s));
    }
  }
  // Coarse lattice scan on very small programs: certified lattice points with
  // the smallest L1 shift seed the local searches inside their own basins.
  if (prog.d <= 6) {
    const double step = prog.d <= 4 ? 0.5 : 1.0;
    std::vector<double> axis;
    for (double v = -3.0; v <= 3.0 + 1e-12; v += step) axis.push_back(v);
    const int m = static_cast<int>(axis.size());
    std::vector<std::pair<double, Eigen::VectorXd>> certified;
    Eigen::VectorXd g(prog.d);
    std::vector<int> idx(prog.d, 0);
    while (true) {
      for (int k = 0; k < prog.d; ++k) g[k] = axis[idx[k]];
      if (certified_feasible(evaluate(prog, phi, g)))
        certified.emplace_back((g - anchor).lpNorm<1>(), g);
      int k = 0;
      while (k < prog.d && ++idx[k] == m) idx[k++] = 0;
      if (k == prog.d) break;
    }
    std::sort(certified.begin(), certified.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t k = 0; k < certified.size() && k < 4; ++k)
      starts.push_back(certified[k].second);
  }

  StartResult winner;
  int winner_start = -1;
  int total_iters = 0;
  for (std::size_t s = 0; s < starts.size(); ++s) {
    StartResult res = run_start(prog, phi, anchor, starts[s]);
    total_iters += res.iters;
    // strict improvement required, so ties keep the earlier start
    if (res.found && (winner_start < 0 || res.objective < winner.objective)) {
      winner = std::move(res);
      winner_start = static_cast<int>(s);
    }
  }
  out.n_iter = total_iters;

  if (winner_start >= 0) {
    pull_back_to_anchor(prog, phi, anchor, winner.gamma, winner.eval);
    out.gamma_tilde = winner.gamma;
    out.feasible = true;
    out.fell_back = false;
    out.constraint_report = winner.eval.report;
    out.objective = (winner.gamma - anchor).lpNorm<1>();
    out.start_index = winner_start;
    return out;
  }

  // No certified point: fall back to the padded anchor.
  out.feasible = false;
  out.fell_back = true;
  out.constraint_report = anchor_ev.report;
  out.objective = 0.0;
  out.start_index = -1;
  return out;
}

}  // namespace

PsCalibration calibrate_ps(const Dataset& main, const AugmentedDesign& aug,
                           const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& gamma_hat,
                           const Eigen::VectorXd& mu_hat, const Link& phi, const Link& psi,
                           const ResolvedTuning& tuning) {
  return solve_ps(main, aug, beta_hat, gamma_hat, mu_hat, phi, psi, tuning, false);
}

PsCalibration calibrate_ps_plm(const Dataset& main, const AugmentedDesign& aug,
                               const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& gamma_hat,
                               const Eigen::VectorXd& mu_hat, const Link& phi, const Link& psi,
                               const ResolvedTuning& tuning) {
  return solve_ps(main, aug, beta_hat, gamma_hat, mu_hat, phi, psi, tuning, true);
}

PsConstraintReport feasibility_report(const Eigen::VectorXd& gamma, const Dataset& main,
                                      const AugmentedDesign& aug, const Eigen::VectorXd& beta_hat,
                                      const Eigen::VectorXd& mu_hat, const Link& phi,
                                      const Link& psi, const ResolvedTuning& tuning, bool plm) {
  const PsProgram prog = build_program(main, aug, beta_hat, mu_hat, psi, tuning, plm);
  if (gamma.size() != prog.d) throw invalid_config_error("feasibility_report: gamma length");
  return evaluate(prog, phi, gamma).report;
}

struct PsFeasibilityChecker::Impl {
  Eigen::MatrixXd x_tilde;  // owned copy: the program keeps a pointer into it
  PsProgram prog;
  const Link* phi;
};

PsFeasibilityChecker::PsFeasibilityChecker(const Dataset& main, const AugmentedDesign& aug,
                                           const Eigen::VectorXd& beta_hat,
                                           const Eigen::VectorXd& mu_hat, const Link& phi,
                                           const Link& psi, const ResolvedTuning& tuning,
                                           bool plm)
    : impl_(new Impl{aug.x_tilde, build_program(main, aug, beta_hat, mu_hat, psi, tuning, plm),
                     &phi}) {
  impl_->prog.Xt = &impl_->x_tilde;
}

PsFeasibilityChecker::~PsFeasibilityChecker() = default;
PsFeasibilityChecker::PsFeasibilityChecker(PsFeasibilityChecker&&) noexcept = default;
PsFeasibilityChecker& PsFeasibilityChecker::operator=(PsFeasibilityChecker&&) noexcept = default;

PsConstraintReport PsFeasibilityChecker::report(const Eigen::VectorXd& gamma) const {
  if (gamma.size() != impl_->prog.d)
    throw invalid_config_error("PsFeasibilityChecker: gamma length");
  return evaluate(impl_->prog, *impl_->phi, gamma).report;
}

}  // namespace dcal
