#include "dcal/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dcal/errors.hpp"
#include "dcal/math_util.hpp"

namespace dcal {

const char* estimator_name(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::dml: return "dml";
    case EstimatorKind::scal_r: return "scal";
    case EstimatorKind::dcal: return "dcal";
    case EstimatorKind::dcal_plm: return "dcal-plm";
    case EstimatorKind::oracle: return "oracle";
  }
  return "?";
}

EstimatorKind estimator_from_name(const std::string& name) {
  if (name == "dml") return EstimatorKind::dml;
  if (name == "scal" || name == "scal_r") return EstimatorKind::scal_r;
  if (name == "dcal") return EstimatorKind::dcal;
  if (name == "dcal-plm" || name == "dcal_plm") return EstimatorKind::dcal_plm;
  if (name == "oracle") return EstimatorKind::oracle;
  throw invalid_config_error("unknown estimator '" + name +
                             "' (expected dml|scal|dcal|dcal-plm|oracle)");
}

double aipw_score(double t, double y, double pi, double r) {
  if (!(pi > 0.0 && pi <= 1.0) || !std::isfinite(pi))
    throw numeric_error("aipw_score: pi must lie in (0,1]");
  if (t == 0.0) return r;
  return t / pi * (y - r) + r;
}

std::pair<double, double> confidence_interval(double tau_hat, double se, double level) {
  if (!(level > 0.0 && level < 1.0))
    throw invalid_config_error("confidence_interval: level must lie in (0,1)");
  if (se < 0.0) throw numeric_error("confidence_interval: negative se");
  const double z = norm_quantile(1.0 - (1.0 - level) / 2.0);
  return {tau_hat - z * se, tau_hat + z * se};
}

namespace {

struct ScoreSummary {
  double mean;
  double se;  // sd / sqrt(n), sample sd with n-1 divisor
};

ScoreSummary summarize_scores(const Eigen::VectorXd& h) {
  const int n = static_cast<int>(h.size());
  ScoreSummary s;
  s.mean = h.mean();
  if (n < 2) {
    s.se = 0.0;
    return s;
  }
  const double ss = (h.array() - s.mean).square().sum() / double(n - 1);
  s.se = std::sqrt(std::max(ss, 0.0) / double(n));
  return s;
}

EstimateReport report_from_scores(EstimatorKind kind, const Eigen::VectorXd& h, double level) {
  const ScoreSummary s = summarize_scores(h);
  EstimateReport r;
  r.estimator_kind = kind;
  r.tau_hat = s.mean;
  r.se = s.se;
  r.ci = confidence_interval(s.mean, s.se, level);
  r.n_used = static_cast<int>(h.size());
  return r;
}

Eigen::VectorXd aipw_scores(const Dataset& main, const Eigen::VectorXd& pi,
                            const Eigen::VectorXd& r) {
  Eigen::VectorXd h(main.n());
  for (int i = 0; i < main.n(); ++i) h[i] = aipw_score(main.T[i], main.Y[i], pi[i], r[i]);
  return h;
}

// pi_tilde = phi(x_tilde' gamma_tilde). When the synthetic coordinates of
// gamma_tilde are exactly zero the index is computed on the original columns,
// which keeps the padding identity bit-exact.
Eigen::VectorXd ps_from_gamma(const Dataset& main, const AugmentedDesign& aug,
                              const Eigen::VectorXd& gamma_tilde, const Link& phi) {
  const int p = main.p();
  const bool tail_zero =
      gamma_tilde.size() <= p || gamma_tilde.tail(gamma_tilde.size() - p).isZero(0.0);
  const Eigen::VectorXd eta =
      tail_zero ? (main.X * gamma_tilde.head(p)).eval() : (aug.x_tilde * gamma_tilde).eval();
  Eigen::VectorXd pi(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i)
    pi[i] = std::clamp(phi.value(eta[i]), 1e-12, 1.0 - 1e-12);
  return pi;
}

}  // namespace

EstimateReport estimate_dml(const Dataset& main, const NuisanceEstimates& fits,
                            const ResolvedTuning& tuning) {
  const TrimmedPs ps =
      estimate_pi_hat(main.X, fits.ps_fit.coef, fits.ps_fit.link, tuning.m_gamma);
  const Eigen::VectorXd r_hat = eval_link_vector(fits.or_fit.link, main.X * fits.or_fit.coef);
  EstimateReport rep =
      report_from_scores(EstimatorKind::dml, aipw_scores(main, ps.pi_hat, r_hat), tuning.level);
  rep.diagnostics.trimmed_count = ps.trimmed_count();
  return rep;
}

EstimateReport estimate_scal_r(const SplitData& split, const NuisanceEstimates& fits,
                               const ResolvedTuning& tuning) {
  const QpInputs qp = build_qp_inputs(split.main, split.aux, fits.or_fit.coef, fits.ps_fit.coef,
                                      fits.or_fit.link, fits.ps_fit.link, tuning.m_gamma);
  const OrCalibration or_cal = calibrate_or(qp, tuning);
  const Eigen::VectorXd r_tilde = qp.r_hat + or_cal.mu;
  EstimateReport rep = report_from_scores(
      EstimatorKind::scal_r, aipw_scores(split.main, qp.ps_main.pi_hat, r_tilde), tuning.level);
  rep.diagnostics.mu_norm2 = or_cal.mu.norm();
  rep.diagnostics.escalations = or_cal.escalations;
  rep.diagnostics.or_feasible = or_cal.feasible;
  rep.diagnostics.trimmed_count = qp.ps_main.trimmed_count();
  return rep;
}

DcalDetail estimate_dcal_detailed(const SplitData& split, const NuisanceEstimates& fits,
                                  const ResolvedTuning& tuning, std::uint64_t synth_seed) {
  DcalDetail d;
  d.qp = build_qp_inputs(split.main, split.aux, fits.or_fit.coef, fits.ps_fit.coef,
                         fits.or_fit.link, fits.ps_fit.link, tuning.m_gamma);
  d.or_cal = calibrate_or(d.qp, tuning);
  d.r_tilde = d.qp.r_hat + d.or_cal.mu;

  d.aug = augment_covariates(split.main.X, synth_seed);
  d.ps_cal = calibrate_ps(split.main, d.aug, fits.or_fit.coef, fits.ps_fit.coef, d.or_cal.mu,
                          fits.ps_fit.link, fits.or_fit.link, tuning);
  d.pi_tilde = ps_from_gamma(split.main, d.aug, d.ps_cal.gamma_tilde, fits.ps_fit.link);

  d.report = report_from_scores(EstimatorKind::dcal, aipw_scores(split.main, d.pi_tilde, d.r_tilde),
                                tuning.level);
  d.report.diagnostics.mu_norm2 = d.or_cal.mu.norm();
  d.report.diagnostics.gamma_shift_l1 = d.ps_cal.objective;
  d.report.diagnostics.fell_back = d.ps_cal.fell_back;
  d.report.diagnostics.or_feasible = d.or_cal.feasible;
  d.report.diagnostics.escalations = d.or_cal.escalations;
  d.report.diagnostics.trimmed_count = d.qp.ps_main.trimmed_count();
  return d;
}

EstimateReport estimate_dcal(const SplitData& split, const NuisanceEstimates& fits,
                             const ResolvedTuning& tuning, std::uint64_t synth_seed) {
  return estimate_dcal_detailed(split, fits, tuning, synth_seed).report;
}

DcalDetail estimate_dcal_plm_detailed(const SplitData& split, const NuisanceEstimates& fits,
                                      const ResolvedTuning& tuning, std::uint64_t synth_seed) {
  if (!std::isfinite(fits.tau_init))
    throw invalid_config_error("estimate_dcal_plm: missing initial tau estimate");
  const Dataset& main = split.main;

  DcalDetail d;
  d.qp = build_qp_inputs_plm(main, split.aux, fits.or_fit.coef, fits.ps_fit.coef, fits.tau_init,
                             fits.or_fit.link, fits.ps_fit.link, tuning.m_gamma);
  d.or_cal = calibrate_or(d.qp, tuning);
  d.r_tilde = d.qp.r_hat + d.or_cal.mu;  // r_hat + mu, kept separate from tau correction

  d.aug = augment_covariates(main.X, synth_seed);
  d.ps_cal = calibrate_ps_plm(main, d.aug, fits.or_fit.coef, fits.ps_fit.coef, d.or_cal.mu,
                              fits.ps_fit.link, fits.or_fit.link, tuning);
  d.pi_tilde = ps_from_gamma(main, d.aug, d.ps_cal.gamma_tilde, fits.ps_fit.link);

  const int n = main.n();
  const Eigen::VectorXd resid = main.T - d.pi_tilde;
  const double sigma_e2 = resid.squaredNorm() / double(n);
  Eigen::VectorXd scores(n);
  for (int i = 0; i < n; ++i)
    scores[i] =
        resid[i] * (main.Y[i] - main.T[i] * fits.tau_init - d.r_tilde[i]) / sigma_e2;

  const ScoreSummary s = summarize_scores(scores);
  EstimateReport rep;
  rep.estimator_kind = EstimatorKind::dcal_plm;
  rep.tau_hat = fits.tau_init + s.mean;
  rep.se = s.se;
  rep.n_used = n;
  rep.diagnostics.mu_norm2 = d.or_cal.mu.norm();
  rep.diagnostics.gamma_shift_l1 = d.ps_cal.objective;
  rep.diagnostics.fell_back = d.ps_cal.fell_back;
  rep.diagnostics.or_feasible = d.or_cal.feasible;
  rep.diagnostics.escalations = d.or_cal.escalations;
  rep.diagnostics.trimmed_count = d.qp.ps_main.trimmed_count();
  rep.diagnostics.sigma_e_tilde2 = sigma_e2;
  if (sigma_e2 < 1.0 / tuning.m_pi) {
    // Degenerate variance: keep the point estimate, flag the report.
    rep.diagnostics.degenerate_variance = true;
    rep.se = std::numeric_limits<double>::infinity();
    rep.ci = {-std::numeric_limits<double>::infinity(),
              std::numeric_limits<double>::infinity()};
  } else {
    rep.ci = confidence_interval(rep.tau_hat, rep.se, tuning.level);
  }
  d.report = rep;
  return d;
}

EstimateReport estimate_dcal_plm(const SplitData& split, const NuisanceEstimates& fits,
                                 const ResolvedTuning& tuning, std::uint64_t synth_seed) {
  return estimate_dcal_plm_detailed(split, fits, tuning, synth_seed).report;
}

EstimateReport estimate_oracle(const Dataset& main, const Eigen::VectorXd& pi_star,
                               const Eigen::VectorXd& r_star, double level) {
  return report_from_scores(EstimatorKind::oracle, aipw_scores(main, pi_star, r_star), level);
}

OracleVariances oracle_variances(const Eigen::VectorXd& t, const Eigen::VectorXd& pi_star,
                                 const Eigen::VectorXd& pi_tilde, const Eigen::VectorXd& r_star,
                                 const Eigen::VectorXd& r_tilde, double eps_var) {
  const int n = static_cast<int>(t.size());
  OracleVariances v{0.0, 0.0, 0.0};
  for (int i = 0; i < n; ++i) {
    v.sigma_bar_r2 += t[i] * eps_var / (pi_tilde[i] * pi_tilde[i]);
    v.sigma_bar_pi2 += eps_var / pi_star[i];
    const double dr = r_star[i] - r_tilde[i];
    v.sigma_mu2 += (1.0 - pi_star[i]) * dr * dr / pi_star[i];
  }
  v.sigma_bar_r2 /= double(n);
  v.sigma_bar_pi2 /= double(n);
  v.sigma_mu2 /= double(n);
  return v;
}

}  // namespace dcal
