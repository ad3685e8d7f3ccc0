#include "dcal/dgp.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "dcal/errors.hpp"
#include "dcal/math_util.hpp"
#include "dcal/rng.hpp"

namespace dcal {

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::sparse_or_dense_ps: return "sparse_or_dense_ps";
    case Regime::sparse_ps_dense_or: return "sparse_ps_dense_or";
    case Regime::both_sparse: return "both_sparse";
    case Regime::approx_sparse_or: return "approx_sparse_or";
    case Regime::approx_sparse_ps: return "approx_sparse_ps";
    case Regime::plm_sparse_or: return "plm_sparse_or";
    case Regime::plm_sparse_ps: return "plm_sparse_ps";
  }
  return "?";
}

Regime regime_from_name(const std::string& name) {
  for (Regime r : {Regime::sparse_or_dense_ps, Regime::sparse_ps_dense_or, Regime::both_sparse,
                   Regime::approx_sparse_or, Regime::approx_sparse_ps, Regime::plm_sparse_or,
                   Regime::plm_sparse_ps})
    if (name == regime_name(r)) return r;
  throw invalid_config_error(
      "unknown regime '" + name +
      "' (expected sparse_or_dense_ps|sparse_ps_dense_or|both_sparse|approx_sparse_or|"
      "approx_sparse_ps|plm_sparse_or|plm_sparse_ps)");
}

bool regime_is_plm(Regime r) {
  return r == Regime::plm_sparse_or || r == Regime::plm_sparse_ps;
}

void DgpConfig::validate() const {
  if (n < 1 || n_aux < 1 || n_tr < 1) throw invalid_config_error("dgp: split sizes must be >= 1");
  if (p < 2) throw invalid_config_error("dgp: p must be >= 2");
  if (s_r > p - 1 || s_pi > p - 1)
    throw invalid_config_error("dgp: sparsity must not exceed p - 1");
  if (s_r < 1 || s_pi < 1) throw invalid_config_error("dgp: sparsity must be >= 1");
  if (!(c_pi > 0.0 && c_pi < 0.5)) throw invalid_config_error("dgp: c_pi must lie in (0, 0.5)");
  if (!(noise_sd >= 0.0)) throw invalid_config_error("dgp: noise_sd must be nonnegative");
  if (!(xi_r > 0.0 && xi_pi > 0.0)) throw invalid_config_error("dgp: xi must be positive");
  if (!(covariate_rho >= 0.0 && covariate_rho < 1.0))
    throw invalid_config_error("dgp: covariate_rho must lie in [0, 1)");
  if (!std::isfinite(tau_star)) throw invalid_config_error("dgp: tau_star must be finite");
}

namespace {

constexpr double kZClip = 2.0;     // covariate entries clipped to [-2, 2]
constexpr double kNoiseClipSd = 3.0;

// Variance of clip(N(0, sd^2), +-3 sd).
double clipped_normal_var(double sd) {
  const double c = kNoiseClipSd;
  const double factor =
      (2.0 * norm_cdf(c) - 1.0) - 2.0 * c * norm_pdf(c) + 2.0 * c * c * (1.0 - norm_cdf(c));
  return sd * sd * factor;
}

// Dense weights w_j propto j^{-0.1}, normalized to ||w||_2 = 1.
Eigen::VectorXd dense_weights(int m) {
  Eigen::VectorXd w(m);
  for (int j = 0; j < m; ++j) w[j] = std::pow(static_cast<double>(j + 1), -0.1);
  w /= w.norm();
  return w;
}

struct NuisanceSpec {
  bool or_glm = false;        // r* = psi(X beta*) with beta_star below
  bool ps_glm = false;        // pi* from the clipped logit index of gamma_star
  Eigen::VectorXd beta_star;  // length p when or_glm
  Eigen::VectorXd gamma_star; // length p when ps_glm
};

// Exact-sparse coefficients: alternating +-amp on the first s covariates.
Eigen::VectorXd sparse_coef(int p, int s, double amp, double intercept) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
  b[0] = intercept;
  for (int j = 0; j < s; ++j) b[j + 1] = (j % 2 == 0 ? amp : -amp);
  return b;
}

// Approximately sparse coefficients: alternating sign, magnitude j^-(xi+1/2),
// so the s-term L2 tail decays at rate s^-xi.
Eigen::VectorXd approx_sparse_coef(int p, double xi, double intercept) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
  b[0] = intercept;
  for (int j = 1; j < p; ++j)
    b[j] = (j % 2 == 1 ? 1.0 : -1.0) * std::pow(static_cast<double>(j), -(xi + 0.5));
  return b;
}

NuisanceSpec make_nuisance_spec(const DgpConfig& cfg) {
  NuisanceSpec s;
  switch (cfg.regime) {
    case Regime::sparse_or_dense_ps:
    case Regime::plm_sparse_or:
      s.or_glm = true;
      s.beta_star = sparse_coef(cfg.p, cfg.s_r, 1.0, 0.5);
      break;
    case Regime::sparse_ps_dense_or:
    case Regime::plm_sparse_ps:
      s.ps_glm = true;
      s.gamma_star = sparse_coef(cfg.p, cfg.s_pi, 0.5, 0.0);
      break;
    case Regime::both_sparse:
      s.or_glm = true;
      s.ps_glm = true;
      s.beta_star = sparse_coef(cfg.p, cfg.s_r, 1.0, 0.5);
      s.gamma_star = sparse_coef(cfg.p, cfg.s_pi, 0.5, 0.0);
      break;
    case Regime::approx_sparse_or:
      s.or_glm = true;
      s.beta_star = approx_sparse_coef(cfg.p, cfg.xi_r, 0.5);
      break;
    case Regime::approx_sparse_ps:
      s.ps_glm = true;
      s.gamma_star = approx_sparse_coef(cfg.p, cfg.xi_pi, 0.0);
      break;
  }
  return s;
}

struct SplitTruth {
  Eigen::VectorXd r_star;
  Eigen::VectorXd pi_star;
};

// One split worth of data. Streams are separated per (seed, split tag,
// purpose) so each variable has its own deterministic substream.
Dataset generate_split(const DgpConfig& cfg, const NuisanceSpec& spec, std::uint64_t seed,
                       std::uint64_t split_tag, int rows, SplitTruth* truth) {
  const int p = cfg.p;
  const int m = p - 1;
  CounterRng rng_z(CounterRng::derive(seed, split_tag, 1));
  CounterRng rng_t(CounterRng::derive(seed, split_tag, 2));
  CounterRng rng_e(CounterRng::derive(seed, split_tag, 3));

  Dataset d;
  d.treatment_kind = regime_is_plm(cfg.regime) ? TreatmentKind::continuous : TreatmentKind::binary;
  d.X.resize(rows, p);
  d.T.resize(rows);
  d.Y.resize(rows);

  const Eigen::VectorXd w = dense_weights(m);
  const double lo = logit(cfg.c_pi) + 1e-9;
  const double hi = logit(1.0 - cfg.c_pi) - 1e-9;

  Eigen::VectorXd r_star(rows), pi_star(rows);

  for (int i = 0; i < rows; ++i) {
    // AR(1) covariates, entrywise clipped.
    double z_prev = rng_z.normal();
    d.X(i, 0) = 1.0;
    d.X(i, 1) = std::clamp(z_prev, -kZClip, kZClip);
    const double ar_sd = std::sqrt(1.0 - cfg.covariate_rho * cfg.covariate_rho);
    for (int j = 1; j < m; ++j) {
      z_prev = cfg.covariate_rho * z_prev + ar_sd * rng_z.normal();
      d.X(i, j + 1) = std::clamp(z_prev, -kZClip, kZClip);
    }

    const auto z = d.X.row(i).segment(1, m);
    const double sinarg = z.dot(w);

    // Outcome regression truth.
    double r;
    if (spec.or_glm) {
      r = d.X.row(i).dot(spec.beta_star);  // identity OR link in the designs
    } else {
      r = std::sin(sinarg) + 0.5 * ((d.X(i, 1) * d.X(i, 2) > 0.0) ? 1.0 : 0.0);
    }
    r_star[i] = r;

    // Propensity truth.
    double pi;
    if (spec.ps_glm) {
      pi = expit(std::clamp(d.X.row(i).dot(spec.gamma_star), lo, hi));
    } else {
      pi = std::clamp(0.5 + 0.4 * std::sin(sinarg), cfg.c_pi + 1e-12, 1.0 - cfg.c_pi - 1e-12);
    }
    pi_star[i] = pi;

    if (regime_is_plm(cfg.regime)) {
      const double e = rng_t.clipped_normal(kPlmTreatmentNoiseSd,
                                            kNoiseClipSd * kPlmTreatmentNoiseSd);
      const double eps = rng_e.clipped_normal(cfg.noise_sd, kNoiseClipSd * cfg.noise_sd);
      d.T[i] = pi + e;
      d.Y[i] = d.T[i] * cfg.tau_star + r + eps;
    } else {
      const double t = (rng_t.uniform() < pi) ? 1.0 : 0.0;
      const double eps1 = rng_e.clipped_normal(cfg.noise_sd, kNoiseClipSd * cfg.noise_sd);
      const double eps0 = rng_e.clipped_normal(cfg.noise_sd, kNoiseClipSd * cfg.noise_sd);
      const double y1 = r + eps1;
      const double y0 = eps0;  // Y(0) is pure noise; only E[Y(1)] is targeted
      d.T[i] = t;
      d.Y[i] = t * y1 + (1.0 - t) * y0;
    }
  }

  if (truth) {
    truth->r_star = std::move(r_star);
    truth->pi_star = std::move(pi_star);
  }
  return d;
}

}  // namespace

std::pair<SplitData, DgpTruth> generate(const DgpConfig& config, std::uint64_t seed) {
  config.validate();
  const NuisanceSpec spec = make_nuisance_spec(config);

  SplitData split;
  SplitTruth main_truth;
  split.main = generate_split(config, spec, seed, 0, config.n, &main_truth);
  split.aux = generate_split(config, spec, seed, 1, config.n_aux, nullptr);
  split.train = generate_split(config, spec, seed, 2, config.n_tr, nullptr);

  DgpTruth truth;
  truth.r_star = std::move(main_truth.r_star);
  truth.pi_star = std::move(main_truth.pi_star);
  truth.tau_bar_star = truth.r_star.mean();
  if (spec.or_glm) truth.beta_star = spec.beta_star;
  if (spec.ps_glm) truth.gamma_star = spec.gamma_star;
  truth.eps_var = clipped_normal_var(config.noise_sd);
  return {std::move(split), std::move(truth)};
}

PopulationTau population_tau(const DgpConfig& config, std::uint64_t seed_stream, int reps) {
  if (reps < 1) throw invalid_config_error("population_tau: reps must be >= 1");
  std::vector<double> taus(reps);
  for (int r = 0; r < reps; ++r)
    taus[r] = generate(config, CounterRng::derive(seed_stream, static_cast<std::uint64_t>(r)))
                  .second.tau_bar_star;
  PopulationTau out;
  out.mean = pairwise_mean(taus);
  if (reps == 1) {
    out.mc_se = 0.0;
  } else {
    double ss = 0.0;
    for (double t : taus) ss += (t - out.mean) * (t - out.mean);
    out.mc_se = std::sqrt(ss / double(reps - 1) / double(reps));
  }
  return out;
}

}  // namespace dcal
