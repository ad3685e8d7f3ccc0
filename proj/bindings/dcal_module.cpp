// Python bindings for the dcal core: dataset handling, sample splitting,
// lasso nuisance fits, the calibration programs, estimators, DGPs, and the
// Monte Carlo harness.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "dcal/csv.hpp"
#include "dcal/dgp.hpp"
#include "dcal/errors.hpp"
#include "dcal/estimators.hpp"
#include "dcal/pipeline.hpp"
#include "dcal/rng.hpp"
#include "dcal/simulation.hpp"
#include "dcal/version.hpp"

namespace py = pybind11;
using namespace dcal;

namespace {

Dataset make_dataset(const Eigen::MatrixXd& x, const Eigen::VectorXd& t, const Eigen::VectorXd& y,
                     const std::string& treatment_kind) {
  Dataset d;
  d.X.resize(x.rows(), x.cols() + 1);
  d.X.col(0).setOnes();
  d.X.rightCols(x.cols()) = x;
  d.T = t;
  d.Y = y;
  d.treatment_kind =
      treatment_kind == "continuous" ? TreatmentKind::continuous : TreatmentKind::binary;
  d.validate();
  return d;
}

Response response_from_name(const std::string& name) {
  if (name == "outcome_on_treated") return Response::outcome_on_treated;
  if (name == "treatment") return Response::treatment;
  if (name == "outcome_all") return Response::outcome_all;
  throw invalid_config_error("unknown response '" + name + "'");
}

py::dict fit_to_dict(const NuisanceFit& f) {
  py::dict d;
  d["coef"] = f.coef;
  d["lambda"] = f.lambda;
  d["n_iter"] = f.n_iter;
  d["converged"] = f.converged;
  d["kkt_max_violation"] = f.kkt_max_violation;
  d["link"] = f.link.name();
  return d;
}

py::dict report_to_dict(const EstimateReport& r) {
  py::dict d;
  d["estimator"] = estimator_name(r.estimator_kind);
  d["tau_hat"] = r.tau_hat;
  d["se"] = r.se;
  d["ci"] = py::make_tuple(r.ci.first, r.ci.second);
  d["n_used"] = r.n_used;
  py::dict diag;
  diag["mu_norm2"] = r.diagnostics.mu_norm2;
  diag["gamma_shift_l1"] = r.diagnostics.gamma_shift_l1;
  diag["fell_back"] = r.diagnostics.fell_back;
  diag["or_feasible"] = r.diagnostics.or_feasible;
  diag["escalations"] = r.diagnostics.escalations;
  diag["trimmed_count"] = r.diagnostics.trimmed_count;
  diag["sigma_e_tilde2"] = r.diagnostics.sigma_e_tilde2;
  d["diagnostics"] = diag;
  return d;
}

TuningParams tuning_from_kwargs(std::optional<double> eta_r, std::optional<double> eta_pi1,
                                std::optional<double> eta_pi2, std::optional<double> m_r,
                                std::optional<double> m_pi, std::optional<double> m_gamma,
                                double level) {
  TuningParams t;
  t.eta_r = eta_r;
  t.eta_pi1 = eta_pi1;
  t.eta_pi2 = eta_pi2;
  t.m_r = m_r;
  t.m_pi = m_pi;
  t.m_gamma = m_gamma;
  t.level = level;
  return t;
}

DgpConfig dgp_from_kwargs(const std::string& regime, int n, int n_aux, int n_tr, int p, int s_r,
                          int s_pi, double xi_r, double xi_pi, double c_pi, double noise_sd,
                          double tau_star, double covariate_rho) {
  DgpConfig cfg;
  cfg.regime = regime_from_name(regime);
  cfg.n = n;
  cfg.n_aux = n_aux > 0 ? n_aux : n;
  cfg.n_tr = n_tr > 0 ? n_tr : n;
  cfg.p = p;
  cfg.s_r = s_r;
  cfg.s_pi = s_pi;
  cfg.xi_r = xi_r;
  cfg.xi_pi = xi_pi;
  cfg.c_pi = c_pi;
  cfg.noise_sd = noise_sd;
  cfg.tau_star = tau_star;
  cfg.covariate_rho = covariate_rho;
  cfg.validate();
  return cfg;
}

py::dict cell_to_dict(const SimCell& c) {
  py::dict d;
  d["regime"] = c.regime;
  d["n"] = c.n;
  d["estimator"] = c.estimator;
  d["reps"] = c.reps;
  d["failures"] = c.failures;
  d["validity"] = c.validity;
  d["mean_bias"] = c.mean_bias;
  d["mc_se_of_bias"] = c.mc_se_of_bias;
  d["rmse"] = c.rmse;
  d["coverage"] = c.coverage;
  d["mean_se"] = c.mean_se;
  d["sd_tau"] = c.sd_tau;
  d["median_mu_norm_scaled"] = c.median_mu_norm_scaled;
  d["median_gamma_shift"] = c.median_gamma_shift;
  d["fallback_rate"] = c.fallback_rate;
  d["wall_time_s"] = c.wall_time_s;
  return d;
}

}  // namespace

PYBIND11_MODULE(_dcal, m) {
  m.doc() = "Double-calibrated treatment-effect estimation (C++ core)";
  m.attr("__version__") = kVersion;

  py::register_exception<invalid_config_error>(m, "InvalidConfigError", PyExc_ValueError);
  py::register_exception<data_error>(m, "DataError", PyExc_ValueError);
  py::register_exception<numeric_error>(m, "NumericError", PyExc_ArithmeticError);

  py::class_<Dataset>(m, "Dataset")
      .def(py::init(&make_dataset), py::arg("x"), py::arg("t"), py::arg("y"),
           py::arg("treatment_kind") = "binary",
           "Covariates without the intercept column; it is added internally.")
      .def_property_readonly("n", &Dataset::n)
      .def_property_readonly("p", &Dataset::p)
      .def_property_readonly("x", [](const Dataset& d) { return d.X; })
      .def_property_readonly("t", [](const Dataset& d) { return d.T; })
      .def_property_readonly("y", [](const Dataset& d) { return d.Y; });

  py::class_<SplitData>(m, "SplitData")
      .def_readonly("main", &SplitData::main)
      .def_readonly("aux", &SplitData::aux)
      .def_readonly("train", &SplitData::train);

  py::enum_<TreatmentKind>(m, "TreatmentKind")
      .value("binary", TreatmentKind::binary)
      .value("continuous", TreatmentKind::continuous);
  m.def("read_dataset_csv", &read_dataset_csv, py::arg("path"),
        py::arg("treatment_kind") = TreatmentKind::binary);

  m.def(
      "split_three_way",
      [](const Dataset& full, double f_main, double f_aux, double f_train, std::uint64_t seed) {
        return split_three_way(full, {f_main, f_aux, f_train}, seed);
      },
      py::arg("data"), py::arg("f_main"), py::arg("f_aux"), py::arg("f_train"), py::arg("seed"));

  m.def(
      "fit_lasso_glm",
      [](const Dataset& train, const std::string& response, const std::string& link,
         double lambda) {
        return fit_to_dict(
            fit_lasso_glm(train, response_from_name(response), Link::by_name(link), lambda));
      },
      py::arg("train"), py::arg("response"), py::arg("link"), py::arg("lambda_"));

  m.def(
      "select_lambda",
      [](const Dataset& train, const std::string& response, const std::string& link, int folds,
         std::uint64_t seed) {
        return select_lambda(train, response_from_name(response), Link::by_name(link), folds,
                             seed);
      },
      py::arg("train"), py::arg("response"), py::arg("link"), py::arg("folds") = 5,
      py::arg("seed") = 0);

  m.def("trim_index", &trim_index, py::arg("eta"), py::arg("m_gamma"));
  m.def("aipw_score", &aipw_score, py::arg("t"), py::arg("y"), py::arg("pi"), py::arg("r"));
  m.def("confidence_interval", &confidence_interval, py::arg("tau_hat"), py::arg("se"),
        py::arg("level") = 0.95);

  m.def(
      "estimate",
      [](const SplitData& split, const std::string& estimator, const std::string& or_link,
         const std::string& ps_link, std::uint64_t seed, int cv_folds,
         std::optional<double> lambda_or, std::optional<double> lambda_ps,
         std::optional<double> eta_r, std::optional<double> eta_pi1,
         std::optional<double> eta_pi2, std::optional<double> m_r, std::optional<double> m_pi,
         std::optional<double> m_gamma, double level) {
        const EstimatorKind kind = estimator_from_name(estimator);
        FitOptions opts;
        opts.psi = &Link::by_name(or_link);
        opts.phi = &Link::by_name(ps_link);
        opts.cv_folds = cv_folds;
        opts.lambda_or = lambda_or;
        opts.lambda_ps = lambda_ps;
        const bool plm = kind == EstimatorKind::dcal_plm;
        const NuisanceEstimates fits =
            plm ? fit_nuisances_plm(split.train, opts, CounterRng::derive(seed, 102))
                : fit_nuisances(split.train, opts, CounterRng::derive(seed, 102));
        const ResolvedTuning tuning =
            resolve_tuning(tuning_from_kwargs(eta_r, eta_pi1, eta_pi2, m_r, m_pi, m_gamma, level),
                           split, fits.ps_fit.coef, fits.ps_fit.link);
        const std::uint64_t synth_seed = CounterRng::derive(seed, 103);
        switch (kind) {
          case EstimatorKind::dml:
            return report_to_dict(estimate_dml(split.main, fits, tuning));
          case EstimatorKind::scal_r:
            return report_to_dict(estimate_scal_r(split, fits, tuning));
          case EstimatorKind::dcal:
            return report_to_dict(estimate_dcal(split, fits, tuning, synth_seed));
          case EstimatorKind::dcal_plm:
            return report_to_dict(estimate_dcal_plm(split, fits, tuning, synth_seed));
          default:
            throw invalid_config_error("estimator 'oracle' is only available in studies");
        }
      },
      py::arg("split"), py::arg("estimator") = "dcal", py::arg("or_link") = "identity",
      py::arg("ps_link") = "logistic", py::arg("seed") = 0, py::arg("cv_folds") = 5,
      py::arg("lambda_or") = std::nullopt, py::arg("lambda_ps") = std::nullopt,
      py::arg("eta_r") = std::nullopt, py::arg("eta_pi1") = std::nullopt,
      py::arg("eta_pi2") = std::nullopt, py::arg("m_r") = std::nullopt,
      py::arg("m_pi") = std::nullopt, py::arg("m_gamma") = std::nullopt,
      py::arg("level") = 0.95);

  m.def(
      "generate",
      [](const std::string& regime, int n, int n_aux, int n_tr, int p, int s_r, int s_pi,
         double xi_r, double xi_pi, double c_pi, double noise_sd, double tau_star,
         double covariate_rho, std::uint64_t seed) {
        auto [split, truth] = generate(dgp_from_kwargs(regime, n, n_aux, n_tr, p, s_r, s_pi, xi_r,
                                                       xi_pi, c_pi, noise_sd, tau_star,
                                                       covariate_rho),
                                       seed);
        py::dict t;
        t["r_star"] = truth.r_star;
        t["pi_star"] = truth.pi_star;
        t["tau_bar_star"] = truth.tau_bar_star;
        t["beta_star"] = truth.beta_star;
        t["gamma_star"] = truth.gamma_star;
        t["eps_var"] = truth.eps_var;
        return py::make_tuple(split, t);
      },
      py::arg("regime"), py::arg("n"), py::arg("n_aux") = 0, py::arg("n_tr") = 0,
      py::arg("p") = 500, py::arg("s_r") = 3, py::arg("s_pi") = 3, py::arg("xi_r") = 1.0,
      py::arg("xi_pi") = 1.0, py::arg("c_pi") = 0.1, py::arg("noise_sd") = 1.0,
      py::arg("tau_star") = 1.0, py::arg("covariate_rho") = 0.3, py::arg("seed") = 0);

  m.def(
      "run_study",
      [](const std::string& regime, int n, int n_aux, int n_tr, int p, int s_r, int s_pi,
         double xi_r, double xi_pi, double c_pi, double noise_sd, double tau_star,
         double covariate_rho, const std::vector<std::string>& estimators, int reps,
         std::uint64_t seed, int workers) {
        std::vector<EstimatorKind> kinds;
        for (const std::string& e : estimators) kinds.push_back(estimator_from_name(e));
        const SimReport rep = run_study(
            {{dgp_from_kwargs(regime, n, n_aux, n_tr, p, s_r, s_pi, xi_r, xi_pi, c_pi, noise_sd,
                              tau_star, covariate_rho),
              kinds}},
            reps, seed, workers);
        py::list cells;
        for (const SimCell& c : rep.cells) cells.append(cell_to_dict(c));
        return cells;
      },
      py::arg("regime"), py::arg("n"), py::arg("n_aux") = 0, py::arg("n_tr") = 0,
      py::arg("p") = 500, py::arg("s_r") = 3, py::arg("s_pi") = 3, py::arg("xi_r") = 1.0,
      py::arg("xi_pi") = 1.0, py::arg("c_pi") = 0.1, py::arg("noise_sd") = 1.0,
      py::arg("tau_star") = 1.0, py::arg("covariate_rho") = 0.3,
      py::arg("estimators") = std::vector<std::string>{"dcal"}, py::arg("reps") = 100,
      py::arg("seed") = 0, py::arg("workers") = 1);

  m.def(
      "population_tau",
      [](const std::string& regime, int n, int p, int reps, std::uint64_t seed) {
        DgpConfig cfg = dgp_from_kwargs(regime, n, 0, 0, p, 3, 3, 1.0, 1.0, 0.1, 1.0, 1.0, 0.3);
        const PopulationTau t = population_tau(cfg, seed, reps);
        return py::make_tuple(t.mean, t.mc_se);
      },
      py::arg("regime"), py::arg("n"), py::arg("p"), py::arg("reps") = 100, py::arg("seed") = 0);
}
