// dcal: fit calibrated treatment-effect estimators on CSV data, run seeded
// simulation studies, and emit machine-readable reports.

#include <CLI11.hpp>
#include <cstdint>
#include <fstream>
#include <nlohmann/json.hpp>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dcal/csv.hpp"
#include "dcal/errors.hpp"
#include "dcal/estimators.hpp"
#include "dcal/log.hpp"
#include "dcal/pipeline.hpp"
#include "dcal/rng.hpp"
#include "dcal/simulation.hpp"
#include "dcal/version.hpp"

namespace {

using dcal::invalid_config_error;
using json = nlohmann::ordered_json;

// Flat typed key-value config document; flags override file values.
struct RunConfig {
  std::map<std::string, json> values;

  bool has(const std::string& key) const { return values.count(key) > 0; }

  template <typename T>
  T get(const std::string& key, T fallback) const {
    auto it = values.find(key);
    if (it == values.end()) return fallback;
    try {
      return it->second.get<T>();
    } catch (const std::exception&) {
      throw invalid_config_error("config key '" + key + "' has the wrong type");
    }
  }

  template <typename T>
  std::optional<T> maybe(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return get<T>(key, T{});
  }
};

const std::set<std::string> kKnownKeys = {
    // common
    "seed", "workers", "out", "format", "level", "estimator", "estimators",
    // fit inputs
    "data", "main", "aux", "train", "frac_main", "frac_aux", "frac_train",
    "or_link", "ps_link", "cv_folds", "lambda_or", "lambda_ps",
    // tuning overrides
    "eta_r", "eta_pi1", "eta_pi2", "m_r", "m_pi", "m_gamma",
    // dgp / study
    "regime", "n", "n_aux", "n_tr", "p", "s_r", "s_pi", "xi_r", "xi_pi", "c_pi",
    "noise_sd", "tau_star", "covariate_rho", "reps", "n_list",
};

RunConfig load_config(const std::string& path) {
  RunConfig cfg;
  if (path.empty()) return cfg;
  std::ifstream f(path);
  if (!f) throw invalid_config_error("cannot open config file '" + path + "'");
  json doc;
  try {
    f >> doc;
  } catch (const std::exception& e) {
    throw invalid_config_error("config parse error in '" + path + "': " + e.what());
  }
  if (!doc.is_object()) throw invalid_config_error("config must be a flat JSON object");
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (!kKnownKeys.count(it.key()))
      throw invalid_config_error("unknown config key '" + it.key() + "'");
    if (it.value().is_object() || it.value().is_array())
      throw invalid_config_error("config key '" + it.key() + "' must be a scalar");
    cfg.values[it.key()] = it.value();
  }
  return cfg;
}

std::vector<std::string> split_csv_list(const std::string& s) {
  std::vector<std::string> out;
  std::string tok;
  std::stringstream ss(s);
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) out.push_back(tok);
  }
  return out;
}

dcal::TuningParams tuning_from(const RunConfig& cfg, double level) {
  dcal::TuningParams t;
  t.eta_r = cfg.maybe<double>("eta_r");
  t.eta_pi1 = cfg.maybe<double>("eta_pi1");
  t.eta_pi2 = cfg.maybe<double>("eta_pi2");
  t.m_r = cfg.maybe<double>("m_r");
  t.m_pi = cfg.maybe<double>("m_pi");
  t.m_gamma = cfg.maybe<double>("m_gamma");
  t.level = level;
  return t;
}

dcal::DgpConfig dgp_from(const RunConfig& cfg) {
  dcal::DgpConfig d;
  d.regime = dcal::regime_from_name(cfg.get<std::string>("regime", "sparse_or_dense_ps"));
  d.n = cfg.get<int>("n", d.n);
  d.n_aux = cfg.get<int>("n_aux", d.n);
  d.n_tr = cfg.get<int>("n_tr", d.n);
  d.p = cfg.get<int>("p", d.p);
  d.s_r = cfg.get<int>("s_r", d.s_r);
  d.s_pi = cfg.get<int>("s_pi", d.s_pi);
  d.xi_r = cfg.get<double>("xi_r", d.xi_r);
  d.xi_pi = cfg.get<double>("xi_pi", d.xi_pi);
  d.c_pi = cfg.get<double>("c_pi", d.c_pi);
  d.noise_sd = cfg.get<double>("noise_sd", d.noise_sd);
  d.tau_star = cfg.get<double>("tau_star", d.tau_star);
  d.covariate_rho = cfg.get<double>("covariate_rho", d.covariate_rho);
  d.validate();
  return d;
}

json report_to_json(const dcal::EstimateReport& rep, std::uint64_t seed, double level) {
  json j;
  j["estimator"] = dcal::estimator_name(rep.estimator_kind);
  j["tau_hat"] = rep.tau_hat;
  j["se"] = rep.se;
  j["ci_lo"] = rep.ci.first;
  j["ci_hi"] = rep.ci.second;
  j["level"] = level;
  j["n_used"] = rep.n_used;
  j["diagnostics"] = {
      {"mu_norm2", rep.diagnostics.mu_norm2},
      {"gamma_shift_l1", rep.diagnostics.gamma_shift_l1},
      {"fell_back", rep.diagnostics.fell_back},
      {"or_feasible", rep.diagnostics.or_feasible},
      {"escalations", rep.diagnostics.escalations},
      {"trimmed_count", rep.diagnostics.trimmed_count},
  };
  if (rep.estimator_kind == dcal::EstimatorKind::dcal_plm) {
    j["diagnostics"]["sigma_e_tilde2"] = rep.diagnostics.sigma_e_tilde2;
    j["diagnostics"]["degenerate_variance"] = rep.diagnostics.degenerate_variance;
  }
  j["meta"] = {{"seed", seed}, {"version", dcal::kVersion}};
  return j;
}

int cmd_fit(const RunConfig& cfg) {
  const std::uint64_t seed = cfg.get<std::uint64_t>("seed", 0);
  const double level = cfg.get<double>("level", 0.95);
  const std::string out = cfg.get<std::string>("out", "estimate.json");
  const std::string est_name = cfg.get<std::string>("estimator", "dcal");
  const dcal::EstimatorKind kind = dcal::estimator_from_name(est_name);
  const bool plm = kind == dcal::EstimatorKind::dcal_plm;
  const auto treat_kind =
      plm ? dcal::TreatmentKind::continuous : dcal::TreatmentKind::binary;

  dcal::SplitData split;
  if (cfg.has("data")) {
    const dcal::Dataset full = dcal::read_dataset_csv(cfg.get<std::string>("data", ""), treat_kind);
    const std::array<double, 3> fr = {cfg.get<double>("frac_main", 1.0 / 3),
                                      cfg.get<double>("frac_aux", 1.0 / 3),
                                      cfg.get<double>("frac_train", 1.0 / 3)};
    split = dcal::split_three_way(full, fr, dcal::CounterRng::derive(seed, 101));
  } else if (cfg.has("main") && cfg.has("aux") && cfg.has("train")) {
    split.main = dcal::read_dataset_csv(cfg.get<std::string>("main", ""), treat_kind);
    split.aux = dcal::read_dataset_csv(cfg.get<std::string>("aux", ""), treat_kind);
    split.train = dcal::read_dataset_csv(cfg.get<std::string>("train", ""), treat_kind);
  } else {
    throw invalid_config_error("fit needs either 'data' or all of 'main','aux','train'");
  }

  dcal::FitOptions opts;
  opts.psi = &dcal::Link::by_name(cfg.get<std::string>("or_link", "identity"));
  opts.phi = &dcal::Link::by_name(cfg.get<std::string>("ps_link", "logistic"));
  opts.cv_folds = cfg.get<int>("cv_folds", 5);
  opts.lambda_or = cfg.maybe<double>("lambda_or");
  opts.lambda_ps = cfg.maybe<double>("lambda_ps");

  dcal::log_line(dcal::LogLevel::info, "fitting nuisance GLMs on the training split");
  const dcal::NuisanceEstimates fits =
      plm ? dcal::fit_nuisances_plm(split.train, opts, dcal::CounterRng::derive(seed, 102))
          : dcal::fit_nuisances(split.train, opts, dcal::CounterRng::derive(seed, 102));

  const dcal::ResolvedTuning tuning =
      dcal::resolve_tuning(tuning_from(cfg, level), split, fits.ps_fit.coef, fits.ps_fit.link);
  const std::uint64_t synth_seed = dcal::CounterRng::derive(seed, 103);

  dcal::log_line(dcal::LogLevel::info, std::string("running estimator ") + est_name);
  dcal::EstimateReport rep;
  switch (kind) {
    case dcal::EstimatorKind::dml:
      rep = dcal::estimate_dml(split.main, fits, tuning);
      break;
    case dcal::EstimatorKind::scal_r:
      rep = dcal::estimate_scal_r(split, fits, tuning);
      break;
    case dcal::EstimatorKind::dcal:
      rep = dcal::estimate_dcal(split, fits, tuning, synth_seed);
      break;
    case dcal::EstimatorKind::dcal_plm:
      rep = dcal::estimate_dcal_plm(split, fits, tuning, synth_seed);
      break;
    default:
      throw invalid_config_error("estimator 'oracle' needs simulated truth; use simulate");
  }

  std::ofstream f(out);
  if (!f) throw dcal::data_error("cannot open output file '" + out + "'");
  f << report_to_json(rep, seed, level).dump(2) << "\n";
  std::printf("%s\n", out.c_str());
  return 0;
}

std::vector<dcal::EstimatorKind> estimators_from(const RunConfig& cfg, bool plm) {
  std::vector<dcal::EstimatorKind> kinds;
  const std::string def = plm ? "dcal-plm" : "dcal";
  for (const std::string& name : split_csv_list(cfg.get<std::string>("estimators", def)))
    kinds.push_back(dcal::estimator_from_name(name));
  if (kinds.empty()) throw invalid_config_error("no estimators requested");
  return kinds;
}

int cmd_simulate(const RunConfig& cfg) {
  const std::uint64_t seed = cfg.get<std::uint64_t>("seed", 0);
  const int workers = cfg.get<int>("workers", 1);
  const int reps = cfg.get<int>("reps", 100);
  const std::string out = cfg.get<std::string>("out", "simulation.csv");
  const dcal::ReportFormat format =
      dcal::report_format_from_name(cfg.get<std::string>("format", "csv"));
  const dcal::DgpConfig dgp = dgp_from(cfg);

  dcal::log_line(dcal::LogLevel::info,
                 "simulate: regime=" + std::string(dcal::regime_name(dgp.regime)) +
                     " reps=" + std::to_string(reps));
  const dcal::SimReport report =
      dcal::run_study({{dgp, estimators_from(cfg, dcal::regime_is_plm(dgp.regime))}}, reps, seed,
                      workers);
  for (const dcal::SimCell& c : report.cells)
    dcal::log_line(dcal::LogLevel::info,
                   c.estimator + ": bias=" + std::to_string(c.mean_bias) +
                       " coverage=" + std::to_string(c.coverage) +
                       " wall=" + std::to_string(c.wall_time_s) + "s");
  dcal::emit_report(report, format, out);
  std::printf("%s\n", out.c_str());
  return 0;
}

int cmd_scaling(const RunConfig& cfg) {
  const std::uint64_t seed = cfg.get<std::uint64_t>("seed", 0);
  const int workers = cfg.get<int>("workers", 1);
  const int reps = cfg.get<int>("reps", 100);
  const std::string out = cfg.get<std::string>("out", "scaling.csv");
  const dcal::ReportFormat format =
      dcal::report_format_from_name(cfg.get<std::string>("format", "csv"));
  const dcal::DgpConfig dgp = dgp_from(cfg);

  std::vector<int> ns;
  for (const std::string& tok : split_csv_list(cfg.get<std::string>("n_list", "")))
    ns.push_back(std::stoi(tok));
  const dcal::EstimatorKind est = dcal::estimator_from_name(
      cfg.get<std::string>("estimator", dcal::regime_is_plm(dgp.regime) ? "dcal-plm" : "dcal"));

  const dcal::ScalingReport report = dcal::scaling_check(dgp, ns, est, reps, seed, workers);
  dcal::emit_scaling_report(report, format, out);
  std::printf("%s\n", out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Double-calibrated treatment-effect estimation"};
  app.set_version_flag("--version", dcal::kVersion);
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> estimator, out, format;
  std::optional<double> level;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "flat JSON config file");
    sub->add_option("--seed", seed, "RNG seed");
    sub->add_option("--workers", workers, "worker threads");
    sub->add_option("--estimator", estimator, "dml|scal|dcal|dcal-plm");
    sub->add_option("--out", out, "output path");
    sub->add_option("--format", format, "csv|json");
    sub->add_option("--level", level, "confidence level in (0,1)");
  };

  CLI::App* fit = app.add_subcommand("fit", "estimate from CSV data");
  CLI::App* simulate = app.add_subcommand("simulate", "run a seeded Monte Carlo study");
  CLI::App* scaling = app.add_subcommand("scaling", "rmse-vs-n scaling table");
  add_common(fit);
  add_common(simulate);
  add_common(scaling);

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig cfg = load_config(config_path);
    // flags override file values
    if (seed) cfg.values["seed"] = *seed;
    if (workers) cfg.values["workers"] = *workers;
    if (estimator) cfg.values["estimator"] = *estimator;
    if (out) cfg.values["out"] = *out;
    if (format) cfg.values["format"] = *format;
    if (level) cfg.values["level"] = *level;

    if (fit->parsed()) return cmd_fit(cfg);
    if (simulate->parsed()) return cmd_simulate(cfg);
    if (scaling->parsed()) return cmd_scaling(cfg);
    throw invalid_config_error("no subcommand");
  } catch (const dcal::invalid_config_error& e) {
    dcal::log_line(dcal::LogLevel::error, e.what());
    return 2;
  } catch (const dcal::data_error& e) {
    dcal::log_line(dcal::LogLevel::error, e.what());
    return 2;
  } catch (const dcal::numeric_error& e) {
    dcal::log_line(dcal::LogLevel::error, e.what());
    return 3;
  } catch (const std::exception& e) {
    dcal::log_line(dcal::LogLevel::error, std::string("unexpected: ") + e.what());
    return 3;
  }
}
