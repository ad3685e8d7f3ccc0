#include "dcal/simulation.hpp"

#include <atomic>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "dcal/errors.hpp"
#include "dcal/math_util.hpp"
#include "dcal/pipeline.hpp"
#include "dcal/rng.hpp"
#include "dcal/tuning.hpp"
#include "dcal/version.hpp"

namespace dcal {

ReportFormat report_format_from_name(const std::string& name) {
  if (name == "csv") return ReportFormat::csv;
  if (name == "json") return ReportFormat::json;
  throw invalid_config_error("unknown format '" + name + "' (expected csv|json)");
}

void parallel_for(int n_tasks, int workers, const std::function<void(int)>& fn) {
  workers = std::max(1, workers);
  if (workers == 1 || n_tasks <= 1) {
    for (int i = 0; i < n_tasks; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  const int n_threads = std::min(workers, n_tasks);
  pool.reserve(n_threads);
  for (int w = 0; w < n_threads; ++w) {
    pool.emplace_back([&]() {
      while (true) {
        const int i = next.fetch_add(1);
        if (i >= n_tasks) break;
        fn(i);
      }
    });
  }
  for (auto& t : pool) t.join();
}

namespace {

struct RepResult {
  bool ok = false;
  std::string failure;
  double tau_hat = 0.0;
  double se = 0.0;
  double lo = 0.0, hi = 0.0;
  double tau_bar_star = 0.0;
  double mu_norm = 0.0;
  double gamma_shift = 0.0;
  bool fell_back = false;
  double seconds = 0.0;
};

// One replication of one estimator set; shared nuisance work is hoisted so a
// {dml, scal, dcal} cell pays for one fit and one OR calibration.
void run_replication(const DgpConfig& cfg, const std::vector<EstimatorKind>& estimators,
                     std::uint64_t rep_seed, RepResult* out /* one slot per estimator */) {
  const auto t0 = std::chrono::steady_clock::now();
  auto note_time = [&](int k) {
    const auto t1 = std::chrono::steady_clock::now();
    out[k].seconds = std::chrono::duration<double>(t1 - t0).count();
  };
  try {
    auto [split, truth] = generate(cfg, CounterRng::derive(rep_seed, 11));
    const std::uint64_t synth_seed = CounterRng::derive(rep_seed, 12);
    const std::uint64_t fit_seed = CounterRng::derive(rep_seed, 13);

    const bool plm = regime_is_plm(cfg.regime);
    bool needs_fit = false;
    for (EstimatorKind e : estimators) needs_fit |= (e != EstimatorKind::oracle);

    NuisanceEstimates fits;
    ResolvedTuning tuning{};
    if (needs_fit) {
      FitOptions opts;
      fits = plm ? fit_nuisances_plm(split.train, opts, fit_seed)
                 : fit_nuisances(split.train, opts, fit_seed);
      tuning = resolve_tuning(TuningParams{}, split, fits.ps_fit.coef, fits.ps_fit.link);
    }

    for (std::size_t k = 0; k < estimators.size(); ++k) {
      try {
        EstimateReport rep;
        switch (estimators[k]) {
          case EstimatorKind::oracle:
            rep = estimate_oracle(split.main, truth.pi_star, truth.r_star, 0.95);
            break;
          case EstimatorKind::dml:
            rep = estimate_dml(split.main, fits, tuning);
            break;
          case EstimatorKind::scal_r:
            rep = estimate_scal_r(split, fits, tuning);
            break;
          case EstimatorKind::dcal:
            rep = estimate_dcal(split, fits, tuning, synth_seed);
            break;
          case EstimatorKind::dcal_plm:
            rep = estimate_dcal_plm(split, fits, tuning, synth_seed);
            break;
        }
        out[k].ok = true;
        out[k].tau_hat = rep.tau_hat;
        out[k].se = rep.se;
        out[k].lo = rep.ci.first;
        out[k].hi = rep.ci.second;
        out[k].tau_bar_star = plm ? cfg.tau_star : truth.tau_bar_star;
        out[k].mu_norm = rep.diagnostics.mu_norm2;
        out[k].gamma_shift = rep.diagnostics.gamma_shift_l1;
        out[k].fell_back = rep.diagnostics.fell_back;
      } catch (const std::exception& e) {
        out[k].ok = false;
        out[k].failure = e.what();
      }
      note_time(static_cast<int>(k));
    }
  } catch (const std::exception& e) {
    for (std::size_t k = 0; k < estimators.size(); ++k) {
      out[k].ok = false;
      out[k].failure = e.what();
      note_time(static_cast<int>(k));
    }
  }
}

SimCell aggregate_cell(const DgpConfig& cfg, EstimatorKind est, const RepResult* res, int reps,
                       int stride) {
  SimCell cell;
  cell.regime = regime_name(cfg.regime);
  cell.n = cfg.n;
  cell.estimator = estimator_name(est);
  cell.reps = reps;

  std::vector<double> bias, bias_sq, ses, mu_scaled, shifts;
  int covered = 0, fellback = 0;
  double wall = 0.0;
  for (int r = 0; r < reps; ++r) {
    const RepResult& rr = res[r * stride];
    wall += rr.seconds;
    if (!rr.ok) {
      ++cell.failures;
      continue;
    }
    const double d = rr.tau_hat - rr.tau_bar_star;
    bias.push_back(d);
    bias_sq.push_back(d * d);
    ses.push_back(rr.se);
    mu_scaled.push_back(rr.mu_norm / std::pow(static_cast<double>(cfg.n), 0.25));
    shifts.push_back(rr.gamma_shift);
    covered += (rr.lo <= rr.tau_bar_star && rr.tau_bar_star <= rr.hi) ? 1 : 0;
    fellback += rr.fell_back ? 1 : 0;
  }
  cell.wall_time_s = wall;
  const int ok = static_cast<int>(bias.size());
  cell.validity = ok >= static_cast<int>(std::ceil(0.95 * reps));
  if (ok == 0) return cell;

  cell.mean_bias = pairwise_mean(bias);
  const double mean_sq = pairwise_mean(bias_sq);
  cell.rmse = std::sqrt(mean_sq);
  const double var_pop = std::max(0.0, mean_sq - cell.mean_bias * cell.mean_bias);
  cell.sd_tau = ok > 1 ? std::sqrt(var_pop * double(ok) / double(ok - 1)) : 0.0;
  cell.mc_se_of_bias = ok > 1 ? cell.sd_tau / std::sqrt(double(ok)) : 0.0;
  cell.coverage = static_cast<double>(covered) / ok;
  cell.mean_se = pairwise_mean(ses);
  cell.median_mu_norm_scaled = median(mu_scaled);
  cell.median_gamma_shift = median(shifts);
  cell.fallback_rate = static_cast<double>(fellback) / ok;
  return cell;
}

std::map<std::string, double> default_tolerances() {
  return {
      {"eta_r_scale", kDefaultEtaRScale},   {"eta_pi1_scale", kDefaultEtaPi1Scale},
      {"eta_pi2_scale", kDefaultEtaPi2Scale}, {"or_solver_tol", 1e-8},
      {"ps_cert_tol", kPsCertTol},           {"kkt_tol_base", 1e-6},
      {"level", 0.95},
  };
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

SimReport run_study(const std::vector<StudyCellSpec>& grid, int reps, std::uint64_t seed,
                    int workers) {
  if (grid.empty()) throw invalid_config_error("run_study: empty grid");
  if (reps < 2) throw invalid_config_error("run_study: reps must be >= 2");
  if (workers < 1) throw invalid_config_error("run_study: workers must be >= 1");
  for (const auto& cell : grid) {
    cell.config.validate();
    if (cell.estimators.empty())
      throw invalid_config_error("run_study: cell without estimators");
    for (EstimatorKind e : cell.estimators) {
      const bool plm_est = e == EstimatorKind::dcal_plm;
      if (plm_est != regime_is_plm(cell.config.regime) && e != EstimatorKind::oracle)
        throw invalid_config_error(
            "run_study: PLM regimes pair with dcal-plm and ATE regimes with dml/scal/dcal");
    }
  }

  // Flatten (cell, rep) into tasks; results land in per-task slots so the
  // aggregate is independent of scheduling.
  struct TaskRef {
    int cell;
    int rep;
  };
  std::vector<TaskRef> tasks;
  std::vector<int> cell_offset(grid.size() + 1, 0);
  for (std::size_t c = 0; c < grid.size(); ++c) {
    cell_offset[c + 1] =
        cell_offset[c] + reps * static_cast<int>(grid[c].estimators.size());
    for (int r = 0; r < reps; ++r) tasks.push_back({static_cast<int>(c), r});
  }
  std::vector<RepResult> results(cell_offset.back());

  parallel_for(static_cast<int>(tasks.size()), workers, [&](int t) {
    const TaskRef& ref = tasks[t];
    const auto& cell = grid[ref.cell];
    const int n_est = static_cast<int>(cell.estimators.size());
    const std::uint64_t rep_seed =
        CounterRng::derive(seed, static_cast<std::uint64_t>(ref.cell),
                           static_cast<std::uint64_t>(ref.rep));
    run_replication(cell.config, cell.estimators, rep_seed,
                    &results[cell_offset[ref.cell] + ref.rep * n_est]);
  });

  SimReport report;
  report.seed = seed;
  report.reps = reps;
  report.version = kVersion;
  report.tolerances = default_tolerances();
  for (std::size_t c = 0; c < grid.size(); ++c) {
    const int n_est = static_cast<int>(grid[c].estimators.size());
    for (int k = 0; k < n_est; ++k)
      report.cells.push_back(aggregate_cell(grid[c].config, grid[c].estimators[k],
                                            &results[cell_offset[c] + k], reps, n_est));
  }
  return report;
}

ScalingReport scaling_check(const DgpConfig& base, const std::vector<int>& n_list,
                            EstimatorKind estimator, int reps, std::uint64_t seed, int workers) {
  if (n_list.size() < 2) throw invalid_config_error("scaling_check: need at least two n values");
  std::vector<StudyCellSpec> grid;
  for (int n : n_list) {
    DgpConfig cfg = base;
    cfg.n = cfg.n_aux = cfg.n_tr = n;
    grid.push_back({cfg, {estimator}});
  }
  const SimReport sim = run_study(grid, reps, seed, workers);

  ScalingReport out;
  out.regime = regime_name(base.regime);
  out.estimator = estimator_name(estimator);
  out.seed = seed;
  out.version = kVersion;
  for (const SimCell& cell : sim.cells) out.rows.push_back({cell.n, cell.rmse, cell.reps});
  for (std::size_t i = 0; i + 1 < out.rows.size(); ++i)
    out.ratios.push_back(out.rows[i].rmse / out.rows[i + 1].rmse);
  return out;
}

void emit_report(const SimReport& report, ReportFormat format, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw data_error("emit_report: cannot open '" + path + "' for writing");
  if (format == ReportFormat::csv) {
    f << "# dcal-sim-report v1\n";
    f << "# meta,seed," << report.seed << "\n";
    f << "# meta,reps," << report.reps << "\n";
    f << "# meta,version," << report.version << "\n";
    for (const auto& [k, v] : report.tolerances) f << "# meta,tol." << k << "," << fmt_double(v) << "\n";
    f << "regime,n,estimator,reps,failures,validity,mean_bias,mc_se_of_bias,rmse,coverage,"
         "mean_se,sd_tau,median_mu_norm_scaled,median_gamma_shift,fallback_rate,wall_time_s\n";
    for (const SimCell& c : report.cells) {
      f << c.regime << ',' << c.n << ',' << c.estimator << ',' << c.reps << ',' << c.failures
        << ',' << (c.validity ? 1 : 0) << ',' << fmt_double(c.mean_bias) << ','
        << fmt_double(c.mc_se_of_bias) << ',' << fmt_double(c.rmse) << ','
        << fmt_double(c.coverage) << ',' << fmt_double(c.mean_se) << ',' << fmt_double(c.sd_tau)
        << ',' << fmt_double(c.median_mu_norm_scaled) << ',' << fmt_double(c.median_gamma_shift)
        << ',' << fmt_double(c.fallback_rate) << ',' << fmt_double(0.0) << "\n";
    }
  } else {
    nlohmann::ordered_json j;
    j["meta"] = {{"seed", report.seed},
                 {"reps", report.reps},
                 {"version", report.version},
                 {"tolerances", report.tolerances}};
    j["cells"] = nlohmann::ordered_json::array();
    for (const SimCell& c : report.cells) {
      j["cells"].push_back({{"regime", c.regime},
                            {"n", c.n},
                            {"estimator", c.estimator},
                            {"reps", c.reps},
                            {"failures", c.failures},
                            {"validity", c.validity},
                            {"mean_bias", c.mean_bias},
                            {"mc_se_of_bias", c.mc_se_of_bias},
                            {"rmse", c.rmse},
                            {"coverage", c.coverage},
                            {"mean_se", c.mean_se},
                            {"sd_tau", c.sd_tau},
                            {"median_mu_norm_scaled", c.median_mu_norm_scaled},
                            {"median_gamma_shift", c.median_gamma_shift},
                            {"fallback_rate", c.fallback_rate},
                            {"wall_time_s", 0.0}});
    }
    f << j.dump(2) << "\n";
  }
  if (!f.good()) throw data_error("emit_report: write failed for '" + path + "'");
}

void emit_scaling_report(const ScalingReport& report, ReportFormat format,
                         const std::string& path) {
  std::ofstream f(path);
  if (!f) throw data_error("emit_scaling_report: cannot open '" + path + "'");
  if (format == ReportFormat::csv) {
    f << "# dcal-scaling-report v1\n";
    f << "# meta,seed," << report.seed << "\n";
    f << "# meta,version," << report.version << "\n";
    f << "# meta,regime," << report.regime << "\n";
    f << "# meta,estimator," << report.estimator << "\n";
    f << "n,rmse,reps\n";
    for (const ScalingRow& r : report.rows)
      f << r.n << ',' << fmt_double(r.rmse) << ',' << r.reps << "\n";
    f << "ratio";
    for (double r : report.ratios) f << ',' << fmt_double(r);
    f << "\n";
  } else {
    nlohmann::ordered_json j;
    j["meta"] = {{"seed", report.seed},
                 {"version", report.version},
                 {"regime", report.regime},
                 {"estimator", report.estimator}};
    j["rows"] = nlohmann::ordered_json::array();
    for (const ScalingRow& r : report.rows)
      j["rows"].push_back({{"n", r.n}, {"rmse", r.rmse}, {"reps", r.reps}});
    j["ratios"] = report.ratios;
    f << j.dump(2) << "\n";
  }
  if (!f.good()) throw data_error("emit_scaling_report: write failed for '" + path + "'");
}

SimReport parse_report_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw data_error("parse_report_csv: cannot open '" + path + "'");
  SimReport report;
  std::string line;
  bool header_seen = false;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::stringstream ss(line.substr(1));
      std::string tag, key, value;
      std::getline(ss, tag, ',');
      if (tag.find("meta") == std::string::npos) continue;
      std::getline(ss, key, ',');
      std::getline(ss, value);
      if (key == "seed") report.seed = std::strtoull(value.c_str(), nullptr, 10);
      else if (key == "reps") report.reps = std::atoi(value.c_str());
      else if (key == "version") report.version = value;
      else if (key.rfind("tol.", 0) == 0) report.tolerances[key.substr(4)] = std::atof(value.c_str());
      continue;
    }
    if (!header_seen) {  // column header row
      header_seen = true;
      continue;
    }
    std::stringstream ss(line);
    std::string tok;
    std::vector<std::string> cols;
    while (std::getline(ss, tok, ',')) cols.push_back(tok);
    if (cols.size() != 16) throw data_error("parse_report_csv: malformed row: " + line);
    SimCell c;
    c.regime = cols[0];
    c.n = std::atoi(cols[1].c_str());
    c.estimator = cols[2];
    c.reps = std::atoi(cols[3].c_str());
    c.failures = std::atoi(cols[4].c_str());
    c.validity = cols[5] == "1";
    c.mean_bias = std::atof(cols[6].c_str());
    c.mc_se_of_bias = std::atof(cols[7].c_str());
    c.rmse = std::atof(cols[8].c_str());
    c.coverage = std::atof(cols[9].c_str());
    c.mean_se = std::atof(cols[10].c_str());
    c.sd_tau = std::atof(cols[11].c_str());
    c.median_mu_norm_scaled = std::atof(cols[12].c_str());
    c.median_gamma_shift = std::atof(cols[13].c_str());
    c.fallback_rate = std::atof(cols[14].c_str());
    c.wall_time_s = std::atof(cols[15].c_str());
    report.cells.push_back(c);
  }
  return report;
}

}  // namespace dcal
