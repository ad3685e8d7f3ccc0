#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dcal/dgp.hpp"
#include "dcal/estimators.hpp"

namespace dcal {

enum class ReportFormat { csv, json };
ReportFormat report_format_from_name(const std::string& name);

struct StudyCellSpec {
  DgpConfig config;
  std::vector<EstimatorKind> estimators;
};

// Aggregates for one (regime, n, estimator) cell. Bias statistics are against
// the per-replication tau_bar_star. `var` below is the population variance of
// the bias sample, so rmse^2 = mean_bias^2 + var holds exactly.
struct SimCell {
  std::string regime;
  int n = 0;
  std::string estimator;
  int reps = 0;
  int failures = 0;
  bool validity = true;  // >= 95% of replications succeeded
  double mean_bias = 0.0;
  double mc_se_of_bias = 0.0;
  double rmse = 0.0;
  double coverage = 0.0;
  double mean_se = 0.0;
  double sd_tau = 0.0;  // sample SD of tau_hat - tau_bar_star
  double median_mu_norm_scaled = 0.0;  // median ||mu||_2 / n^(1/4)
  double median_gamma_shift = 0.0;     // median ||gamma_tilde - gamma_hat||_1
  double fallback_rate = 0.0;
  double wall_time_s = 0.0;  // summed per-replication compute time
};

struct SimReport {
  std::vector<SimCell> cells;
  std::uint64_t seed = 0;
  int reps = 0;
  std::string version;
  std::map<std::string, double> tolerances;
};

// Runs reps replications of every grid cell. Deterministic given seed for any
// worker count: replication r of cell c always uses the substream
// derive(seed, c, r) and aggregation is performed in fixed index order with
// pairwise summation.
SimReport run_study(const std::vector<StudyCellSpec>& grid, int reps, std::uint64_t seed,
                    int workers);

struct ScalingRow {
  int n = 0;
  double rmse = 0.0;
  int reps = 0;
};

struct ScalingReport {
  std::string regime;
  std::string estimator;
  std::vector<ScalingRow> rows;
  std::vector<double> ratios;  // rmse(n_i) / rmse(n_{i+1}) for consecutive rows
  std::uint64_t seed = 0;
  std::string version;
};

// RMSE-vs-n table with ratio diagnostics; n_aux and n_tr scale with n.
ScalingReport scaling_check(const DgpConfig& base, const std::vector<int>& n_list,
                            EstimatorKind estimator, int reps, std::uint64_t seed, int workers);

// Schema-stable flat tables plus a meta block. Emitted files are byte-stable
// for a fixed seed (wall-clock fields are zeroed on output).
void emit_report(const SimReport& report, ReportFormat format, const std::string& path);
void emit_scaling_report(const ScalingReport& report, ReportFormat format,
                         const std::string& path);

// Reads back a CSV produced by emit_report (round-trip checks, tooling).
SimReport parse_report_csv(const std::string& path);

// Runs fn(0..n_tasks-1) on `workers` threads; task order is unspecified but
// results must be written to per-index slots.
void parallel_for(int n_tasks, int workers, const std::function<void(int)>& fn);

}  // namespace dcal
