#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <vector>

namespace dcal {

enum class TreatmentKind { binary, continuous };

// One sample: covariates with a leading intercept column, treatment, outcome.
// Immutable by convention after construction; all consumers take const refs.
struct Dataset {
  Eigen::MatrixXd X;  // n x p, column 0 identically 1
  Eigen::VectorXd T;  // length n; {0,1} for binary, real for continuous
  Eigen::VectorXd Y;  // length n
  TreatmentKind treatment_kind = TreatmentKind::binary;

  int n() const { return static_cast<int>(X.rows()); }
  int p() const { return static_cast<int>(X.cols()); }

  // Throws data_error when an invariant fails (shapes, intercept column,
  // binary treatment levels, finiteness).
  void validate() const;

  Dataset rows(const std::vector<int>& idx) const;
};

// The three-way sample partition: estimators are computed on `main`, the OR
// calibration target comes from `aux`, nuisance GLMs are fit on `train`.
struct SplitData {
  Dataset main;
  Dataset aux;
  Dataset train;
};

// Deterministic seeded partition. Sizes: n_aux = floor(N*f_aux),
// n_tr = floor(N*f_tr), remainder goes to main.
SplitData split_three_way(const Dataset& full, const std::array<double, 3>& fractions,
                          std::uint64_t seed);

}  // namespace dcal
