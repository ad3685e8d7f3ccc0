#pragma once

#include <cstdint>
#include <optional>

#include "dcal/dataset.hpp"
#include "dcal/estimators.hpp"
#include "dcal/link.hpp"

namespace dcal {

// Nuisance fitting options shared by the CLI and the simulation harness.
struct FitOptions {
  const Link* psi = &Link::identity();  // OR link
  const Link* phi = &Link::logistic();  // PS link
  int cv_folds = 5;
  std::optional<double> lambda_or;  // skip CV when pinned
  std::optional<double> lambda_ps;
};

// ATE pipeline: beta_hat from the treated training rows, gamma_hat from the
// treatment regression; lambdas by K-fold CV unless pinned.
NuisanceEstimates fit_nuisances(const Dataset& train, const FitOptions& opts, std::uint64_t seed);

// PLM pipeline: (tau_init, beta_hat) from a joint lasso of Y on [X, T] with
// the treatment column unpenalized; gamma_hat from a phi-link regression of
// the (real-valued) treatment on X.
NuisanceEstimates fit_nuisances_plm(const Dataset& train, const FitOptions& opts,
                                    std::uint64_t seed);

}  // namespace dcal
