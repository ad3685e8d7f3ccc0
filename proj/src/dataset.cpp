#include "dcal/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "dcal/errors.hpp"
#include "dcal/rng.hpp"

namespace dcal {

void Dataset::validate() const {
  const int nn = n(), pp = p();
  if (nn <= 0 || pp < 2) throw data_error("dataset needs n >= 1 and p >= 2");
  if (T.size() != nn || Y.size() != nn)
    throw data_error("dataset: T/Y length does not match X rows");
  if (!X.allFinite() || !T.allFinite() || !Y.allFinite())
    throw data_error("dataset contains non-finite values");
  for (int i = 0; i < nn; ++i) {
    if (X(i, 0) != 1.0)
      throw data_error("dataset: column 0 must be the intercept (1.0), violated at row " +
                       std::to_string(i));
    if (treatment_kind == TreatmentKind::binary && T[i] != 0.0 && T[i] != 1.0)
      throw data_error("dataset: binary treatment must be 0/1, violated at row " +
                       std::to_string(i));
  }
}

Dataset Dataset::rows(const std::vector<int>& idx) const {
  Dataset out;
  out.treatment_kind = treatment_kind;
  out.X.resize(static_cast<int>(idx.size()), p());
  out.T.resize(static_cast<int>(idx.size()));
  out.Y.resize(static_cast<int>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) {
    out.X.row(static_cast<int>(k)) = X.row(idx[k]);
    out.T[static_cast<int>(k)] = T[idx[k]];
    out.Y[static_cast<int>(k)] = Y[idx[k]];
  }
  return out;
}

SplitData split_three_way(const Dataset& full, const std::array<double, 3>& fractions,
                          std::uint64_t seed) {
  for (double f : fractions)
    if (!(f > 0.0)) throw invalid_config_error("split fractions must be positive");
  const double sum = fractions[0] + fractions[1] + fractions[2];
  if (std::abs(sum - 1.0) > 1e-12)
    throw invalid_config_error("split fractions must sum to 1 (got " + std::to_string(sum) + ")");
  const int N = full.n();
  if (N < 9) throw invalid_config_error("split_three_way needs at least 9 observations");

  const int n_aux = static_cast<int>(std::floor(N * fractions[1]));
  const int n_tr = static_cast<int>(std::floor(N * fractions[2]));
  const int n_main = N - n_aux - n_tr;
  if (n_main <= 0 || n_aux <= 0 || n_tr <= 0)
    throw invalid_config_error("split fractions leave an empty split");

  CounterRng rng(seed, /*stream=*/0x53504c49ULL);  // "SPLI"
  std::vector<int> perm = rng.permutation(N);

  auto take = [&](int lo, int hi) {
    std::vector<int> idx(perm.begin() + lo, perm.begin() + hi);
    std::sort(idx.begin(), idx.end());
    return idx;
  };
  SplitData out;
  out.main = full.rows(take(0, n_main));
  out.aux = full.rows(take(n_main, n_main + n_aux));
  out.train = full.rows(take(n_main + n_aux, N));
  return out;
}

}  // namespace dcal
