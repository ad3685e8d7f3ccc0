#pragma once

#include <string>

#include "dcal/dataset.hpp"

namespace dcal {

// Dataset CSV schema: header row `y,t,x1,...,x{p-1}`; the intercept column is
// added internally. Missing or non-numeric values are rejected with the
// offending row and column named.
Dataset read_dataset_csv(const std::string& path,
                         TreatmentKind kind = TreatmentKind::binary);

void write_dataset_csv(const Dataset& data, const std::string& path);

}  // namespace dcal
