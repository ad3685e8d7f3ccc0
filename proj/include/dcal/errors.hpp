#pragma once

#include <stdexcept>
#include <string>

namespace dcal {

// Error taxonomy shared by the library and the CLI exit-code mapping:
// invalid_config_error / data_error -> exit 2, numeric_error -> exit 3.
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct invalid_config_error : error {
  using error::error;
};

struct data_error : error {
  using error::error;
};

struct numeric_error : error {
  using error::error;
};

}  // namespace dcal
