#pragma once

namespace dcal {

inline constexpr const char* kVersion = "dcal 0.1.0";

}  // namespace dcal
