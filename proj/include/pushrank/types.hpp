#pragma once

#include <cstdint>

namespace pushrank {

// Node identifiers are dense indices in [0, n).
using NodeId = std::uint32_t;

// Absolute slack allowed on "row sum <= 1" and "norm == 1" checks.
inline constexpr double kNormTolerance = 1e-12;

}  // namespace pushrank
