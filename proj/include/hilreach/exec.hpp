#pragma once

namespace hilreach {

// Selects between the serial reference kernels and their OpenMP versions.
// Both produce bit-identical results; the serial path is kept for testing.
enum class Exec { Serial, Parallel };

}  // namespace hilreach
