#pragma once

namespace krigreg {

inline constexpr const char* kVersion = "0.1.0";

// Matrix norm used for every condition number reported by this library.
inline constexpr const char* kConditionNorm = "2-norm";

}  // namespace krigreg
