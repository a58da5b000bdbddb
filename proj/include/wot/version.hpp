#pragma once

#include <string_view>

namespace wot {

inline constexpr std::string_view kVersion = "0.1.0";

// Recorded in every report so that seeded runs can be reproduced elsewhere.
inline constexpr std::string_view kGaussianAlgorithm = "mt19937_64 + Marsaglia polar";
inline constexpr std::string_view kGaussianCdfMethod = "0.5*erfc(-x/sqrt(2)) via libm erfc";
inline constexpr std::string_view kTieBreakRule =
    "transportation simplex, northwest-corner start, Dantzig pricing with lowest-index ties, "
    "Bland fallback after repeated degenerate pivots";

}  // namespace wot
