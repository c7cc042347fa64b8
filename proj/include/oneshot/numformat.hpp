#pragma once

#include <string>

namespace oneshot {

// Fixed 4-decimal formatting with round-half-even at the 4th place.
// Decimal halves that land a hair off .5 in binary (0.96435 stored as
// 0.96434999...) still take the half-even branch; the tolerance of 1e-7 on
// the scaled fraction is far above double rounding error and far below the
// 4-decimal reporting granularity. Every reporting artifact (table, bar
// chart, heatmap) goes through this one function so the printed strings
// agree cell for cell.
std::string format_fixed4(double value);

// Shortest decimal that round-trips to the same double (%.17g trimmed).
std::string format_double(double value);

}  // namespace oneshot
