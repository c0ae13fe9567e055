#pragma once

#include <string>

namespace aperture {

// Shortest round-trip decimal representation of a double. All serialized
// numbers (CSV, JSON, SVG) go through this so byte-identical goldens are
// feasible across platforms. Integral values print without an exponent or
// trailing ".0" ("3", not "3.0").
std::string format_double(double v);

} // namespace aperture
