#pragma once

#include <string>

namespace aperture {

// A numeric interval with explicit endpoint closure. Bin intervals are
// right-open with the last bin closed; equal-frequency bins are left-open
// with the first bin closed (boundary values go to the lower bin).
struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool lo_closed = true;
    bool hi_closed = false;

    bool contains(double v) const {
        if (v < lo || v > hi) return false;
        if (v == lo && !lo_closed) return false;
        if (v == hi && !hi_closed) return false;
        return true;
    }

    double width() const { return hi - lo; }

    // "[0, 1.5)" style label; used as the cell value of partition columns.
    std::string label() const;

    bool operator==(const Interval& o) const {
        return lo == o.lo && hi == o.hi && lo_closed == o.lo_closed && hi_closed == o.hi_closed;
    }
};

} // namespace aperture
