#pragma once

#include <cstddef>
#include <vector>

namespace aperture {

double mean_of(const std::vector<double>& v);
double sample_sd(const std::vector<double>& v); // n-1 denominator

// The one quantile convention used everywhere: linear interpolation at
// rank p*(n-1) over ascending values. p in [0,1], values non-empty.
double sorted_quantile(const std::vector<double>& sorted, double p);

// Silverman's rule: 0.9 * min(sd, IQR/1.34) * n^(-1/5), with IQR=0 falling
// back to sd and sd=0 falling back to range/10. Returns 0 for degenerate
// (constant) data; callers treat that as an error.
double silverman_bandwidth(std::vector<double> values);

// Standard normal density.
double gaussian_phi(double z);

// Indices of the smallest set of cells (taken in descending mass order,
// ties broken by index) whose total mass reaches `level`. Throws OpError
// when the whole grid carries less mass than requested.
std::vector<std::size_t> hdr_prefix(const std::vector<double>& masses, double level);

// Connected components of a cell set on a grid of the given shape
// (4-connectivity in 2D, 2-connectivity in 1D). Returns one vector of
// member cell indices per component, in deterministic order.
std::vector<std::vector<std::size_t>> connected_components(
    const std::vector<std::size_t>& cells, const std::vector<int>& shape);

} // namespace aperture
