#include "aperture/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "aperture/error.hpp"

namespace aperture {

double mean_of(const std::vector<double>& v) {
    if (v.empty()) throw OpError("mean of empty set");
    double s = std::accumulate(v.begin(), v.end(), 0.0);
    return s / static_cast<double>(v.size());
}

double sample_sd(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double sorted_quantile(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) throw OpError("quantile of empty set");
    if (p < 0.0 || p > 1.0) throw OpError("quantile level out of [0, 1]");
    if (sorted.size() == 1) return sorted[0];
    double h = p * static_cast<double>(sorted.size() - 1);
    auto i = static_cast<std::size_t>(h);
    if (i + 1 >= sorted.size()) return sorted.back();
    double frac = h - static_cast<double>(i);
    return sorted[i] + frac * (sorted[i + 1] - sorted[i]);
}

double silverman_bandwidth(std::vector<double> values) {
    std::size_t n = values.size();
    if (n < 2) return 0.0;
    std::sort(values.begin(), values.end());
    double sd = sample_sd(values);
    if (sd == 0.0) return (values.back() - values.front()) / 10.0;
    double iqr = sorted_quantile(values, 0.75) - sorted_quantile(values, 0.25);
    double spread = iqr == 0.0 ? sd : std::min(sd, iqr / 1.34);
    return 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
}

double gaussian_phi(double z) {
    static const double inv_sqrt_2pi = 0.3989422804014327;
    return inv_sqrt_2pi * std::exp(-0.5 * z * z);
}

std::vector<std::size_t> hdr_prefix(const std::vector<double>& masses, double level) {
    std::vector<std::size_t> order(masses.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return masses[a] > masses[b]; });
    std::vector<std::size_t> picked;
    double total = 0.0;
    for (std::size_t idx : order) {
        if (total >= level) break;
        picked.push_back(idx);
        total += masses[idx];
    }
    if (total < level)
        throw OpError("grid mass below the requested isoband level");
    std::sort(picked.begin(), picked.end());
    return picked;
}

std::vector<std::vector<std::size_t>> connected_components(
    const std::vector<std::size_t>& cells, const std::vector<int>& shape) {
    if (shape.empty() || shape.size() > 2)
        throw OpError("connected components need a 1- or 2-d grid shape");
    std::vector<std::vector<std::size_t>> comps;
    if (cells.empty()) return comps;

    // Row-major layout: index = row * ncols + col for 2D, plain index for 1D.
    std::size_t ncols = shape.size() == 2 ? static_cast<std::size_t>(shape[1])
                                          : static_cast<std::size_t>(shape[0]);
    std::vector<std::size_t> sorted_cells = cells;
    std::sort(sorted_cells.begin(), sorted_cells.end());
    std::vector<char> seen(sorted_cells.size(), 0);
    auto member = [&](std::size_t idx) -> long {
        auto it = std::lower_bound(sorted_cells.begin(), sorted_cells.end(), idx);
        if (it == sorted_cells.end() || *it != idx) return -1;
        return it - sorted_cells.begin();
    };

    for (std::size_t start = 0; start < sorted_cells.size(); ++start) {
        if (seen[start]) continue;
        std::vector<std::size_t> comp;
        std::vector<std::size_t> stack{start};
        seen[start] = 1;
        while (!stack.empty()) {
            std::size_t pos = stack.back();
            stack.pop_back();
            std::size_t idx = sorted_cells[pos];
            comp.push_back(idx);
            std::size_t r = idx / ncols, c = idx % ncols;
            std::vector<std::size_t> nbrs;
            if (c > 0) nbrs.push_back(idx - 1);
            if (c + 1 < ncols) nbrs.push_back(idx + 1);
            if (shape.size() == 2) {
                std::size_t nrows = static_cast<std::size_t>(shape[0]);
                if (r > 0) nbrs.push_back(idx - ncols);
                if (r + 1 < nrows) nbrs.push_back(idx + ncols);
            }
            for (std::size_t nb : nbrs) {
                long p = member(nb);
                if (p >= 0 && !seen[p]) {
                    seen[p] = 1;
                    stack.push_back(static_cast<std::size_t>(p));
                }
            }
        }
        std::sort(comp.begin(), comp.end());
        comps.push_back(std::move(comp));
    }
    std::sort(comps.begin(), comps.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return comps;
}

} // namespace aperture
