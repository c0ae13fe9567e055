#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "aperture/representation.hpp"
#include "aperture/rng.hpp"

namespace aperture::tactics {

// ---------------------------------------------------------------- params

struct BinSpec {
    enum class Mode { Edges, EqualWidth, EqualFrequency };
    Mode mode = Mode::Edges;
    std::vector<double> edges;                     // Mode::Edges, ascending
    int count = 0;                                 // equal-width / equal-frequency
    std::optional<std::pair<double, double>> range; // equal-width override

    static BinSpec from_edges(std::vector<double> e);
    static BinSpec equal_width(int count,
                               std::optional<std::pair<double, double>> range = {});
    static BinSpec equal_frequency(int count);
    std::string describe() const;
};

struct StatSpec {
    enum class Kind { Count, Sum, Mean, Median, Min, Max, Quantile };
    Kind kind = Kind::Count;
    std::string column; // empty for Count
    double p = 0.0;     // Quantile only

    static StatSpec parse(const std::string& text); // "count", "mean(x)", "q0.25(x)"
    std::string name() const;
};

struct NoiseModel {
    enum class Family { Gaussian, Laplace };
    Family family = Family::Gaussian;
    double param = 0.0; // sigma (gaussian) or scale (laplace), >= 0
    std::vector<std::string> columns;
};

struct AdjustmentSpec {
    double pivot = 0.0;
    double u_max = 1.0;               // > 0
    std::string value_column;
    std::string uncertainty_column;
    double weight(double u) const;    // clamp(1 - u/u_max, 0, 1)
};

struct BandSpec {
    enum class Mode { Cuts, Quantiles, MassLevels };
    Mode mode = Mode::Quantiles;
    std::string column;          // sample modes
    std::vector<double> levels;  // ascending
};

struct KdeSpec {
    std::vector<std::string> columns;                // 1 or 2 axes
    std::vector<double> bandwidth;                   // per axis; <=0 means auto
    std::vector<int> grid_n;                         // per axis, >= 2
    std::vector<std::optional<std::pair<double, double>>> range; // per-axis override
};

// ---------------------------------------------------------------- tactics
//
// Every operation consumes a representation of the kind its contract names,
// produces a new representation, and appends one lineage entry describing
// what it did (including dropped-row counts). Inputs are never mutated.

Representation classify(const Representation& in, const std::string& column,
                        const BinSpec& bins, const std::string& node_id = "");

Representation categorize(const Representation& in, const std::string& column,
                          const std::map<std::string, std::string>& mapping,
                          const std::optional<std::string>& fallback,
                          const std::string& node_id = "");

Representation aggregate(const Representation& in,
                         const std::vector<std::string>& group_by,
                         const std::vector<StatSpec>& stats,
                         const std::string& node_id = "");

Representation band(const Representation& in, const BandSpec& spec,
                    const std::string& node_id = "");

Representation derive(const Representation& in, const std::string& expr_text,
                      const std::string& out_column, const std::string& node_id = "");

Representation encode_select(const Representation& in,
                             const std::vector<std::string>& columns,
                             const std::string& node_id = "");

Representation subsample(const Representation& in, std::size_t n, bool replacement,
                         Seed seed, const std::string& node_id = "");

Representation noise(const Representation& in, const NoiseModel& model, Seed seed,
                     const std::string& node_id = "");

Representation permute(const Representation& in, const std::string& column, Seed seed,
                       const std::string& node_id = "");

Representation smooth_kde(const Representation& in, const KdeSpec& spec,
                          const std::string& node_id = "");

Representation magnitude_adjust(const Representation& in, const AdjustmentSpec& spec,
                                const std::string& node_id = "");

Representation predict_ols(const Representation& in, const std::string& y,
                           const std::vector<std::string>& xs,
                           const std::string& node_id = "");

Representation project_pca(const Representation& in,
                           const std::vector<std::string>& columns, std::size_t k,
                           const std::string& node_id = "");

Representation full_disclosure(const Table& t);

// Seeded Fisher-Yates helpers, exposed for tests and the signals module.
// `shuffle_prefix` runs the ascending prefix pass for the first n positions
// of 0..N-1 and returns the selected indices in draw order.
std::vector<std::size_t> shuffle_prefix(std::size_t N, std::size_t n, RngStream& rng);

} // namespace aperture::tactics
