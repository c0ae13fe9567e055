#include "aperture/scenario.hpp"

#include <cmath>
#include <cstdio>

#include "aperture/error.hpp"

namespace aperture {

namespace {

// fred: three well-separated clusters of individuals in two measured
// dimensions. Component means are far apart relative to the within-
// cluster spread so an 85% highest-density region resolves all three.
constexpr double kFredMeans[3][2] = {{2.5, 3.0}, {8.0, 7.0}, {12.0, 2.5}};
constexpr double kFredSd = 0.7;

Table fred_table(Seed seed, std::size_t n) {
    RngStream rng(derive_subseed(seed, "scenario:fred"));
    Table t;
    t.columns = {Column{"x", ColumnKind::Continuous, {}, {}},
                 Column{"y", ColumnKind::Continuous, {}, {}}};
    for (std::size_t i = 0; i < n; ++i) {
        const double* mean = kFredMeans[i % 3]; // equal thirds, deterministic
        double x = mean[0] + kFredSd * rng.normal();
        double y = mean[1] + kFredSd * rng.normal();
        t.rows.push_back({Cell{x}, Cell{y}});
    }
    t.source_id = "fred";
    return t;
}

// anne: weekly tonnage, right-skewed with a second lump near 1150. Nine
// of every 26 weeks come from the high regime, so the default 260 weeks
// split 170/90.
Table anne_table(Seed seed, std::size_t n) {
    RngStream rng(derive_subseed(seed, "scenario:anne"));
    Table t;
    t.columns = {Column{"week", ColumnKind::Continuous, {}, {}},
                 Column{"tons", ColumnKind::Continuous, {}, {}}};
    for (std::size_t i = 0; i < n; ++i) {
        bool high = (i % 26) < 9;
        double tons = high ? 1150.0 + 130.0 * rng.normal()
                           : std::exp(6.35 + 0.3 * rng.normal());
        t.rows.push_back({Cell{static_cast<double>(i + 1)}, Cell{tons}});
    }
    t.source_id = "anne";
    return t;
}

// claudia: one row per county with an estimated rate and its
// uncertainty. Two groups of counties sit around different rate levels;
// uncertainty is independent of the rate.
Table claudia_table(Seed seed, std::size_t n) {
    RngStream rng(derive_subseed(seed, "scenario:claudia"));
    Table t;
    t.columns = {Column{"county", ColumnKind::Nominal, {}, {}},
                 Column{"value", ColumnKind::Continuous, {}, {}},
                 Column{"uncertainty", ColumnKind::Continuous, {}, {}}};
    for (std::size_t i = 0; i < n; ++i) {
        std::string label = (i + 1 < 10 ? "c0" : "c") + std::to_string(i + 1);
        bool high = i % 5 < 2; // 40% of counties in the high-rate group
        double value = (high ? 68.0 + 7.0 * rng.normal() : 38.0 + 9.0 * rng.normal());
        double uncertainty = 0.05 + 0.9 * rng.uniform();
        value = std::round(value * 10.0) / 10.0;
        uncertainty = std::round(uncertainty * 100.0) / 100.0;
        t.rows.push_back({Cell{label}, Cell{value}, Cell{uncertainty}});
    }
    t.source_id = "claudia";
    return t;
}

// --------------------------------------------------------- variant specs

const char* kFredSignals = R"==(
    {"id": "clusters", "kind": "cluster_count", "columns": ["x", "y"], "level": 0.85},
    {"id": "cluster_shapes", "kind": "cluster_summary", "columns": ["x", "y"], "level": 0.85},
    {"id": "reid", "kind": "reidentification_risk", "columns": ["x", "y"], "k": 5}
)==";

std::string fred_pipeline(const std::string& body, const std::string& description) {
    return std::string("{\n\"description\": \"") + description + "\",\n" +
           R"==("nodes": [
    {"id": "people", "op": "source", "params": {"table": "fred", "rows": 150, "columns": ["x", "y"]}},
)==" + body +
           "\n],\n\"signals\": [" + kFredSignals + "]\n}";
}

std::vector<ScenarioVariant> fred_variants() {
    std::vector<ScenarioVariant> v;
    v.push_back({"full", fred_pipeline(R"==(
    {"id": "disclose", "op": "full_disclosure", "params": {}}
  ],
  "edges": [["people", "disclose", 0]],
  "outputs": ["disclose")==",
                                       "every individual disclosed as a scatter")});
    v.push_back({"contour", fred_pipeline(R"==(
    {"id": "density", "op": "smooth_kde", "params": {"columns": ["x", "y"], "bandwidth": [0.6, 0.6], "grid": [40, 40]}},
    {"id": "band85", "op": "band", "params": {"mode": "mass", "levels": [0.85]}}
  ],
  "edges": [["people", "density", 0], ["density", "band85", 0]],
  "outputs": ["band85")==",
                                          "85% containment region of a smoothed density")});
    v.push_back({"heat8", fred_pipeline(R"==(
    {"id": "xbin", "op": "classify", "params": {"column": "x", "bins": {"equal_width": 8, "range": [0, 48]}}},
    {"id": "ybin", "op": "classify", "params": {"column": "y", "bins": {"equal_width": 8, "range": [0, 48]}}},
    {"id": "counts", "op": "aggregate", "params": {"group_by": ["x__bin", "y__bin"], "stats": ["count"]}}
  ],
  "edges": [["people", "xbin", 0], ["xbin", "ybin", 0], ["ybin", "counts", 0]],
  "outputs": ["counts")==",
                                        "coarse 8x8 occupancy heatmap")});
    v.push_back({"heat40", fred_pipeline(R"==(
    {"id": "xbin", "op": "classify", "params": {"column": "x", "bins": {"equal_width": 40}}},
    {"id": "ybin", "op": "classify", "params": {"column": "y", "bins": {"equal_width": 40}}},
    {"id": "counts", "op": "aggregate", "params": {"group_by": ["x__bin", "y__bin"], "stats": ["count"]}}
  ],
  "edges": [["people", "xbin", 0], ["xbin", "ybin", 0], ["ybin", "counts", 0]],
  "outputs": ["counts")==",
                                         "fine 40x40 occupancy heatmap")});
    v.push_back({"noise_low", fred_pipeline(R"==(
    {"id": "jitter", "op": "noise", "params": {"family": "laplace", "scale": 0.25, "columns": ["x", "y"]}}
  ],
  "edges": [["people", "jitter", 0]],
  "outputs": ["jitter")==",
                                            "Laplace-noised positions, scale 0.25")});
    v.push_back({"noise_high", fred_pipeline(R"==(
    {"id": "jitter", "op": "noise", "params": {"family": "laplace", "scale": 1.0, "columns": ["x", "y"]}}
  ],
  "edges": [["people", "jitter", 0]],
  "outputs": ["jitter")==",
                                             "Laplace-noised positions, scale 1.0")});
    return v;
}

const char* kAnneSignals = R"==(
    {"id": "exceed1000", "kind": "exceedance", "column": "tons", "threshold": 1000},
    {"id": "median", "kind": "quantile", "column": "tons", "p": 0.5},
    {"id": "modes", "kind": "mode_count", "column": "tons", "prominence": 0.15}
)==";

std::string anne_pipeline(const std::string& body, const std::string& description) {
    return std::string("{\n\"description\": \"") + description + "\",\n" +
           R"==("nodes": [
    {"id": "weeks", "op": "source", "params": {"table": "anne", "rows": 260, "columns": ["week", "tons"]}},
)==" + body +
           "\n],\n\"signals\": [" + kAnneSignals + "]\n}";
}

std::vector<ScenarioVariant> anne_variants() {
    std::vector<ScenarioVariant> v;
    v.push_back({"full", anne_pipeline(R"==(
    {"id": "disclose", "op": "full_disclosure", "params": {}}
  ],
  "edges": [["weeks", "disclose", 0]],
  "outputs": ["disclose")==",
                                       "every weekly value disclosed as a dotplot")});
    v.push_back({"five_band", anne_pipeline(R"==(
    {"id": "tons_only", "op": "encode_select", "params": {"columns": ["tons"]}},
    {"id": "quartiles", "op": "band", "params": {"mode": "quantiles", "levels": [0, 0.25, 0.5, 0.75, 1], "column": "tons"}}
  ],
  "edges": [["weeks", "tons_only", 0], ["tons_only", "quartiles", 0]],
  "outputs": ["quartiles")==",
                                            "five-number banding of the weekly values")});
    v.push_back({"histogram", anne_pipeline(R"==(
    {"id": "bins", "op": "classify", "params": {"column": "tons", "bins": {"equal_width": 30, "range": [0, 2400]}}},
    {"id": "counts", "op": "aggregate", "params": {"group_by": ["tons__bin"], "stats": ["count"]}}
  ],
  "edges": [["weeks", "bins", 0], ["bins", "counts", 0]],
  "outputs": ["counts")==",
                                            "histogram whose bins put the 1000 benchmark mid-bin")});
    for (const char* bw : {"120", "240", "480"}) {
        std::string name = std::string("kde_h") + bw;
        v.push_back({name, anne_pipeline(R"==(
    {"id": "density", "op": "smooth_kde", "params": {"columns": ["tons"], "bandwidth": [)==" +
                                             std::string(bw) + R"==(], "grid": [128]}}
  ],
  "edges": [["weeks", "density", 0]],
  "outputs": ["density")==",
                                         "kernel-smoothed density, bandwidth " +
                                             std::string(bw))});
    }
    return v;
}

const char* kClaudiaSignals = R"==(
    {"id": "median_value", "kind": "quantile", "column": "value", "p": 0.5},
    {"id": "exceed60", "kind": "exceedance", "column": "value", "threshold": 60}
)==";

std::string claudia_pipeline(const std::string& body, const std::string& description) {
    return std::string("{\n\"description\": \"") + description + "\",\n" +
           R"==("nodes": [
    {"id": "counties", "op": "source", "params": {"table": "claudia", "rows": 60, "columns": ["county", "value", "uncertainty"]}},
)==" + body +
           "\n],\n\"signals\": [" + kClaudiaSignals + "]\n}";
}

std::vector<ScenarioVariant> claudia_variants() {
    std::vector<ScenarioVariant> v;
    v.push_back({"palette", claudia_pipeline(R"==(
    {"id": "value_bins", "op": "classify", "params": {"column": "value", "bins": {"equal_width": 4}}},
    {"id": "unc_bins", "op": "classify", "params": {"column": "uncertainty", "bins": {"equal_width": 2, "range": [0, 1]}}},
    {"id": "cells", "op": "aggregate", "params": {"group_by": ["value__bin", "uncertainty__bin"], "stats": ["count", "mean(value)"]}}
  ],
  "edges": [["counties", "value_bins", 0], ["value_bins", "unc_bins", 0], ["unc_bins", "cells", 0]],
  "outputs": ["cells")==",
                                             "hierarchical value-by-uncertainty binning")});
    v.push_back({"vsup_adjust", claudia_pipeline(R"==(
    {"id": "suppress", "op": "magnitude_adjust", "params": {"pivot": 50, "u_max": 1.0, "value_column": "value", "uncertainty_column": "uncertainty"}},
    {"id": "rates", "op": "encode_select", "params": {"columns": ["county", "value"]}}
  ],
  "edges": [["counties", "suppress", 0], ["suppress", "rates", 0]],
  "outputs": ["rates")==",
                                                 "uncertainty-weighted pull toward the pivot")});
    return v;
}

} // namespace

const std::vector<std::string>& scenario_names() {
    static const std::vector<std::string> names{"fred", "anne", "claudia"};
    return names;
}

Table scenario_table(const ScenarioSpec& spec) {
    if (spec.name == "fred") return fred_table(spec.seed, spec.rows ? spec.rows : 150);
    if (spec.name == "anne") return anne_table(spec.seed, spec.rows ? spec.rows : 260);
    if (spec.name == "claudia") return claudia_table(spec.seed, spec.rows ? spec.rows : 60);
    throw ValidationError("unknown scenario '" + spec.name + "' (fred, anne, claudia)");
}

std::vector<ScenarioVariant> scenario_variants(const std::string& name) {
    if (name == "fred") return fred_variants();
    if (name == "anne") return anne_variants();
    if (name == "claudia") return claudia_variants();
    throw ValidationError("unknown scenario '" + name + "' (fred, anne, claudia)");
}

} // namespace aperture
