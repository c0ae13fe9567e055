#pragma once

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "aperture/interval.hpp"
#include "aperture/table.hpp"

namespace aperture {

// --- Summary representation -------------------------------------------------

// A group key on one axis: a nominal label, a numeric value, or an interval.
using GroupKey = std::variant<std::string, double, Interval>;

std::string group_key_label(const GroupKey& k);

// One grid cell of a highest-density region: per-axis indices into the
// source grid plus the cell bounds, density and mass.
struct RegionCell {
    std::vector<int> index;
    std::vector<Interval> bounds;
    double density = 0.0;
    double mass = 0.0;
};

struct SummaryGroup {
    std::vector<GroupKey> keys;   // aligned with SummaryRep::key_axes
    std::vector<Cell> stats;      // aligned with SummaryRep::stat_names; missing-marked allowed
    std::vector<RegionCell> region; // non-empty only for density-mass bands
};

// A key axis of a summary. When the axis came from a classified column the
// full ordered bin list is kept, so empty bins stay recoverable.
struct KeyAxis {
    std::string name;
    std::vector<BinLabel> bins; // empty when keys are plain values
};

// Groups + statistics standing in for the original rows.
struct SummaryRep {
    std::vector<KeyAxis> key_axes;
    std::vector<std::string> stat_names;
    std::vector<SummaryGroup> groups;
    bool intervals_nested = false;   // nested bands only; disjoint otherwise
    std::vector<int> grid_shape;     // set for density-mass bands (per-axis cell count)
};

// --- Model representation ----------------------------------------------------

enum class EvaluatorKind { DensityGrid, OlsLine, PcaLoadings, AdjustmentFn };

const char* evaluator_kind_name(EvaluatorKind k);

struct AxisDomain {
    std::string name;
    double lo = 0.0;
    double hi = 1.0;
    int grid_n = 2;
};

// A fitted function over a gridded domain. `grid` holds one evaluation per
// grid cell, at cell centers, row-major with axis 0 slowest:
//   index = i0 * (n1 * n2 * ...) + i1 * (n2 * ...) + ...
struct ModelRep {
    std::vector<AxisDomain> domain;
    EvaluatorKind evaluator = EvaluatorKind::DensityGrid;
    std::vector<double> params;
    std::vector<std::string> param_names; // aligned with params
    std::vector<double> grid;
    // predict/project also emit a per-row table (fitted values, embedding
    // coordinates); it rides along with the model.
    std::optional<Table> attachment;

    std::size_t grid_size() const;
    double cell_volume() const;
    // Center coordinate of cell i along the given axis.
    double axis_center(std::size_t axis, int i) const;
    Interval axis_cell_bounds(std::size_t axis, int i) const;
};

// --- Representation ----------------------------------------------------------

// One applied tactic, in application order, with bookkeeping notes
// (dropped columns, drop counts, parameter records).
struct LineageEntry {
    std::string op;
    std::string node_id;
    std::vector<std::pair<std::string, std::string>> notes;
};

enum class RepKind { Sample, Summary, Model };

const char* rep_kind_name(RepKind k);

// The data form a visualization encodes: rows, groups+stats, or a fitted
// function. Lineage is append-only and drives all static analysis.
struct Representation {
    std::variant<Table, SummaryRep, ModelRep> payload;
    std::vector<LineageEntry> lineage;

    RepKind kind() const { return static_cast<RepKind>(payload.index()); }
    bool is_sample() const { return kind() == RepKind::Sample; }
    bool is_summary() const { return kind() == RepKind::Summary; }
    bool is_model() const { return kind() == RepKind::Model; }

    const Table& sample() const { return std::get<Table>(payload); }
    const SummaryRep& summary() const { return std::get<SummaryRep>(payload); }
    const ModelRep& model() const { return std::get<ModelRep>(payload); }
    Table& sample() { return std::get<Table>(payload); }
    SummaryRep& summary() { return std::get<SummaryRep>(payload); }
    ModelRep& model() { return std::get<ModelRep>(payload); }

    Representation with_entry(LineageEntry e) const&;
    Representation&& with_entry(LineageEntry e) &&;
};

Representation make_sample(Table t);
Representation make_summary(SummaryRep s);
Representation make_model(ModelRep m);

// Terminal output of layered combination; members keep their own kinds
// and lineages. Bundles cannot feed further tactics.
struct LayerBundle {
    std::vector<Representation> members;
};

enum class Family { Full, Sampling, Summarizing, Modeling };

const char* family_name(Family f);

// Sample with an empty tactic lineage is full disclosure; otherwise the
// family follows the representation kind.
Family representation_family(const Representation& rep);

// Walks a representation and throws ValidationError if a structural
// invariant is broken (payload/kind agreement is by construction; this
// checks lengths, group/stat arity, grid sizing, interval sanity).
void check_representation(const Representation& rep);

} // namespace aperture
