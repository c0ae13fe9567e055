#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "aperture/pipeline.hpp"
#include "aperture/representation.hpp"

namespace aperture {

// A task-relevant query over the data whose preservation or hiding is a
// design goal. Signals are declared in the pipeline document under
// `signals` and evaluated against whatever representation an output
// discloses.
struct SignalSpec {
    enum class Kind {
        Exceedance,            // fraction of values above a threshold
        Quantile,              // value at probability p
        ModeCount,             // local maxima with enough prominence
        ClusterCount,          // connected HDR components at a mass level
        ClusterSummary,        // per-component centroid and bounding box
        ReidentificationRisk,  // occupancy / nearest-neighbor match
    };

    Kind kind = Kind::Exceedance;
    std::string id;                    // report label; defaults to describe()
    std::vector<std::string> columns;  // target columns/axes

    double threshold = 0.0;   // Exceedance; finite
    double p = 0.5;           // Quantile; in [0, 1]
    double prominence = 0.0;  // ModeCount; >= 0, relative to the tallest peak
    double level = 0.5;       // ClusterCount/ClusterSummary; in (0, 1)
    std::size_t k = 1;        // ReidentificationRisk; >= 1

    // Strict parse: unknown keys, bad ranges and missing fields throw
    // ParseError. Accepts either "column": "x" or "columns": ["x","y"].
    static SignalSpec from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;

    // Human-readable label, e.g. "exceedance(tons > 1000)".
    std::string describe() const;
    // Report label: the declared id, or describe() when none was given.
    std::string name() const;
};

const char* signal_kind_name(SignalSpec::Kind k);

// Parses the `signals` array of a pipeline document.
std::vector<SignalSpec> parse_signals(const nlohmann::json& arr);

// One connected high-density component: mass-weighted center, per-axis
// bounding box, and total mass.
struct ClusterInfo {
    std::vector<double> centroid;
    std::vector<Interval> bbox;
    double mass = 0.0;
};

// Result of evaluating a signal: a number (optionally with a bracketing
// interval when the representation only bounds the answer), a cluster
// list, or "unanswerable" when the information is absent by construction.
struct SignalValue {
    enum class Kind { Number, Clusters, Unanswerable };

    Kind kind = Kind::Unanswerable;
    double number = 0.0;
    std::optional<std::pair<double, double>> bound;
    std::vector<ClusterInfo> clusters;

    bool numeric() const { return kind == Kind::Number; }
    bool unanswerable() const { return kind == Kind::Unanswerable; }

    static SignalValue none();
    static SignalValue of(double v);
    static SignalValue of(double v, double lo, double hi);
    static SignalValue of_clusters(std::vector<ClusterInfo> cs);
};

// Evaluates a signal on a representation. `original` is the auxiliary
// input required by the nearest-neighbor re-identification check; all
// other signals ignore it. Mismatched signal/representation pairs yield
// an unanswerable value, parameter errors throw.
SignalValue eval_signal(const SignalSpec& s, const Representation& rep,
                        const Table* original = nullptr);

// How much a disclosed representation distorts one signal relative to the
// original table. Error fields are present iff both values are numeric.
struct Distortion {
    std::string signal;
    SignalValue on_original;
    SignalValue on_disclosed;
    std::optional<double> abs_error;
    std::optional<double> rel_error;
    bool hidden = false;  // disclosed side is unanswerable
};

Distortion distortion(const SignalSpec& s, const Table& original,
                      const Representation& disclosed);

// Picks the bound source table that carries every column the signal
// mentions; that table is the "original" side of its distortion.
const Table& signal_original(const SignalSpec& s, const PipelineGraph& g,
                             const std::map<std::string, Table>& inputs);

// ------------------------------------------------------------------ sweep

// One varied node parameter and the values to try.
struct SweepParameter {
    std::string node_id;
    std::string param;
    std::vector<double> values;
};

struct SweepObjective {
    enum class Goal { Preserve, Hide };
    SignalSpec signal;
    Goal goal = Goal::Preserve;
};

// One grid point: the parameter values (aligned with the sweep
// parameters), per-objective distortions, and the Pareto flag.
struct SweepPoint {
    std::vector<double> values;
    std::vector<Distortion> distortions;
    bool pareto = false;
};

// Exhaustive grid evaluation over the cross product of parameter values
// (at most 10^4 points), in lexicographic order with the first parameter
// slowest. A point is Pareto-flagged when no other point matches or beats
// it on every objective and strictly beats it on one: preserve goals want
// smaller error, hide goals want larger error or a hidden signal.
std::vector<SweepPoint> sweep(const PipelineGraph& g,
                              const std::vector<SweepParameter>& vary,
                              const std::vector<SweepObjective>& objectives,
                              const std::map<std::string, Table>& inputs, Seed seed);

// Parses {"vary": [{"node": .., "param": .., "values": [..]}],
//         "objectives": [{"signal": {..}, "goal": "preserve"|"hide"}]}.
std::pair<std::vector<SweepParameter>, std::vector<SweepObjective>> parse_sweep_config(
    const nlohmann::json& j);

} // namespace aperture
