#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "aperture/representation.hpp"
#include "aperture/rng.hpp"

namespace aperture {

// ------------------------------------------------------------------- graph

struct PipelineNode {
    std::string id;
    std::string op;
    nlohmann::json params; // object; shape depends on op
};

struct PipelineEdge {
    std::string from;
    std::string to;
    int slot = 0; // input slot of `to`
};

// The pipeline IR: a DAG of tactic applications. Parsed from the JSON
// document described in docs/pipeline-format.md.
struct PipelineGraph {
    std::vector<PipelineNode> nodes;
    std::vector<PipelineEdge> edges;
    std::vector<std::string> outputs;
    std::vector<nlohmann::json> signals; // raw signal declarations, if any

    const PipelineNode* find(const std::string& id) const;
    const PipelineNode& node(const std::string& id) const; // throws on miss
    // Incoming edges of a node, ordered by slot.
    std::vector<const PipelineEdge*> in_edges(const std::string& id) const;
    // Node ids in a fixed topological order (declaration order among ready
    // nodes, so the result is deterministic).
    std::vector<std::string> topo_order() const;
    std::vector<std::string> source_ids() const;
};

// Parses and structurally checks a pipeline document. Throws ParseError on
// syntax errors, duplicate/unknown ids, unknown ops, arity violations and
// cycles.
PipelineGraph parse_pipeline(const std::string& text);

// ------------------------------------------------------------ kind checker

// Static representation kind, as propagated by validate_pipeline. Layer
// bundles are terminal, so Bundle never feeds another node.
enum class StaticKind { Sample, Summary, Model, Bundle };

const char* static_kind_name(StaticKind k);

struct TypeError {
    std::string node_id;
    std::string message;
};

// Output kind of one node given its input kinds; throws ValidationError
// when the combination is inadmissible (the message becomes a TypeError).
StaticKind infer_kind(const PipelineNode& n, const std::vector<StaticKind>& inputs);

// Propagates kinds from sources and checks every node's parameters
// statically. Empty result = valid.
std::vector<TypeError> validate_pipeline(const PipelineGraph& g);

// Static kinds of all nodes in a valid graph (node id -> kind).
std::map<std::string, StaticKind> inferred_kinds(const PipelineGraph& g);

// ---------------------------------------------------------------- combine

struct CombineSpec {
    enum class Mode { JoinOnKeys, ConcatRows, Layer };
    Mode mode = Mode::Layer;
    std::vector<std::string> keys; // JoinOnKeys only
};

using NodeOutput = std::variant<Representation, LayerBundle>;

// Inner join / row concatenation / layering per the CombineSpec contract.
NodeOutput combine(const std::vector<Representation>& reps, const CombineSpec& spec,
                   const std::string& node_id = "");

// --------------------------------------------------------------- executor

// Runs a validated graph over bound source tables. Randomized nodes draw
// from a sub-seed derived from (seed, node id), so results are independent
// of evaluation order and of edits elsewhere in the graph. Runtime errors
// carry the failing node's id.
std::map<std::string, NodeOutput> execute(const PipelineGraph& g,
                                          const std::map<std::string, Table>& inputs,
                                          Seed seed);

} // namespace aperture
