#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "aperture/pipeline.hpp"

namespace aperture {

// ---------------------------------------------------------------- findings

enum class FindingCategory { Confuser, Jumbler, HallucinatorRisk, MisleaderRisk };

const char* finding_category_name(FindingCategory c);

struct Finding {
    FindingCategory category = FindingCategory::Confuser;
    std::string rule_id;                // one of the shipped rulebook ids
    std::string node_id;                // node that triggered the rule
    std::vector<std::string> subject;   // column/axis names involved
    std::string justification;          // rule description plus specifics
};

struct RuleInfo {
    std::string id;
    FindingCategory category;
    std::string trigger;     // static condition that fires the rule
    std::string description; // what the vulnerability means for viewers
};

// The shipped static rulebook, R1..R8. docs/rulebook.md carries the same
// table with discussion.
const std::vector<RuleInfo>& rulebook();

struct AnalysisOptions {
    // R7: a classify is flagged when known rows / bins falls below this.
    std::size_t min_bin_occupancy = 5;
};

// ---------------------------------------------------------------- schemas

// What is statically known about a source table. Analysis is purely
// static: with no declared schema it degrades gracefully (no per-column
// statuses, no occupancy rule) rather than guessing.
struct SourceSchema {
    std::vector<std::string> columns;
    std::optional<std::size_t> rows;
};

// Schemas from the optional `columns`/`rows` params of source nodes.
std::map<std::string, SourceSchema> declared_schemas(const PipelineGraph& g);
// Schemas from actually bound tables (keyed by source node id).
std::map<std::string, SourceSchema> schemas_of_tables(const std::map<std::string, Table>& inputs);

// ----------------------------------------------------------------- rules

std::vector<Finding> detect_vulnerabilities(const PipelineGraph& g,
                                            const std::map<std::string, SourceSchema>& schemas,
                                            const AnalysisOptions& opts = {});
// Convenience: uses the schemas declared in the graph itself.
std::vector<Finding> detect_vulnerabilities(const PipelineGraph& g,
                                            const AnalysisOptions& opts = {});

// ---------------------------------------------------------------- report

enum class ColumnStatus { Revealed, Distorted, Hidden };

const char* column_status_name(ColumnStatus s);

struct ColumnDisclosure {
    std::string column;
    ColumnStatus status = ColumnStatus::Revealed;
    std::vector<std::string> causes; // node ids that distorted or hid it
};

struct OutputDisclosure {
    std::string output_id;
    std::string kind;   // Sample / Summary / Model / Bundle
    std::string family; // full / sampling / summarizing / modeling / layer(...)
    std::vector<ColumnDisclosure> columns; // one per known original column
};

struct DisclosureReport {
    std::vector<OutputDisclosure> outputs;
    std::vector<Finding> findings;
    std::string caveat; // fixed note on out-of-scope perceptual effects
};

// Static disclosure report: per-output column statuses (revealed /
// distorted / hidden, with causing nodes), family tags and findings.
// Statuses come from lineage structure alone, never from data.
DisclosureReport disclosure_report(const PipelineGraph& g,
                                   const std::map<std::string, SourceSchema>& schemas,
                                   const AnalysisOptions& opts = {});

} // namespace aperture
