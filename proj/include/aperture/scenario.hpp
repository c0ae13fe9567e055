#pragma once

#include <string>
#include <vector>

#include "aperture/rng.hpp"
#include "aperture/table.hpp"

namespace aperture {

// A reproducible worked example: a seeded synthetic dataset plus a set of
// disclosure pipelines over it. The dataset is a pure function of
// (name, seed, rows); the constants behind each generator are documented
// in docs/scenarios.md.
struct ScenarioSpec {
    std::string name; // fred | anne | claudia
    Seed seed{0};
    std::size_t rows = 0; // 0 = scenario default (150 / 260 / 60)
};

const std::vector<std::string>& scenario_names();

// Throws ValidationError for unknown names.
Table scenario_table(const ScenarioSpec& spec);

struct ScenarioVariant {
    std::string name;          // artifact directory name
    std::string pipeline_json; // complete pipeline document
};

// The disclosure variants of one scenario, in fixed order.
std::vector<ScenarioVariant> scenario_variants(const std::string& name);

} // namespace aperture
