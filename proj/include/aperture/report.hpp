#pragma once

#include <string>
#include <vector>

#include "aperture/analysis.hpp"
#include "aperture/signals.hpp"

namespace aperture {

// A signal distortion attributed to the output it was measured against.
struct SignalReport {
    std::string output_id;
    Distortion distortion;
};

// Key order is fixed so report bytes are stable across runs.
nlohmann::ordered_json signal_value_to_json(const SignalValue& v);
nlohmann::ordered_json distortion_to_json(const Distortion& d);
nlohmann::ordered_json finding_to_json(const Finding& f);
nlohmann::ordered_json report_to_json(const DisclosureReport& report,
                                      const std::vector<SignalReport>& signals = {});

// Plain-text rendering of the same content.
std::string report_to_text(const DisclosureReport& report,
                           const std::vector<SignalReport>& signals = {});

// Structural check against the shipped report schema
// (docs/report-schema.md). Returns problems; empty means valid.
std::vector<std::string> validate_report_json(const nlohmann::json& j);

// Sweep results as a JSON array and as a flat CSV table (one row per
// grid point, one error column per objective).
nlohmann::ordered_json sweep_to_json(const std::vector<SweepPoint>& points,
                                     const std::vector<SweepParameter>& vary,
                                     const std::vector<SweepObjective>& objectives);
std::string sweep_to_csv(const std::vector<SweepPoint>& points,
                         const std::vector<SweepParameter>& vary,
                         const std::vector<SweepObjective>& objectives);

// Flat-file forms of the representations themselves: summaries as CSV
// (one row per group: key labels, then statistics; band regions are
// carried by the JSON report and the SVG, not the CSV), models as JSON.
std::string summary_to_csv(const SummaryRep& s);
nlohmann::ordered_json model_to_json(const ModelRep& m);

} // namespace aperture
