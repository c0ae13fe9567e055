#pragma once

// Helpers shared by the tactic translation units. Not installed.

#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "aperture/error.hpp"
#include "aperture/format.hpp"
#include "aperture/representation.hpp"

namespace aperture::tactics::detail {

using Notes = std::vector<std::pair<std::string, std::string>>;

inline const Table& expect_sample(const Representation& in, const char* op) {
    if (in.kind() != RepKind::Sample)
        throw ValidationError(std::string(op) + " expects a sample input");
    return in.sample();
}

inline const Column& numeric_column(const Table& t, const std::string& name, const char* op) {
    const Column& c = t.column(name);
    if (c.kind == ColumnKind::Nominal)
        throw ValidationError(std::string(op) + " needs a numeric column, '" + name +
                              "' is nominal");
    return c;
}

inline Representation stamp(const Representation& in,
                            std::variant<Table, SummaryRep, ModelRep> payload,
                            const std::string& op, const std::string& node_id, Notes notes) {
    LineageEntry e;
    e.op = op;
    e.node_id = node_id;
    e.notes = std::move(notes);
    Representation out;
    out.payload = std::move(payload);
    out.lineage = in.lineage;
    out.lineage.push_back(std::move(e));
    return out;
}

inline std::string join(const std::vector<std::string>& parts, const char* sep = ",") {
    std::string s;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) s += sep;
        s += parts[i];
    }
    return s;
}

inline std::string join_numbers(const std::vector<double>& v) {
    std::vector<std::string> parts;
    parts.reserve(v.size());
    for (double x : v) parts.push_back(format_double(x));
    return join(parts);
}

} // namespace aperture::tactics::detail
