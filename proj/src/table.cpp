#include "aperture/table.hpp"

#include <cmath>
#include <unordered_set>

#include "aperture/error.hpp"

namespace aperture {

const char* column_kind_name(ColumnKind k) {
    switch (k) {
        case ColumnKind::Continuous: return "continuous";
        case ColumnKind::Ordinal: return "ordinal";
        case ColumnKind::Nominal: return "nominal";
    }
    return "unknown";
}

std::optional<std::size_t> Table::find_column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i].name == name) return i;
    return std::nullopt;
}

std::size_t Table::column_index(const std::string& name) const {
    if (auto i = find_column(name)) return *i;
    throw ValidationError("unknown column '" + name + "'");
}

const Column& Table::column(const std::string& name) const {
    return columns[column_index(name)];
}

std::vector<double> Table::numeric_values(std::size_t col) const {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& row : rows)
        if (is_number(row[col])) out.push_back(as_number(row[col]));
    return out;
}

void Table::check_invariants() const {
    std::unordered_set<std::string> names;
    for (const auto& c : columns) {
        if (c.name.empty()) throw ValidationError("empty column name");
        if (!names.insert(c.name).second)
            throw ValidationError("duplicate column name '" + c.name + "'");
    }
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != columns.size())
            throw ValidationError("row " + std::to_string(r) + " has " +
                                  std::to_string(rows[r].size()) + " cells, expected " +
                                  std::to_string(columns.size()));
        for (std::size_t c = 0; c < columns.size(); ++c) {
            const Cell& cell = rows[r][c];
            if (is_missing(cell)) continue;
            const bool numeric_kind = columns[c].kind != ColumnKind::Nominal;
            if (numeric_kind) {
                if (!is_number(cell))
                    throw ValidationError("non-numeric cell in " +
                                          std::string(column_kind_name(columns[c].kind)) +
                                          " column '" + columns[c].name + "'");
                if (!std::isfinite(as_number(cell)))
                    throw ValidationError("non-finite cell in column '" + columns[c].name + "'");
            } else if (!is_text(cell)) {
                throw ValidationError("non-string cell in nominal column '" + columns[c].name + "'");
            }
        }
    }
}

ColumnKind infer_column_kind(const std::vector<Cell>& values) {
    if (values.empty()) throw ValidationError("no values");
    for (const auto& v : values) {
        if (is_missing(v)) continue;
        if (!is_number(v)) return ColumnKind::Nominal;
    }
    return ColumnKind::Continuous;
}

} // namespace aperture
