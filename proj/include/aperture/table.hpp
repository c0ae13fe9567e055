#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "aperture/cell.hpp"
#include "aperture/interval.hpp"

namespace aperture {

enum class ColumnKind { Continuous, Ordinal, Nominal };

const char* column_kind_name(ColumnKind k);

// One labelled partition produced by classify; kept on the output column so
// downstream operations (aggregate, rendering) recover interval bounds and
// the full bin list, including bins no value landed in.
struct BinLabel {
    std::string label;
    Interval bounds;
};

struct Column {
    std::string name;
    ColumnKind kind = ColumnKind::Continuous;
    // Ordinal only: admissible values in declared ascending order.
    std::vector<double> ordinal_levels;
    // Set by classify on its output label column; ascending by interval.
    std::vector<BinLabel> bins;
};

// Sample-based data: typed columns, row-major cells, provenance id.
struct Table {
    std::vector<Column> columns;
    std::vector<std::vector<Cell>> rows;
    std::string source_id;

    std::size_t row_count() const { return rows.size(); }
    std::size_t column_count() const { return columns.size(); }

    // Index of a named column, or nullopt.
    std::optional<std::size_t> find_column(const std::string& name) const;
    // Same, but throws ValidationError naming the column.
    std::size_t column_index(const std::string& name) const;
    const Column& column(const std::string& name) const;

    // Non-missing numeric values of a column, in row order.
    std::vector<double> numeric_values(std::size_t col) const;

    // Throws ValidationError if a structural invariant is broken: ragged
    // rows, duplicate or empty column names, non-finite numbers, or cell
    // types that disagree with the column kind.
    void check_invariants() const;
};

// Nominal if any non-missing cell is non-numeric, else Continuous. Ordinal
// is never inferred, only declared. Throws on an empty list.
ColumnKind infer_column_kind(const std::vector<Cell>& values);

} // namespace aperture
