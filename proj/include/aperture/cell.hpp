#pragma once

#include <string>
#include <variant>

namespace aperture {

// A table cell: a finite number, a string, or an explicit missing marker.
// Missing is represented, never imputed; tactics state how they treat it.
using Cell = std::variant<std::monostate, double, std::string>;

inline bool is_missing(const Cell& c) { return std::holds_alternative<std::monostate>(c); }
inline bool is_number(const Cell& c) { return std::holds_alternative<double>(c); }
inline bool is_text(const Cell& c) { return std::holds_alternative<std::string>(c); }

inline double as_number(const Cell& c) { return std::get<double>(c); }
inline const std::string& as_text(const Cell& c) { return std::get<std::string>(c); }

inline Cell missing_cell() { return Cell{std::monostate{}}; }

} // namespace aperture
