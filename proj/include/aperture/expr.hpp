#pragma once

#include <memory>
#include <string>
#include <vector>

namespace aperture {

// Arithmetic over columns and constants: + - * /, unary minus, parentheses.
// Column references are bare identifiers ([A-Za-z_][A-Za-z0-9_.]*).
class Expr {
public:
    static Expr parse(const std::string& text); // throws ParseError

    // Distinct column names referenced, in first-appearance order.
    const std::vector<std::string>& columns() const { return columns_; }

    // Evaluate with inputs aligned to columns(). Division by zero yields
    // NaN; the caller maps it to a missing cell.
    double eval(const std::vector<double>& inputs) const;

    const std::string& text() const { return text_; }

    struct Node;

private:
    std::shared_ptr<const Node> root_;
    std::vector<std::string> columns_;
    std::string text_;
};

} // namespace aperture
