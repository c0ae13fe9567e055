#include "aperture/expr.hpp"

#include <cctype>
#include <cstdlib>
#include <limits>

#include "aperture/error.hpp"

namespace aperture {

struct Expr::Node {
    enum class Kind { Constant, Column, Add, Sub, Mul, Div, Neg } kind;
    double value = 0.0;       // Constant
    std::size_t column = 0;   // Column: index into Expr::columns_
    std::shared_ptr<const Node> lhs, rhs;
};

namespace {

using Node = Expr::Node;
using NodePtr = std::shared_ptr<const Node>;

class Parser {
public:
    Parser(const std::string& text, std::vector<std::string>& columns)
        : text_(text), columns_(columns) {}

    NodePtr parse() {
        NodePtr e = sum();
        skip_ws();
        if (pos_ != text_.size())
            fail("unexpected character '" + std::string(1, text_[pos_]) + "'");
        return e;
    }

private:
    NodePtr sum() {
        NodePtr lhs = product();
        for (;;) {
            skip_ws();
            if (accept('+')) lhs = binary(Node::Kind::Add, lhs, product());
            else if (accept('-')) lhs = binary(Node::Kind::Sub, lhs, product());
            else return lhs;
        }
    }

    NodePtr product() {
        NodePtr lhs = unary();
        for (;;) {
            skip_ws();
            if (accept('*')) lhs = binary(Node::Kind::Mul, lhs, unary());
            else if (accept('/')) lhs = binary(Node::Kind::Div, lhs, unary());
            else return lhs;
        }
    }

    NodePtr unary() {
        skip_ws();
        if (accept('-')) {
            auto n = std::make_shared<Node>();
            n->kind = Node::Kind::Neg;
            n->lhs = unary();
            return n;
        }
        return atom();
    }

    NodePtr atom() {
        skip_ws();
        if (pos_ >= text_.size()) fail("unexpected end of expression");
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr e = sum();
            skip_ws();
            if (!accept(')')) fail("missing ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return column_ref();
        fail("unexpected character '" + std::string(1, c) + "'");
        return nullptr;
    }

    NodePtr number() {
        const char* start = text_.c_str() + pos_;
        char* end = nullptr;
        const double v = std::strtod(start, &end);
        if (end == start) fail("bad number");
        pos_ += static_cast<std::size_t>(end - start);
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::Constant;
        n->value = v;
        return n;
    }

    NodePtr column_ref() {
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                text_[pos_] == '_' || text_[pos_] == '.'))
            ++pos_;
        const std::string name = text_.substr(start, pos_ - start);
        std::size_t idx = 0;
        for (; idx < columns_.size(); ++idx)
            if (columns_[idx] == name) break;
        if (idx == columns_.size()) columns_.push_back(name);
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::Column;
        n->column = idx;
        return n;
    }

    NodePtr binary(Node::Kind k, NodePtr lhs, NodePtr rhs) {
        auto n = std::make_shared<Node>();
        n->kind = k;
        n->lhs = std::move(lhs);
        n->rhs = std::move(rhs);
        return n;
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        if (pos_ < text_.size() && text_[pos_] == c) { ++pos_; return true; }
        return false;
    }

    [[noreturn]] void fail(const std::string& msg) {
        throw ParseError("expression: " + msg, "position " + std::to_string(pos_));
    }

    const std::string& text_;
    std::vector<std::string>& columns_;
    std::size_t pos_ = 0;
};

double eval_node(const Node& n, const std::vector<double>& inputs) {
    switch (n.kind) {
        case Node::Kind::Constant: return n.value;
        case Node::Kind::Column: return inputs[n.column];
        case Node::Kind::Add: return eval_node(*n.lhs, inputs) + eval_node(*n.rhs, inputs);
        case Node::Kind::Sub: return eval_node(*n.lhs, inputs) - eval_node(*n.rhs, inputs);
        case Node::Kind::Mul: return eval_node(*n.lhs, inputs) * eval_node(*n.rhs, inputs);
        case Node::Kind::Div: {
            const double d = eval_node(*n.rhs, inputs);
            if (d == 0.0) return std::numeric_limits<double>::quiet_NaN();
            return eval_node(*n.lhs, inputs) / d;
        }
        case Node::Kind::Neg: return -eval_node(*n.lhs, inputs);
    }
    return 0.0;
}

} // namespace

Expr Expr::parse(const std::string& text) {
    Expr e;
    e.text_ = text;
    Parser p(text, e.columns_);
    e.root_ = p.parse();
    return e;
}

double Expr::eval(const std::vector<double>& inputs) const {
    return eval_node(*root_, inputs);
}

} // namespace aperture
