#pragma once

#include <memory>
#include <string>

namespace wavepinn {

/// Arithmetic expression over the variables x1, x2, x3, t, u and the constant
/// pi, with + - * / ^, parentheses, unary minus, and the functions sin, cos,
/// erf. Used by the declarative custom-problem description.
class Expr {
public:
    struct Vars {
        double x1 = 0, x2 = 0, x3 = 0, t = 0, u = 0;
    };

    static Expr parse(const std::string& text); // Config error on bad syntax

    double eval(const Vars& v) const;
    const std::string& text() const { return text_; }

    Expr() = default;

    struct Node;

private:
    std::shared_ptr<const Node> root_;
    std::string text_;
};

} // namespace wavepinn
