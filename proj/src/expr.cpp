#include "wavepinn/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>

#include "wavepinn/error.hpp"

namespace wavepinn {

struct Expr::Node {
    enum class Op { Const, Var, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Erf };
    Op op = Op::Const;
    double value = 0;
    int var = 0; // 0..2: x1..x3, 3: t, 4: u
    std::shared_ptr<const Node> a, b;
};

namespace {

using Node = Expr::Node;
using NodePtr = std::shared_ptr<const Node>;

NodePtr make(Node::Op op, NodePtr a = nullptr, NodePtr b = nullptr) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

class Parser {
public:
    Parser(const std::string& text) : s_(text) {}

    NodePtr parse() {
        NodePtr e = expression();
        skip_ws();
        if (pos_ != s_.size()) fail("unexpected trailing input");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& what) {
        throw Error(ErrorCategory::Config,
                    "expression error at position " + std::to_string(pos_) + ": " + what +
                        " in \"" + s_ + "\"");
    }

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr expression() {
        NodePtr left = term();
        for (;;) {
            if (eat('+')) {
                left = make(Node::Op::Add, left, term());
            } else if (eat('-')) {
                left = make(Node::Op::Sub, left, term());
            } else {
                return left;
            }
        }
    }

    NodePtr term() {
        NodePtr left = unary();
        for (;;) {
            if (eat('*')) {
                left = make(Node::Op::Mul, left, unary());
            } else if (eat('/')) {
                left = make(Node::Op::Div, left, unary());
            } else {
                return left;
            }
        }
    }

    NodePtr unary() {
        if (eat('-')) return make(Node::Op::Neg, unary());
        return power();
    }

    NodePtr power() {
        NodePtr base = primary();
        if (eat('^')) return make(Node::Op::Pow, base, unary()); // right associative
        return base;
    }

    NodePtr primary() {
        skip_ws();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        const char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr e = expression();
            if (!eat(')')) fail("missing ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
        fail(std::string("unexpected character '") + c + "'");
    }

    NodePtr number() {
        double v = 0;
        const char* begin = s_.data() + pos_;
        const char* end = s_.data() + s_.size();
        auto res = std::from_chars(begin, end, v);
        if (res.ec != std::errc()) fail("bad number");
        pos_ = static_cast<size_t>(res.ptr - s_.data());
        auto n = std::make_shared<Node>();
        n->op = Node::Op::Const;
        n->value = v;
        return n;
    }

    NodePtr identifier() {
        const size_t start = pos_;
        while (pos_ < s_.size() &&
               (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
            ++pos_;
        const std::string name = s_.substr(start, pos_ - start);
        if (name == "pi") {
            auto n = std::make_shared<Node>();
            n->op = Node::Op::Const;
            n->value = std::numbers::pi;
            return n;
        }
        if (name == "x1" || name == "x2" || name == "x3" || name == "t" || name == "u") {
            auto n = std::make_shared<Node>();
            n->op = Node::Op::Var;
            n->var = (name == "t") ? 3 : (name == "u") ? 4 : name[1] - '1';
            return n;
        }
        Node::Op op;
        if (name == "sin") {
            op = Node::Op::Sin;
        } else if (name == "cos") {
            op = Node::Op::Cos;
        } else if (name == "erf") {
            op = Node::Op::Erf;
        } else {
            fail("unknown identifier '" + name + "'");
        }
        if (!eat('(')) fail("expected '(' after function name");
        NodePtr arg = expression();
        if (!eat(')')) fail("missing ')'");
        return make(op, arg);
    }

    const std::string& s_;
    size_t pos_ = 0;
};

double eval_node(const Node& n, const Expr::Vars& v) {
    switch (n.op) {
        case Node::Op::Const: return n.value;
        case Node::Op::Var:
            switch (n.var) {
                case 0: return v.x1;
                case 1: return v.x2;
                case 2: return v.x3;
                case 3: return v.t;
                default: return v.u;
            }
        case Node::Op::Add: return eval_node(*n.a, v) + eval_node(*n.b, v);
        case Node::Op::Sub: return eval_node(*n.a, v) - eval_node(*n.b, v);
        case Node::Op::Mul: return eval_node(*n.a, v) * eval_node(*n.b, v);
        case Node::Op::Div: return eval_node(*n.a, v) / eval_node(*n.b, v);
        case Node::Op::Pow: return std::pow(eval_node(*n.a, v), eval_node(*n.b, v));
        case Node::Op::Neg: return -eval_node(*n.a, v);
        case Node::Op::Sin: return std::sin(eval_node(*n.a, v));
        case Node::Op::Cos: return std::cos(eval_node(*n.a, v));
        case Node::Op::Erf: return std::erf(eval_node(*n.a, v));
    }
    return 0;
}

} // namespace

Expr Expr::parse(const std::string& text) {
    Expr e;
    e.root_ = Parser(text).parse();
    e.text_ = text;
    return e;
}

double Expr::eval(const Vars& v) const {
    if (!root_) throw Error(ErrorCategory::Config, "evaluating an empty expression");
    return eval_node(*root_, v);
}

} // namespace wavepinn
