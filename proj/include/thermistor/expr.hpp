#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

namespace thermistor {

enum class Var : std::uint8_t { U, X, Y, T };

/// Values bound to the variables of an expression.
struct Bindings {
    double u = 0.0;
    double x = 0.0;
    double y = 0.0;
    double t = 0.0;
};

/// Immutable scalar expression over the variables u, x, y, t.
///
/// Grammar (lowest to highest precedence):
///
///     sum     := product (('+' | '-') product)*
///     product := unary (('*' | '/') unary)*
///     unary   := '-' unary | power
///     power   := primary ('^' unary)?          right associative
///     primary := number | 'pi' | variable | func '(' sum ')' | '(' sum ')'
///
/// with func one of exp, log, sin, cos, sqrt, tanh. Nodes are shared, so
/// copies are cheap.
class Expr {
public:
    enum class Op : std::uint8_t { Const, Variable, Neg, Add, Sub, Mul, Div, Pow, Exp, Log, Sin, Cos, Sqrt, Tanh };

    Expr();  // the constant 0
    Expr(double value);  // NOLINT(google-explicit-constructor)
    static Expr variable(Var v);

    static Expr unary(Op op, Expr arg);
    static Expr binary(Op op, Expr lhs, Expr rhs);

    Op op() const;
    double constant_value() const;
    Var var() const;
    const Expr& lhs() const;
    const Expr& rhs() const;

    /// True when the tree has no variables; folded value via constant_value().
    bool is_constant() const { return op() == Op::Const; }
    bool is_constant(double value) const { return is_constant() && constant_value() == value; }
    bool depends_on(Var v) const;

    /// Throws Error(EvaluationError) on division by |d| < 1e-300 or any
    /// non-finite intermediate.
    double eval(const Bindings& b) const;
    double operator()(const Bindings& b) const { return eval(b); }

    /// Shortest text that parses back to the same tree values; literals are
    /// printed with 17 significant digits.
    std::string str() const;

    friend Expr operator+(const Expr& a, const Expr& b) { return binary(Op::Add, a, b); }
    friend Expr operator-(const Expr& a, const Expr& b) { return binary(Op::Sub, a, b); }
    friend Expr operator*(const Expr& a, const Expr& b) { return binary(Op::Mul, a, b); }
    friend Expr operator/(const Expr& a, const Expr& b) { return binary(Op::Div, a, b); }
    friend Expr operator-(const Expr& a) { return unary(Op::Neg, a); }

private:
    struct Node;
    explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const Node> node_;
};

Expr pow(const Expr& base, const Expr& exponent);
Expr exp(const Expr& a);
Expr log(const Expr& a);
Expr sin(const Expr& a);
Expr cos(const Expr& a);
Expr sqrt(const Expr& a);
Expr tanh(const Expr& a);

Expr parse_expr(std::string_view source);

/// Symbolic derivative with constant folding only.
Expr differentiate(const Expr& e, Var v);

/// Replaces every occurrence of `v` by `replacement`.
Expr substitute(const Expr& e, Var v, const Expr& replacement);

std::string_view var_name(Var v);

}  // namespace thermistor
