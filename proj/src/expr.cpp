#include "thermistor/expr.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cctype>
#include <numbers>
#include <optional>
#include <vector>

#include "thermistor/error.hpp"

namespace thermistor {

struct Expr::Node {
    Op op = Op::Const;
    double value = 0.0;
    Var var = Var::U;
    std::uint8_t var_mask = 0;
    std::optional<Expr> a;
    std::optional<Expr> b;
};

namespace {

std::uint8_t mask_of(Var v) { return static_cast<std::uint8_t>(1u << static_cast<unsigned>(v)); }

constexpr std::array<std::pair<std::string_view, Expr::Op>, 6> kFunctions{{
    {"exp", Expr::Op::Exp},
    {"log", Expr::Op::Log},
    {"sin", Expr::Op::Sin},
    {"cos", Expr::Op::Cos},
    {"sqrt", Expr::Op::Sqrt},
    {"tanh", Expr::Op::Tanh},
}};

std::string_view function_name(Expr::Op op) {
    for (const auto& [name, o] : kFunctions)
        if (o == op) return name;
    return "?";
}

[[noreturn]] void eval_error(const std::string& what) { throw Error(ErrorCode::EvaluationError, what); }

double checked(double v, const char* what) {
    if (!std::isfinite(v)) eval_error(std::string("non-finite result in ") + what);
    return v;
}

double apply_unary(Expr::Op op, double a) {
    switch (op) {
    case Expr::Op::Neg: return -a;
    case Expr::Op::Exp: return checked(std::exp(a), "exp");
    case Expr::Op::Log:
        if (!(a > 0.0)) eval_error("log of non-positive argument");
        return std::log(a);
    case Expr::Op::Sin: return std::sin(a);
    case Expr::Op::Cos: return std::cos(a);
    case Expr::Op::Sqrt:
        if (a < 0.0) eval_error("sqrt of negative argument");
        return std::sqrt(a);
    case Expr::Op::Tanh: return std::tanh(a);
    default: break;
    }
    eval_error("bad unary operator");
}

double apply_binary(Expr::Op op, double a, double b) {
    switch (op) {
    case Expr::Op::Add: return a + b;
    case Expr::Op::Sub: return a - b;
    case Expr::Op::Mul: return a * b;
    case Expr::Op::Div:
        if (std::abs(b) < 1e-300) eval_error("division by zero");
        return checked(a / b, "division");
    case Expr::Op::Pow: return checked(std::pow(a, b), "power");
    default: break;
    }
    eval_error("bad binary operator");
}

}  // namespace

Expr::Expr() : Expr(0.0) {}

Expr::Expr(double value) {
    auto n = std::make_shared<Node>();
    n->op = Op::Const;
    n->value = value;
    node_ = std::move(n);
}

Expr Expr::variable(Var v) {
    auto n = std::make_shared<Node>();
    n->op = Op::Variable;
    n->var = v;
    n->var_mask = mask_of(v);
    return Expr(std::shared_ptr<const Node>(std::move(n)));
}

Expr Expr::unary(Op op, Expr arg) {
    if (arg.is_constant()) {
        const double v = arg.constant_value();
        // leave non-finite folds unevaluated so the error surfaces at eval time
        try {
            const double r = apply_unary(op, v);
            if (std::isfinite(r)) return Expr(r);
        } catch (const Error&) {
        }
    }
    if (op == Op::Neg && arg.op() == Op::Neg) return arg.lhs();
    auto n = std::make_shared<Node>();
    n->op = op;
    n->var_mask = arg.node_->var_mask;
    n->a.emplace(std::move(arg));
    return Expr(std::shared_ptr<const Node>(std::move(n)));
}

Expr Expr::binary(Op op, Expr lhs, Expr rhs) {
    if (lhs.is_constant() && rhs.is_constant()) {
        try {
            const double r = apply_binary(op, lhs.constant_value(), rhs.constant_value());
            if (std::isfinite(r)) return Expr(r);
        } catch (const Error&) {
        }
    }
    switch (op) {
    case Op::Add:
        if (lhs.is_constant(0.0)) return rhs;
        if (rhs.is_constant(0.0)) return lhs;
        break;
    case Op::Sub:
        if (rhs.is_constant(0.0)) return lhs;
        if (lhs.is_constant(0.0)) return unary(Op::Neg, rhs);
        break;
    case Op::Mul:
        if (lhs.is_constant(0.0) || rhs.is_constant(0.0)) return Expr(0.0);
        if (lhs.is_constant(1.0)) return rhs;
        if (rhs.is_constant(1.0)) return lhs;
        break;
    case Op::Div:
        if (rhs.is_constant(1.0)) return lhs;
        if (lhs.is_constant(0.0) && rhs.is_constant() && rhs.constant_value() != 0.0) return Expr(0.0);
        break;
    case Op::Pow:
        if (rhs.is_constant(1.0)) return lhs;
        if (rhs.is_constant(0.0)) return Expr(1.0);
        break;
    default: break;
    }
    auto n = std::make_shared<Node>();
    n->op = op;
    n->var_mask = static_cast<std::uint8_t>(lhs.node_->var_mask | rhs.node_->var_mask);
    n->a.emplace(std::move(lhs));
    n->b.emplace(std::move(rhs));
    return Expr(std::shared_ptr<const Node>(std::move(n)));
}

Expr::Op Expr::op() const { return node_->op; }
double Expr::constant_value() const { return node_->value; }
Var Expr::var() const { return node_->var; }
const Expr& Expr::lhs() const { return *node_->a; }
const Expr& Expr::rhs() const { return *node_->b; }

bool Expr::depends_on(Var v) const { return (node_->var_mask & mask_of(v)) != 0; }

double Expr::eval(const Bindings& b) const {
    const Node& n = *node_;
    switch (n.op) {
    case Op::Const: return n.value;
    case Op::Variable:
        switch (n.var) {
        case Var::U: return b.u;
        case Var::X: return b.x;
        case Var::Y: return b.y;
        case Var::T: return b.t;
        }
        return 0.0;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div:
    case Op::Pow: return apply_binary(n.op, n.a->eval(b), n.b->eval(b));
    default: return apply_unary(n.op, n.a->eval(b));
    }
}

namespace {

int precedence(const Expr& e) {
    switch (e.op()) {
    case Expr::Op::Const: return e.constant_value() < 0.0 || std::signbit(e.constant_value()) ? 3 : 5;
    case Expr::Op::Variable: return 5;
    case Expr::Op::Add:
    case Expr::Op::Sub: return 1;
    case Expr::Op::Mul:
    case Expr::Op::Div: return 2;
    case Expr::Op::Neg: return 3;
    case Expr::Op::Pow: return 4;
    default: return 5;  // function call
    }
}

void print(const Expr& e, std::string& out);

void print_child(const Expr& e, int min_prec, std::string& out) {
    if (precedence(e) < min_prec) {
        out += '(';
        print(e, out);
        out += ')';
    } else {
        print(e, out);
    }
}

void print(const Expr& e, std::string& out) {
    using Op = Expr::Op;
    switch (e.op()) {
    case Op::Const: {
        std::array<char, 40> buf{};
        std::snprintf(buf.data(), buf.size(), "%.17g", e.constant_value());
        out += buf.data();
        return;
    }
    case Op::Variable: out += var_name(e.var()); return;
    case Op::Neg:
        out += '-';
        print_child(e.lhs(), 3, out);
        return;
    case Op::Add:
    case Op::Sub:
        print_child(e.lhs(), 1, out);
        out += e.op() == Op::Add ? " + " : " - ";
        print_child(e.rhs(), 2, out);
        return;
    case Op::Mul:
    case Op::Div:
        print_child(e.lhs(), 2, out);
        out += e.op() == Op::Mul ? "*" : "/";
        print_child(e.rhs(), 3, out);
        return;
    case Op::Pow:
        print_child(e.lhs(), 5, out);
        out += '^';
        print_child(e.rhs(), 3, out);
        return;
    default:
        out += function_name(e.op());
        out += '(';
        print(e.lhs(), out);
        out += ')';
        return;
    }
}

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) {}

    Expr parse() {
        skip_ws();
        if (pos_ >= src_.size()) fail(ErrorCode::SyntaxError, "empty expression");
        Expr e = sum();
        skip_ws();
        if (pos_ < src_.size()) fail(ErrorCode::SyntaxError, std::string("unexpected '") + src_[pos_] + "'");
        return e;
    }

private:
    [[noreturn]] void fail(ErrorCode code, const std::string& what) const {
        throw Error(code, what + " at position " + std::to_string(pos_ + 1));
    }

    void skip_ws() {
        while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t')) ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    Expr sum() {
        Expr e = product();
        for (;;) {
            if (accept('+'))
                e = e + product();
            else if (accept('-'))
                e = e - product();
            else
                return e;
        }
    }

    Expr product() {
        Expr e = unary_minus();
        for (;;) {
            if (accept('*'))
                e = e * unary_minus();
            else if (accept('/'))
                e = e / unary_minus();
            else
                return e;
        }
    }

    Expr unary_minus() {
        if (accept('-')) return -unary_minus();
        return power();
    }

    Expr power() {
        Expr base = primary();
        if (accept('^')) return thermistor::pow(base, unary_minus());
        return base;
    }

    Expr primary() {
        skip_ws();
        if (pos_ >= src_.size()) fail(ErrorCode::SyntaxError, "unexpected end of input");
        const char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            Expr e = sum();
            if (!accept(')')) fail(ErrorCode::SyntaxError, "expected ')'");
            return e;
        }
        if ((c >= '0' && c <= '9') || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        fail(ErrorCode::SyntaxError, std::string("unexpected '") + c + "'");
    }

    Expr number() {
        double v = 0.0;
        const char* first = src_.data() + pos_;
        const char* last = src_.data() + src_.size();
        const auto res = std::from_chars(first, last, v);
        if (res.ec != std::errc()) fail(ErrorCode::SyntaxError, "malformed number");
        pos_ += static_cast<std::size_t>(res.ptr - first);
        return Expr(v);
    }

    Expr identifier() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) ++pos_;
        const std::string_view name = src_.substr(start, pos_ - start);

        for (const auto& [fname, op] : kFunctions) {
            if (name != fname) continue;
            if (!accept('(')) fail(ErrorCode::SyntaxError, "expected '(' after " + std::string(name));
            skip_ws();
            if (pos_ < src_.size() && src_[pos_] == ')') fail(ErrorCode::ArityError, std::string(name) + " takes 1 argument, got 0");
            std::vector<Expr> args{sum()};
            while (accept(',')) args.push_back(sum());
            if (!accept(')')) fail(ErrorCode::SyntaxError, "expected ')'");
            if (args.size() != 1)
                fail(ErrorCode::ArityError, std::string(name) + " takes 1 argument, got " + std::to_string(args.size()));
            return Expr::unary(op, args.front());
        }
        if (name == "pi") return Expr(std::numbers::pi);
        if (name == "u") return Expr::variable(Var::U);
        if (name == "x") return Expr::variable(Var::X);
        if (name == "y") return Expr::variable(Var::Y);
        if (name == "t") return Expr::variable(Var::T);
        pos_ = start;
        fail(ErrorCode::UnknownIdentifier, "unknown identifier '" + std::string(name) + "'");
    }

    std::string_view src_;
    std::size_t pos_ = 0;
};

}  // namespace

std::string Expr::str() const {
    std::string out;
    print(*this, out);
    return out;
}

Expr pow(const Expr& base, const Expr& exponent) { return Expr::binary(Expr::Op::Pow, base, exponent); }
Expr exp(const Expr& a) { return Expr::unary(Expr::Op::Exp, a); }
Expr log(const Expr& a) { return Expr::unary(Expr::Op::Log, a); }
Expr sin(const Expr& a) { return Expr::unary(Expr::Op::Sin, a); }
Expr cos(const Expr& a) { return Expr::unary(Expr::Op::Cos, a); }
Expr sqrt(const Expr& a) { return Expr::unary(Expr::Op::Sqrt, a); }
Expr tanh(const Expr& a) { return Expr::unary(Expr::Op::Tanh, a); }

Expr parse_expr(std::string_view source) { return Parser(source).parse(); }

Expr differentiate(const Expr& e, Var v) {
    using Op = Expr::Op;
    if (!e.depends_on(v)) return Expr(0.0);
    const Expr& a = e.lhs();
    const Expr& b = e.rhs();
    switch (e.op()) {
    case Op::Const: return Expr(0.0);
    case Op::Variable: return Expr(1.0);
    case Op::Neg: return -differentiate(a, v);
    case Op::Add: return differentiate(a, v) + differentiate(b, v);
    case Op::Sub: return differentiate(a, v) - differentiate(b, v);
    case Op::Mul: return differentiate(a, v) * b + a * differentiate(b, v);
    case Op::Div: return (differentiate(a, v) * b - a * differentiate(b, v)) / pow(b, Expr(2.0));
    case Op::Pow:
        if (!b.depends_on(v)) return b * pow(a, b - Expr(1.0)) * differentiate(a, v);
        if (!a.depends_on(v)) return e * log(a) * differentiate(b, v);
        return e * (differentiate(b, v) * log(a) + b * differentiate(a, v) / a);
    case Op::Exp: return e * differentiate(a, v);
    case Op::Log: return differentiate(a, v) / a;
    case Op::Sin: return cos(a) * differentiate(a, v);
    case Op::Cos: return -sin(a) * differentiate(a, v);
    case Op::Sqrt: return differentiate(a, v) / (Expr(2.0) * e);
    case Op::Tanh: return (Expr(1.0) - pow(e, Expr(2.0))) * differentiate(a, v);
    }
    return Expr(0.0);
}

Expr substitute(const Expr& e, Var v, const Expr& replacement) {
    using Op = Expr::Op;
    if (!e.depends_on(v)) return e;
    switch (e.op()) {
    case Op::Const: return e;
    case Op::Variable: return replacement;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div:
    case Op::Pow:
        return Expr::binary(e.op(), substitute(e.lhs(), v, replacement), substitute(e.rhs(), v, replacement));
    default: return Expr::unary(e.op(), substitute(e.lhs(), v, replacement));
    }
}

std::string_view var_name(Var v) {
    switch (v) {
    case Var::U: return "u";
    case Var::X: return "x";
    case Var::Y: return "y";
    case Var::T: return "t";
    }
    return "?";
}

}  // namespace thermistor
