#include <cmath>
#include <numbers>

#include "doctest.h"
#include "support.hpp"
#include "thermistor/error.hpp"
#include "thermistor/expr.hpp"

using namespace thermistor;

namespace {

ErrorCode parse_error(std::string_view src) {
    try {
        parse_expr(src);
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::IoError;
}

double at_u(const Expr& e, double u) { return e.eval({u, 0, 0, 0}); }

Bindings random_point(testing::Gen& g) { return {g.real(-2, 2), g.real(-2, 2), g.real(-2, 2), g.real(0, 2)}; }

/// Random tree from total operations plus guarded division and logs.
Expr random_expr(testing::Gen& g, int depth) {
    if (depth == 0 || g.integer(0, 4) == 0) {
        switch (g.integer(0, 5)) {
        case 0: return Expr::variable(Var::U);
        case 1: return Expr::variable(Var::X);
        case 2: return Expr::variable(Var::Y);
        case 3: return Expr::variable(Var::T);
        case 4: return Expr(std::round(g.real(-5, 5) * 1000) / 1000);
        default: return Expr(g.real(-3, 3));
        }
    }
    const Expr a = random_expr(g, depth - 1);
    const Expr b = random_expr(g, depth - 1);
    switch (g.integer(0, 11)) {
    case 0: return a + b;
    case 1: return a - b;
    case 2: return a * b;
    case 3: return a / (Expr(1.5) + a * a);
    case 4: return -a;
    case 5: return sin(a);
    case 6: return cos(b);
    case 7: return tanh(a);
    case 8: return exp(tanh(a));
    case 9: return sqrt(Expr(1) + b * b);
    case 10: return pow(Expr(2) + sin(a), b);
    default: return log(Expr(2) + cos(a));
    }
}

}  // namespace

TEST_CASE("parse examples") {
    const Expr k = parse_expr("1 + 1/(1+u^2)");
    CHECK(at_u(k, 0.0) == 2.0);
    CHECK(at_u(parse_expr("exp(-u)"), 0.0) == 1.0);
    CHECK(parse_error("2*h") == ErrorCode::UnknownIdentifier);
}

TEST_CASE("precedence table") {
    auto v = [](std::string_view s) { return parse_expr(s).eval({2.0, 3.0, 0, 0}); };
    CHECK(v("-u^2") == -4.0);          // ^ binds tighter than unary minus
    CHECK(v("2^3^2") == 512.0);        // right associative
    CHECK(v("2^-1") == 0.5);           // unary minus in an exponent
    CHECK(v("1 + 2*3") == 7.0);
    CHECK(v("8/4/2") == 1.0);          // left associative
    CHECK(v("10 - 4 - 3") == 3.0);
    CHECK(v("-u*x") == -6.0);
    CHECK(v("(1 + 2)*3") == 9.0);
    CHECK(v("pi") == std::numbers::pi);
    CHECK(v("2e-1 + 1.5E1") == doctest::Approx(15.2));
}

TEST_CASE("parse errors carry a category and position") {
    CHECK(parse_error("") == ErrorCode::SyntaxError);
    CHECK(parse_error("1 +") == ErrorCode::SyntaxError);
    CHECK(parse_error("(u") == ErrorCode::SyntaxError);
    CHECK(parse_error("u u") == ErrorCode::SyntaxError);
    CHECK(parse_error("1 $ 2") == ErrorCode::SyntaxError);
    CHECK(parse_error("foo(u)") == ErrorCode::UnknownIdentifier);
    CHECK(parse_error("z") == ErrorCode::UnknownIdentifier);
    CHECK(parse_error("sin()") == ErrorCode::ArityError);
    CHECK(parse_error("sin(u, x)") == ErrorCode::ArityError);
    try {
        parse_expr("1 + * 2");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("position 5") != std::string::npos);
    }
}

TEST_CASE("evaluation errors") {
    CHECK_THROWS_AS(parse_expr("1/u").eval({0, 0, 0, 0}), Error);
    CHECK_THROWS_AS(parse_expr("1/u").eval({1e-301, 0, 0, 0}), Error);
    CHECK_THROWS_AS(parse_expr("log(u)").eval({-1, 0, 0, 0}), Error);
    CHECK_THROWS_AS(parse_expr("sqrt(u)").eval({-1, 0, 0, 0}), Error);
    CHECK_THROWS_AS(parse_expr("exp(u)").eval({1000, 0, 0, 0}), Error);
    CHECK(parse_expr("1/u").eval({1e-299, 0, 0, 0}) == doctest::Approx(1e299));
}

TEST_CASE("derivative examples") {
    const Expr u = Expr::variable(Var::U);
    const Expr d = differentiate(parse_expr("u^2"), Var::U);
    testing::Gen g(1);
    for (int i = 0; i < 100; ++i) {
        const double x = g.real(-10, 10);
        CHECK(at_u(d, x) == doctest::Approx(2 * x).epsilon(1e-14));
    }
    const Expr e = parse_expr("exp(-u^2)");
    const double fd = (at_u(e, 1 + 1e-6) - at_u(e, 1 - 1e-6)) / 2e-6;
    CHECK(at_u(differentiate(e, Var::U), 1.0) == doctest::Approx(fd).epsilon(1e-6));
    CHECK(at_u(differentiate(e, Var::U), 1.0) == doctest::Approx(-2 * std::exp(-1.0)).epsilon(1e-14));
    const Expr c = differentiate(parse_expr("3*pi + sin(2)"), Var::U);
    CHECK(c.is_constant(0.0));
    CHECK(differentiate(parse_expr("x*t"), Var::U).is_constant(0.0));
    (void)u;
}

TEST_CASE("depends_on and substitute") {
    const Expr e = parse_expr("u*x + sin(t)");
    CHECK(e.depends_on(Var::U));
    CHECK(e.depends_on(Var::X));
    CHECK_FALSE(e.depends_on(Var::Y));
    const Expr s = substitute(e, Var::U, parse_expr("2*y"));
    CHECK_FALSE(s.depends_on(Var::U));
    CHECK(s.depends_on(Var::Y));
    CHECK(s.eval({0, 3, 0.5, 1}) == doctest::Approx(3.0 + std::sin(1.0)));
}

TEST_CASE("constant folding") {
    CHECK(parse_expr("2*3 + 1").is_constant(7.0));
    CHECK(parse_expr("0*u").is_constant(0.0));
    CHECK(parse_expr("u*1").str() == "u");
    CHECK(parse_expr("--u").str() == "u");
}

TEST_CASE("property: print then parse evaluates identically") {
    testing::Gen g(2024);
    int compared = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const Expr e = random_expr(g, 5);
        const std::string text = e.str();
        const Expr back = parse_expr(text);
        for (int i = 0; i < 100; ++i) {
            const Bindings b = random_point(g);
            double a = 0, c = 0;
            try {
                a = e.eval(b);
            } catch (const Error&) {
                CHECK_THROWS_AS(back.eval(b), Error);
                continue;
            }
            c = back.eval(b);
            CHECK_MESSAGE(std::abs(a - c) <= 1e-14 * std::max(1.0, std::abs(a)), text);
            ++compared;
        }
    }
    CHECK(compared > 20000);
}

TEST_CASE("property: derivatives agree with central differences") {
    testing::Gen g(99);
    const char* corpus[] = {"1 + 1/(1 + u^2)", "1 + exp(-u^2)", "u^3 - 2*u", "sin(u)*cos(2*u)", "tanh(u)^2",
                            "sqrt(1 + u^2)", "log(2 + sin(u))", "(1 + u^2)^(1/3)", "exp(u/3)/(2 + cos(u))",
                            "u*tanh(u) + 3", "2^u", "(2 + sin(u))^(1 + u^2/10)"};
    for (const char* src : corpus) {
        const Expr e = parse_expr(src);
        const Expr d = differentiate(e, Var::U);
        for (int i = 0; i < 100; ++i) {
            const double u = g.real(-3, 3);
            const double fd = (at_u(e, u + 1e-6) - at_u(e, u - 1e-6)) / 2e-6;
            CHECK_MESSAGE(std::abs(at_u(d, u) - fd) <= 1e-6 * std::max(1.0, std::abs(fd)), src);
        }
    }
    // random trees, all variables
    for (int trial = 0; trial < 100; ++trial) {
        const Expr e = random_expr(g, 4);
        for (Var v : {Var::U, Var::X, Var::T}) {
            const Expr d = differentiate(e, v);
            for (int i = 0; i < 5; ++i) {
                Bindings b = random_point(g);
                Bindings lo = b, hi = b;
                double* slot = v == Var::U ? &lo.u : v == Var::X ? &lo.x : &lo.t;
                double* slot_hi = v == Var::U ? &hi.u : v == Var::X ? &hi.x : &hi.t;
                *slot -= 1e-6;
                *slot_hi += 1e-6;
                double exact = 0, fd = 0;
                try {
                    exact = d.eval(b);
                    fd = (e.eval(hi) - e.eval(lo)) / 2e-6;
                } catch (const Error&) {
                    continue;
                }
                CHECK_MESSAGE(std::abs(exact - fd) <= 1e-5 * std::max(1.0, std::abs(fd)), e.str());
            }
        }
    }
}
