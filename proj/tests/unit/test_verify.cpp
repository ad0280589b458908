#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "support.hpp"
#include "thermistor/error.hpp"
#include "thermistor/verify.hpp"

using namespace thermistor;

namespace {

constexpr double pi = std::numbers::pi;

const Mesh kInterval = make_interval_mesh(-1.0, 1.0, 8);
const Mesh kSquare = make_rect_mesh(0, 0, 1, 1, 4, 4);

SchemeConfig config(SchemeKind kind, double tau, double t_end) {
    SchemeConfig c;
    c.scheme = kind;
    c.tau = tau;
    c.t_end = t_end;
    return c;
}

std::string csv(const std::vector<ErrorReport>& rows) {
    std::ostringstream os;
    write_errors_csv(os, rows);
    return os.str();
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream is(text);
    for (std::string line; std::getline(is, line);) out.push_back(line);
    return out;
}

std::vector<std::string> cells(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream is(line);
    for (std::string c; std::getline(is, c, ',');) out.push_back(c);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

TEST_CASE("default exact solutions") {
    CHECK(default_exact_solution(1).eval({0, 0, 0, 0}) == doctest::Approx(1.0));
    CHECK(default_exact_solution(2).eval({0, 0.5, 0.5, std::log(2.0)}) == doctest::Approx(0.5));
}

TEST_CASE("heat equation forcing of the sine decay") {
    const CoefficientSet cs = CoefficientSet::unit(0.0);
    const MmsProblem mms = build_mms(default_exact_solution(1), cs, kInterval);
    testing::Gen g(1);
    for (int i = 0; i < 100; ++i) {
        const double x = g.real(-1, 1), t = g.real(0, 2);
        const double u = std::exp(-t) * std::sin(pi * (x + 1) / 2);
        CHECK(mms.forcing({x, 0}, t) == doctest::Approx((-1 + pi * pi / 4) * u).epsilon(1e-12).scale(1e-12));
    }
}

TEST_CASE("zero exact solution leaves only the nonlocal constant") {
    const double lambda = 1.5;
    const CoefficientSet cs = CoefficientSet::smooth(lambda);
    const MmsProblem mms = build_mms(Expr(0.0), cs, kInterval);
    // f(0) = 2 and int f(0) = 4 on (-1, 1)
    for (double x : {-0.9, 0.0, 0.4})
        for (double t : {0.0, 1.0}) CHECK(mms.forcing({x, 0}, t) == doctest::Approx(-lambda * 2 / 16).epsilon(1e-13));
    const MmsProblem sq = build_mms(Expr(0.0), cs, kSquare);
    CHECK(sq.forcing({0.3, 0.6}, 0.2) == doctest::Approx(-lambda * 2 / 4).epsilon(1e-13));
}

TEST_CASE("nonlocal integral of the exact solution matches an independent quadrature") {
    const CoefficientSet cs = CoefficientSet::smooth();
    const MmsProblem mms = build_mms(default_exact_solution(1), cs, kInterval);
    for (double t : {0.0, 0.3, 1.7}) {
        const double oracle = testing::integrate(
            [t](double x) {
                const double u = std::exp(-t) * std::sin(pi * (x + 1) / 2);
                return 1 + std::exp(-u * u);
            },
            -1.0, 1.0, 400);
        CHECK(mms.nonlocal_integral(t) == doctest::Approx(oracle).epsilon(1e-12));
    }
}

TEST_CASE("residual check passes for the smooth preset") {
    for (const Mesh* m : {&kInterval, &kSquare}) {
        const MmsProblem mms = build_mms(default_exact_solution(m->dim()), CoefficientSet::smooth(), *m);
        CHECK(mms.residual_check(100) <= 1e-8);
    }
}

TEST_CASE("exact solutions must vanish on the boundary") {
    try {
        build_mms(parse_expr("exp(-t)*cos(x)"), CoefficientSet::smooth(), kInterval);
        FAIL("expected a boundary violation");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::BoundaryViolation);
    }
    CHECK_THROWS_AS(build_mms(parse_expr("x*y"), CoefficientSet::smooth(), kSquare), Error);
}

TEST_CASE("EOC from an error table") {
    const std::vector<double> errs{1.0, 0.25, 0.0625, 1e-12, 1e-13};
    const auto e = compute_eoc(errs);
    REQUIRE(e.size() == 5);
    CHECK(e[0].kind == Eoc::Kind::None);
    CHECK(e[1].kind == Eoc::Kind::Value);
    CHECK(e[1].value == doctest::Approx(2.0));
    CHECK(e[2].value == doctest::Approx(2.0));
    CHECK(e[3].kind == Eoc::Kind::Value);
    CHECK(e[4].kind == Eoc::Kind::Exact);
}

TEST_CASE("property: EOC is a pure function of the table") {
    testing::Gen g(5);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> errs = g.vector(static_cast<std::size_t>(g.integer(1, 8)), 1e-6, 1.0);
        const auto a = compute_eoc(errs);
        const auto b = compute_eoc(errs);
        for (std::size_t i = 1; i < errs.size(); ++i) {
            CHECK(a[i].value == b[i].value);
            CHECK(a[i].value == doctest::Approx(std::log2(errs[i - 1] / errs[i])).epsilon(1e-14));
        }
        // scaling every error leaves the orders unchanged
        for (auto& v : errs) v *= 7.0;
        const auto c = compute_eoc(errs);
        for (std::size_t i = 1; i < errs.size(); ++i) CHECK(c[i].value == doctest::Approx(a[i].value).epsilon(1e-12));
    }
}

TEST_CASE("error split sanity") {
    const CoefficientSet cs = CoefficientSet::smooth();
    const MmsProblem mms = build_mms(default_exact_solution(1), cs, kInterval);
    testing::Gen g(6);
    const auto dm = DofMap::create(kInterval);
    for (int trial = 0; trial < 20; ++trial) {
        const FeFunction uh{dm, g.vector(dm->n_dofs())};
        const SplitNorms s = error_split(uh, mms, g.real(0, 1));
        CHECK(s.l2 >= 0.0);
        CHECK(s.l2 <= s.theta + s.rho + 1e-12);
        CHECK(std::abs(s.l2 - s.theta - s.rho) <= s.theta + s.rho);
    }
}

TEST_CASE("projection error vanishes for a discrete exact solution with constant k") {
    const CoefficientSet cs = CoefficientSet::make(Expr(2.0), Expr(1.0), 1.0, 1.0, 2.0, 2.0);
    const Expr hat = parse_expr("(1 - sqrt(x^2))*exp(-t)");
    const MmsProblem mms = build_mms(hat, cs, kInterval);
    const auto dm = DofMap::create(kInterval);
    const SplitNorms s = error_split(interpolate(dm, hat, 0.5), mms, 0.5);
    CHECK(s.rho < 1e-13);
    CHECK(s.l2 < 1e-13);
}

TEST_CASE("degenerate study is flagged exact") {
    const CoefficientSet cs = CoefficientSet::smooth(1.0);
    const MmsProblem mms = build_mms(Expr(0.0), cs, make_interval_mesh(-1, 1, 4));
    const auto rows = spatial_eoc_study(mms, config(SchemeKind::BackwardEuler, 0.1, 0.5), make_interval_mesh(-1, 1, 4), 3, 0.1);
    for (const auto& r : rows) CHECK(r.norms.l2 < 1e-10);
    CHECK(rows[1].eoc_l2.kind == Eoc::Kind::Exact);
    CHECK(rows[2].eoc_h1.kind == Eoc::Kind::Exact);
    const auto table = lines(csv(rows));
    CHECK(cells(table[2])[8] == "exact");
}

TEST_CASE("spatial study on the linear heat equation") {
    const CoefficientSet cs = CoefficientSet::unit(0.0);
    const Mesh coarse = make_interval_mesh(-1, 1, 8);
    const MmsProblem mms = build_mms(default_exact_solution(1), cs, coarse);
    const auto rows = spatial_eoc_study(mms, config(SchemeKind::CrankNicolson, 0.01, 0.5), coarse, 4);
    REQUIRE(rows.size() == 4);
    CHECK(rows[3].h == doctest::Approx(rows[0].h / 8));
    CHECK(rows[0].tau == rows[3].tau);
    CHECK(rows[3].eoc_l2.value == doctest::Approx(2.0).epsilon(0.1));
    CHECK(rows[3].eoc_h1.value == doctest::Approx(1.0).epsilon(0.15));
    CHECK(rows[3].norms.l2 <= rows[2].norms.l2);
    CHECK(rows[2].norms.l2 <= rows[1].norms.l2);
}

TEST_CASE("spatial study with the nonlocal smooth preset") {
    const CoefficientSet cs = CoefficientSet::smooth();
    const Mesh coarse = make_interval_mesh(-1, 1, 8);
    const MmsProblem mms = build_mms(default_exact_solution(1), cs, coarse);
    const auto rows = spatial_eoc_study(mms, config(SchemeKind::CrankNicolson, 0.01, 0.5), coarse, 4, std::nullopt, 2);
    CHECK(rows[3].eoc_l2.value == doctest::Approx(2.0).epsilon(0.1));
    CHECK(rows[3].eoc_h1.value == doctest::Approx(1.0).epsilon(0.15));
    // split columns follow the projection estimates
    CHECK(std::log2(rows[2].norms.rho / rows[3].norms.rho) == doctest::Approx(2.0).epsilon(0.1));
    CHECK(std::log2(rows[2].norms.rho_grad / rows[3].norms.rho_grad) == doctest::Approx(1.0).epsilon(0.15));
    // max gradient of the projection settles
    CHECK(std::abs(rows[3].norms.projection_grad_max - rows[2].norms.projection_grad_max) <
          0.1 * rows[2].norms.projection_grad_max);
}

TEST_CASE("temporal study with backward Euler is first order") {
    const CoefficientSet cs = CoefficientSet::smooth();
    const Mesh mesh = make_interval_mesh(-1, 1, 128);
    const MmsProblem mms = build_mms(parse_expr("cos(2*pi*t)*sin(pi*(x + 1)/2)"), cs, mesh);
    const auto rows = temporal_eoc_study(mms, config(SchemeKind::BackwardEuler, 0.1, 0.5), mesh, 4, 4);
    CHECK(rows[1].tau == 0.05);
    CHECK(rows[3].tau == 0.0125);
    CHECK(rows[3].eoc_l2.value == doctest::Approx(1.0).epsilon(0.15));
    CHECK(rows[3].norms.l2 <= rows[2].norms.l2);
}

TEST_CASE("study arguments") {
    const MmsProblem mms = build_mms(default_exact_solution(1), CoefficientSet::smooth(), kInterval);
    CHECK_THROWS_AS(spatial_eoc_study(mms, config(SchemeKind::BackwardEuler, 0.1, 0.5), kInterval, 2), Error);
    CHECK_THROWS_AS(temporal_eoc_study(mms, config(SchemeKind::BackwardEuler, 0.1, 0.5), kInterval, 2), Error);
}

TEST_CASE("error table layout and thread independence") {
    const CoefficientSet cs = CoefficientSet::smooth();
    const Mesh coarse = make_interval_mesh(-1, 1, 4);
    const MmsProblem mms = build_mms(default_exact_solution(1), cs, coarse);
    const SchemeConfig cfg = config(SchemeKind::CrankNicolson, 0.05, 0.5);
    const std::string one = csv(spatial_eoc_study(mms, cfg, coarse, 4, 0.01, 1));
    const std::string four = csv(spatial_eoc_study(mms, cfg, coarse, 4, 0.01, 4));
    CHECK(one == four);
    const auto table = lines(one);
    REQUIRE(table.size() == 5);
    CHECK(table[0] == "level,h,tau,L2,H1semi,theta,rho,rho_grad,eoc_L2,eoc_H1");
    int eoc_entries = 0;
    for (std::size_t i = 1; i < table.size(); ++i) {
        const auto c = cells(table[i]);
        REQUIRE(c.size() == 10);
        CHECK(c[0] == std::to_string(i - 1));
        eoc_entries += !c[8].empty();
        // 17 significant digits round-trip
        CHECK(std::stod(c[3]) == std::stod(c[3]));
    }
    CHECK(eoc_entries == 3);
    const auto temporal_one = csv(temporal_eoc_study(mms, cfg, coarse, 3, 1));
    const auto temporal_three = csv(temporal_eoc_study(mms, cfg, coarse, 3, 3));
    CHECK(temporal_one == temporal_three);
}

TEST_CASE("errors propagate out of studies") {
    // diffusivity bounds declared on a narrow range are exceeded by the solution
    const CoefficientSet cs = CoefficientSet::make(parse_expr("1 + 1/(1 + u^2)"), Expr(1.0), 1.0, 1.0, 1.8, 2.0,
                                                   ValidationOptions{.u_range = 0.5, .samples = 1000});
    const MmsProblem mms = build_mms(parse_expr("3*sin(pi*(x + 1)/2)"), cs, kInterval);
    CHECK_THROWS_AS(spatial_eoc_study(mms, config(SchemeKind::BackwardEuler, 0.1, 0.5), kInterval, 3, 0.1, 3),
                    HypothesisViolation);
}
