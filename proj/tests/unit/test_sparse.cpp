#include <cmath>
#include <sstream>

#include "doctest.h"
#include "support.hpp"
#include "thermistor/error.hpp"
#include "thermistor/sparse.hpp"

using namespace thermistor;
using LS = LinearSolveOptions;

namespace {

SparseMatrix tridiagonal(std::size_t n, double lower, double diag, double upper) {
    SparseBuilder b(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) b.add(i, i - 1, lower);
        b.add(i, i, diag);
        if (i + 1 < n) b.add(i, i + 1, upper);
    }
    return b.finalize(lower == upper);
}

LS with(LS::Method m, double tol = 1e-13) {
    LS o;
    o.method = m;
    o.rel_tolerance = tol;
    return o;
}

void check_structure(const SparseMatrix& m) {
    const auto off = m.row_offsets();
    const auto col = m.columns();
    for (std::size_t i = 0; i < m.n(); ++i)
        for (std::size_t k = off[i] + 1; k < off[i + 1]; ++k) REQUIRE(col[k - 1] < col[k]);
    if (m.symmetric())
        for (std::size_t i = 0; i < m.n(); ++i)
            for (std::size_t k = off[i]; k < off[i + 1]; ++k) {
                const double a = m.values()[k];
                const double b = m.at(col[k], i);
                REQUIRE(std::abs(a - b) <= 1e-14 * std::max(std::abs(a), 1e-300));
            }
}

}  // namespace

TEST_CASE("identity times x is x") {
    const Vector x{1.5, -2.0, 3.25};
    CHECK(matvec(SparseMatrix::identity(3), x) == x);
}

TEST_CASE("zero matrix times x is zero") {
    const SparseMatrix z = SparseBuilder(4).finalize(true);
    CHECK(matvec(z, Vector{1, 2, 3, 4}) == Vector(4, 0.0));
}

TEST_CASE("1D mass matrix times ones matches the dense product oracle") {
    const double h = 0.5;
    const SparseMatrix mass = tridiagonal(3, h / 6, 2 * h / 3, h / 6);
    const Vector ones(3, 1.0);
    const Vector y = matvec(mass, ones);
    const Vector oracle = testing::dense_multiply(mass.to_dense(), 3, ones);
    CHECK(testing::max_abs_diff(y, oracle) == 0.0);
    CHECK(y[1] == doctest::Approx(2 * h / 3 + 2 * h / 6).epsilon(1e-15));
}

TEST_CASE("matvec rejects mismatched dimensions") {
    CHECK_THROWS_AS(matvec(SparseMatrix::identity(3), Vector{1, 2}), Error);
}

TEST_CASE("builder sums duplicates and keeps columns sorted") {
    SparseBuilder b(3);
    b.add(0, 2, 1.0);
    b.add(0, 0, 2.0);
    b.add(0, 2, 0.5);
    b.add(2, 1, -1.0);
    const SparseMatrix m = b.finalize(false);
    check_structure(m);
    CHECK(m.at(0, 2) == 1.5);
    CHECK(m.at(0, 0) == 2.0);
    CHECK(m.at(2, 1) == -1.0);
    CHECK(m.at(1, 1) == 0.0);
    CHECK(m.nnz() == 3);
}

TEST_CASE("symmetric finalize averages the transpose") {
    SparseBuilder b(2);
    b.add(0, 1, 1.0);
    b.add(1, 0, 3.0);
    const SparseMatrix m = b.finalize(true);
    CHECK(m.symmetric());
    CHECK(m.at(0, 1) == 2.0);
    CHECK(m.at(1, 0) == 2.0);
}

TEST_CASE("solve with the identity returns b") {
    const Vector b{3, -1, 2};
    for (auto method : {LS::Method::Tridiagonal, LS::Method::ConjugateGradient, LS::Method::BiCgStab})
        CHECK(testing::max_abs_diff(solve(SparseMatrix::identity(3), b, with(method)), b) < 1e-15);
}

TEST_CASE("stiffness solve reproduces x(1-x)/2 at the nodes") {
    const int n = 4;
    const double h = 1.0 / n;
    const SparseMatrix k = tridiagonal(n - 1, -1 / h, 2 / h, -1 / h);
    const Vector b(n - 1, h);  // (1, phi_j) = h
    const Vector x = solve(k, b, with(LS::Method::Tridiagonal));
    for (int j = 1; j < n; ++j) {
        const double xj = j * h;
        CHECK(x[j - 1] == doctest::Approx(xj * (1 - xj) / 2).epsilon(1e-14));
    }
    const Vector cg = solve(k, b, with(LS::Method::ConjugateGradient));
    CHECK(testing::max_abs_diff(cg, x) < 1e-10);
}

TEST_CASE("tridiagonal solve detects a singular pivot") {
    const SparseMatrix z = tridiagonal(3, 1.0, 0.0, 1.0);
    try {
        solve(z, Vector{1, 1, 1}, with(LS::Method::Tridiagonal));
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SingularPivot);
    }
}

TEST_CASE("CG refuses a matrix without the symmetric flag") {
    SparseBuilder b(2);
    b.add(0, 0, 2.0);
    b.add(1, 1, 2.0);
    b.add(0, 1, 1.0);
    CHECK_THROWS_AS(solve(b.finalize(false), Vector{1, 1}, with(LS::Method::ConjugateGradient)), Error);
}

TEST_CASE("default solve options follow the structure") {
    CHECK(default_solve_options(tridiagonal(5, -1, 2, -1)).method == LS::Method::Tridiagonal);
    SparseBuilder b(3);
    for (int i = 0; i < 3; ++i) b.add(i, i, 4.0);
    b.add(0, 2, 1.0);
    b.add(2, 0, 1.0);
    CHECK(default_solve_options(b.finalize(true)).method == LS::Method::ConjugateGradient);
    b.add(1, 0, 0.5);
    CHECK(default_solve_options(b.finalize(false)).method == LS::Method::BiCgStab);
}

TEST_CASE("property: random SPD tridiagonal systems agree across methods") {
    testing::Gen gen(3);
    for (int trial = 0; trial < 50; ++trial) {
        const auto n = static_cast<std::size_t>(gen.integer(1, 64));
        SparseBuilder b(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double off = i + 1 < n ? gen.real(-1, 1) : 0.0;
            b.add(i, i, gen.real(2.1, 5));
            if (i + 1 < n) {
                b.add(i, i + 1, off);
                b.add(i + 1, i, off);
            }
        }
        const SparseMatrix m = b.finalize(true);
        check_structure(m);
        const Vector rhs = gen.vector(n);
        const Vector x1 = solve(m, rhs, with(LS::Method::Tridiagonal));
        const Vector x2 = solve(m, rhs, with(LS::Method::ConjugateGradient));
        const Vector x3 = solve(m, rhs, with(LS::Method::BiCgStab));
        const double scale = std::max(norm2(x1), 1e-300);
        CHECK(testing::max_abs_diff(x1, x2) / scale < 1e-10);
        CHECK(testing::max_abs_diff(x1, x3) / scale < 1e-10);
        // true residual meets the tolerance
        Vector r = matvec(m, x2);
        for (std::size_t i = 0; i < n; ++i) r[i] -= rhs[i];
        CHECK(norm2(r) <= 1e-12 * norm2(rhs));
    }
}

TEST_CASE("property: combine is entrywise linear over the union pattern") {
    testing::Gen gen(5);
    for (int trial = 0; trial < 20; ++trial) {
        const auto n = static_cast<std::size_t>(gen.integer(2, 12));
        SparseBuilder a(n), b(n);
        for (int k = 0; k < 20; ++k) {
            a.add(gen.integer(0, n - 1), gen.integer(0, n - 1), gen.real(-1, 1));
            b.add(gen.integer(0, n - 1), gen.integer(0, n - 1), gen.real(-1, 1));
        }
        const SparseMatrix ma = a.finalize(false);
        const SparseMatrix mb = b.finalize(false);
        const double alpha = gen.real(-2, 2), beta = gen.real(-2, 2);
        const SparseMatrix c = ma.combine(alpha, mb, beta);
        check_structure(c);
        const auto da = ma.to_dense(), db = mb.to_dense(), dc = c.to_dense();
        for (std::size_t i = 0; i < n * n; ++i) CHECK(dc[i] == doctest::Approx(alpha * da[i] + beta * db[i]).epsilon(1e-14));
        const Vector x = gen.vector(n);
        CHECK(testing::max_abs_diff(matvec(ma, x), testing::dense_multiply(da, n, x)) < 1e-14);
    }
}

TEST_CASE("nonsymmetric system via BiCGStab") {
    testing::Gen gen(9);
    const std::size_t n = 40;
    SparseBuilder b(n);
    for (std::size_t i = 0; i < n; ++i) {
        b.add(i, i, 4.0);
        if (i > 0) b.add(i, i - 1, gen.real(-1, 0));
        if (i + 3 < n) b.add(i, i + 3, gen.real(0, 1));
    }
    const SparseMatrix m = b.finalize(false);
    const Vector xs = gen.vector(n);
    const Vector rhs = matvec(m, xs);
    CHECK(testing::max_abs_diff(solve(m, rhs, with(LS::Method::BiCgStab)), xs) < 1e-10);
}

TEST_CASE("coordinate dump has one line per entry") {
    std::ostringstream os;
    write_coordinate(os, tridiagonal(3, -1, 2, -1));
    int lines = 0;
    for (char c : os.str()) lines += c == '\n';
    CHECK(lines == 7);
}
