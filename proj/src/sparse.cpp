#include "thermistor/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <string>

#include "thermistor/error.hpp"

namespace thermistor {

SparseMatrix SparseMatrix::identity(std::size_t n) {
    SparseBuilder b(n);
    for (std::size_t i = 0; i < n; ++i) b.add(i, i, 1.0);
    return b.finalize(true);
}

double SparseMatrix::at(std::size_t i, std::size_t j) const {
    const auto first = columns_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[i]);
    const auto last = columns_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[i + 1]);
    const auto it = std::lower_bound(first, last, j);
    if (it == last || *it != j) return 0.0;
    return values_[static_cast<std::size_t>(it - columns_.begin())];
}

std::size_t SparseMatrix::bandwidth() const {
    std::size_t bw = 0;
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
            const std::size_t j = columns_[k];
            bw = std::max(bw, i > j ? i - j : j - i);
        }
    return bw;
}

std::vector<double> SparseMatrix::to_dense() const {
    std::vector<double> d(n_ * n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) d[i * n_ + columns_[k]] = values_[k];
    return d;
}

Vector SparseMatrix::multiply(std::span<const double> x) const {
    Vector y(n_, 0.0);
    multiply_add(x, 1.0, y);
    return y;
}

void SparseMatrix::multiply_add(std::span<const double> x, double alpha, std::span<double> y) const {
    for (std::size_t i = 0; i < n_; ++i) {
        double s = 0.0;
        for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) s += values_[k] * x[columns_[k]];
        y[i] += alpha * s;
    }
}

SparseMatrix SparseMatrix::combine(double alpha, const SparseMatrix& other, double beta) const {
    if (other.n_ != n_) throw Error(ErrorCode::DimensionMismatch, "combine of matrices with different sizes");
    SparseMatrix out;
    out.n_ = n_;
    out.symmetric_ = symmetric_ && other.symmetric_;
    out.row_offsets_.assign(n_ + 1, 0);
    out.columns_.reserve(std::max(nnz(), other.nnz()));
    out.values_.reserve(std::max(nnz(), other.nnz()));
    for (std::size_t i = 0; i < n_; ++i) {
        std::size_t a = row_offsets_[i], ae = row_offsets_[i + 1];
        std::size_t b = other.row_offsets_[i], be = other.row_offsets_[i + 1];
        while (a < ae || b < be) {
            if (b == be || (a < ae && columns_[a] < other.columns_[b])) {
                out.columns_.push_back(columns_[a]);
                out.values_.push_back(alpha * values_[a]);
                ++a;
            } else if (a == ae || other.columns_[b] < columns_[a]) {
                out.columns_.push_back(other.columns_[b]);
                out.values_.push_back(beta * other.values_[b]);
                ++b;
            } else {
                out.columns_.push_back(columns_[a]);
                out.values_.push_back(alpha * values_[a] + beta * other.values_[b]);
                ++a;
                ++b;
            }
        }
        out.row_offsets_[i + 1] = out.columns_.size();
    }
    return out;
}

void SparseBuilder::add(std::size_t i, std::size_t j, double v) {
    if (i >= n_ || j >= n_) throw Error(ErrorCode::DimensionMismatch, "triplet index out of range");
    entries_.push_back({i, j, v});
}

SparseMatrix SparseBuilder::finalize(bool symmetric) const {
    std::vector<std::size_t> order(entries_.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& ea = entries_[a];
        const auto& eb = entries_[b];
        return ea.row != eb.row ? ea.row < eb.row : ea.col < eb.col;
    });

    SparseMatrix m;
    m.n_ = n_;
    m.symmetric_ = symmetric;
    m.row_offsets_.assign(n_ + 1, 0);
    std::size_t k = 0;
    while (k < order.size()) {
        const auto& e = entries_[order[k]];
        double sum = 0.0;
        for (; k < order.size() && entries_[order[k]].row == e.row && entries_[order[k]].col == e.col; ++k)
            sum += entries_[order[k]].value;
        m.columns_.push_back(e.col);
        m.values_.push_back(sum);
        ++m.row_offsets_[e.row + 1];
    }
    for (std::size_t i = 0; i < n_; ++i) m.row_offsets_[i + 1] += m.row_offsets_[i];

    if (symmetric) {
        std::vector<double> sym(m.values_.size());
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t p = m.row_offsets_[i]; p < m.row_offsets_[i + 1]; ++p)
                sym[p] = 0.5 * (m.values_[p] + m.at(m.columns_[p], i));
        m.values_ = std::move(sym);
    }
    return m;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

Vector matvec(const SparseMatrix& m, std::span<const double> x) {
    if (x.size() != m.n())
        throw Error(ErrorCode::DimensionMismatch,
                    "vector of length " + std::to_string(x.size()) + " for matrix of size " + std::to_string(m.n()));
    return m.multiply(x);
}

namespace {

Vector thomas(const SparseMatrix& m, std::span<const double> b) {
    const std::size_t n = m.n();
    if (n == 0) return {};
    std::vector<double> c(n, 0.0), d(n, 0.0);
    double denom = m.at(0, 0);
    if (std::abs(denom) < 1e-300) throw Error(ErrorCode::SingularPivot, "zero pivot in row 0");
    c[0] = n > 1 ? m.at(0, 1) / denom : 0.0;
    d[0] = b[0] / denom;
    for (std::size_t i = 1; i < n; ++i) {
        const double lower = m.at(i, i - 1);
        denom = m.at(i, i) - lower * c[i - 1];
        if (std::abs(denom) < 1e-300) throw Error(ErrorCode::SingularPivot, "zero pivot in row " + std::to_string(i));
        c[i] = i + 1 < n ? m.at(i, i + 1) / denom : 0.0;
        d[i] = (b[i] - lower * d[i - 1]) / denom;
    }
    Vector x(n);
    x[n - 1] = d[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
    return x;
}

Vector inverse_diagonal(const SparseMatrix& m, bool enabled) {
    Vector inv(m.n(), 1.0);
    if (!enabled) return inv;
    for (std::size_t i = 0; i < m.n(); ++i) {
        const double d = m.at(i, i);
        if (std::abs(d) < 1e-300) throw Error(ErrorCode::SingularPivot, "zero diagonal in Jacobi preconditioner");
        inv[i] = 1.0 / d;
    }
    return inv;
}

Vector conjugate_gradient(const SparseMatrix& m, std::span<const double> b, const LinearSolveOptions& opts) {
    const std::size_t n = m.n();
    if (!m.symmetric()) throw Error(ErrorCode::InvalidArgument, "conjugate gradients need a symmetric matrix");
    for (std::size_t i = 0; i < n; ++i)
        if (!(m.at(i, i) > 0.0)) throw Error(ErrorCode::InvalidArgument, "conjugate gradients need a positive diagonal");

    const std::size_t max_it = opts.max_iterations ? opts.max_iterations : 10 * std::max<std::size_t>(n, 1);
    const Vector inv_diag = inverse_diagonal(m, opts.jacobi_preconditioner);
    Vector x(n, 0.0);
    const double bnorm = norm2(b);
    if (bnorm == 0.0) return x;

    Vector r(b.begin(), b.end());
    Vector z(n), p(n), q(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    p = z;
    double rz = dot(r, z);
    for (std::size_t it = 0; it < max_it; ++it) {
        if (norm2(r) <= opts.rel_tolerance * bnorm) return x;
        std::fill(q.begin(), q.end(), 0.0);
        m.multiply_add(p, 1.0, q);
        const double alpha = rz / dot(p, q);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    // recurrence residual can drift; confirm with a true residual
    Vector res(b.begin(), b.end());
    m.multiply_add(x, -1.0, res);
    if (norm2(res) <= opts.rel_tolerance * bnorm) return x;
    throw Error(ErrorCode::NotConverged, "conjugate gradients did not reach tolerance in " + std::to_string(max_it) +
                                             " iterations (relative residual " + std::to_string(norm2(res) / bnorm) +
                                             ")");
}

Vector bicgstab(const SparseMatrix& m, std::span<const double> b, const LinearSolveOptions& opts) {
    const std::size_t n = m.n();
    const std::size_t max_it = opts.max_iterations ? opts.max_iterations : 10 * std::max<std::size_t>(n, 1);
    const Vector inv_diag = inverse_diagonal(m, opts.jacobi_preconditioner);
    Vector x(n, 0.0);
    const double bnorm = norm2(b);
    if (bnorm == 0.0) return x;

    Vector r(b.begin(), b.end());
    const Vector r_hat = r;
    Vector p(n, 0.0), v(n, 0.0), s(n), t(n), y(n), z(n);
    double rho = 1.0, alpha = 1.0, omega = 1.0;
    for (std::size_t it = 0; it < max_it; ++it) {
        if (norm2(r) <= opts.rel_tolerance * bnorm) return x;
        const double rho_new = dot(r_hat, r);
        if (rho_new == 0.0) break;
        const double beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
        for (std::size_t i = 0; i < n; ++i) y[i] = inv_diag[i] * p[i];
        std::fill(v.begin(), v.end(), 0.0);
        m.multiply_add(y, 1.0, v);
        alpha = rho / dot(r_hat, v);
        for (std::size_t i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
        for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * s[i];
        std::fill(t.begin(), t.end(), 0.0);
        m.multiply_add(z, 1.0, t);
        const double tt = dot(t, t);
        omega = tt > 0.0 ? dot(t, s) / tt : 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * y[i] + omega * z[i];
            r[i] = s[i] - omega * t[i];
        }
        if (omega == 0.0) break;
    }
    Vector res(b.begin(), b.end());
    m.multiply_add(x, -1.0, res);
    if (norm2(res) <= opts.rel_tolerance * bnorm) return x;
    throw Error(ErrorCode::NotConverged, "BiCGStab did not reach tolerance (relative residual " +
                                             std::to_string(norm2(res) / bnorm) + ")");
}

}  // namespace

Vector solve(const SparseMatrix& m, std::span<const double> b, const LinearSolveOptions& opts) {
    if (b.size() != m.n()) throw Error(ErrorCode::DimensionMismatch, "right-hand side length differs from matrix size");
    if (!(opts.rel_tolerance > 0.0)) throw Error(ErrorCode::InvalidArgument, "rel_tolerance must be positive");
    using Method = LinearSolveOptions::Method;
    switch (opts.method) {
    case Method::Tridiagonal:
        if (m.bandwidth() > 1) throw Error(ErrorCode::InvalidArgument, "tridiagonal solve on a matrix with bandwidth > 1");
        return thomas(m, b);
    case Method::ConjugateGradient:
        return conjugate_gradient(m, b, opts);
    case Method::BiCgStab:
        return bicgstab(m, b, opts);
    }
    return {};
}

LinearSolveOptions default_solve_options(const SparseMatrix& m, double rel_tolerance) {
    LinearSolveOptions o;
    o.rel_tolerance = rel_tolerance;
    if (m.bandwidth() <= 1)
        o.method = LinearSolveOptions::Method::Tridiagonal;
    else
        o.method = m.symmetric() ? LinearSolveOptions::Method::ConjugateGradient : LinearSolveOptions::Method::BiCgStab;
    return o;
}

void write_coordinate(std::ostream& os, const SparseMatrix& m) {
    const auto prec = os.precision(17);
    const auto offsets = m.row_offsets();
    const auto cols = m.columns();
    const auto vals = m.values();
    for (std::size_t i = 0; i < m.n(); ++i)
        for (std::size_t k = offsets[i]; k < offsets[i + 1]; ++k) os << i << ' ' << cols[k] << ' ' << vals[k] << '\n';
    os.precision(prec);
}

}  // namespace thermistor
