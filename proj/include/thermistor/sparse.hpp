#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace thermistor {

using Vector = std::vector<double>;

/// Compressed sparse row matrix. Column indices are strictly increasing
/// within each row. Immutable once built by SparseBuilder::finalize.
class SparseMatrix {
public:
    SparseMatrix() = default;

    static SparseMatrix identity(std::size_t n);

    std::size_t n() const noexcept { return n_; }
    std::size_t nnz() const noexcept { return values_.size(); }
    bool symmetric() const noexcept { return symmetric_; }

    std::span<const std::size_t> row_offsets() const noexcept { return row_offsets_; }
    std::span<const std::size_t> columns() const noexcept { return columns_; }
    std::span<const double> values() const noexcept { return values_; }

    /// Entry (i, j); zero when not stored.
    double at(std::size_t i, std::size_t j) const;
    /// max |i - j| over stored entries.
    std::size_t bandwidth() const;
    std::vector<double> to_dense() const;

    /// y = M x
    Vector multiply(std::span<const double> x) const;
    /// y += alpha * M x
    void multiply_add(std::span<const double> x, double alpha, std::span<double> y) const;

    /// alpha * this + beta * other over the union of both patterns.
    SparseMatrix combine(double alpha, const SparseMatrix& other, double beta) const;

private:
    friend class SparseBuilder;

    std::size_t n_ = 0;
    std::vector<std::size_t> row_offsets_{0};
    std::vector<std::size_t> columns_;
    std::vector<double> values_;
    bool symmetric_ = false;
};

/// Triplet accumulator. Duplicate entries are summed in insertion order,
/// so identical assembly sequences give bit-identical matrices.
class SparseBuilder {
public:
    explicit SparseBuilder(std::size_t n) : n_(n) {}

    void add(std::size_t i, std::size_t j, double v);
    void reserve(std::size_t count) { entries_.reserve(count); }

    /// With `symmetric`, the result is (M + M^T)/2 and flagged symmetric.
    SparseMatrix finalize(bool symmetric) const;

private:
    struct Entry {
        std::size_t row, col;
        double value;
    };
    std::size_t n_;
    std::vector<Entry> entries_;
};

struct LinearSolveOptions {
    enum class Method { Tridiagonal, ConjugateGradient, BiCgStab };
    Method method = Method::ConjugateGradient;
    double rel_tolerance = 1e-12;
    /// 0 means 10 * n.
    std::size_t max_iterations = 0;
    bool jacobi_preconditioner = false;
};

/// Euclidean norm.
double norm2(std::span<const double> x);
double dot(std::span<const double> a, std::span<const double> b);

/// Matrix-vector product with dimension checking.
Vector matvec(const SparseMatrix& m, std::span<const double> x);

/// Solves M x = b. Tridiagonal elimination requires bandwidth <= 1 and
/// works for any nonsingular tridiagonal matrix. Conjugate gradients
/// require M flagged symmetric with a positive diagonal. BiCGStab is for
/// the nonsymmetric Newton systems.
Vector solve(const SparseMatrix& m, std::span<const double> b, const LinearSolveOptions& opts = {});

/// Method chosen from the matrix structure: Thomas elimination when
/// tridiagonal, otherwise CG (symmetric) or BiCGStab.
LinearSolveOptions default_solve_options(const SparseMatrix& m, double rel_tolerance = 1e-12);

/// Coordinate format dump, one `i j value` line per stored entry.
void write_coordinate(std::ostream& os, const SparseMatrix& m);

}  // namespace thermistor
