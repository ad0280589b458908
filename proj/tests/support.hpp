#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "thermistor/sparse.hpp"

namespace testing {

/// Deterministic generator for hand-rolled property tests.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    std::vector<double> vector(std::size_t n, double lo = -1.0, double hi = 1.0) {
        std::vector<double> v(n);
        for (auto& x : v) x = real(lo, hi);
        return v;
    }

private:
    std::mt19937_64 rng_;
};

/// Five-point Gauss-Legendre on [-1, 1], tabulated.
inline constexpr std::array<double, 5> kGauss5Nodes{-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                                    0.9061798459386640};
inline constexpr std::array<double, 5> kGauss5Weights{0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                                      0.4786286704993665, 0.2369268850561891};

/// Composite 5-point Gauss on [a, b] with `panels` panels.
inline double integrate(const std::function<double(double)>& g, double a, double b, int panels) {
    const double w = (b - a) / panels;
    double sum = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double mid = a + (p + 0.5) * w;
        for (int q = 0; q < 5; ++q) sum += kGauss5Weights[q] * g(mid + 0.5 * w * kGauss5Nodes[q]);
    }
    return 0.5 * w * sum;
}

inline std::vector<double> dense_multiply(const std::vector<double>& dense, std::size_t n, const std::vector<double>& x) {
    std::vector<double> y(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) y[i] += dense[i * n + j] * x[j];
    return y;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace testing
