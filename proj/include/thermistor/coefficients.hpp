#pragma once

#include <cstdint>
#include <string>

#include "thermistor/expr.hpp"

namespace thermistor {

/// Sampling controls for the empirical bound checks.
struct ValidationOptions {
    /// Samples cover u in [-u_range, u_range].
    double u_range = 10.0;
    int samples = 10000;
    /// Seed for the random points of the derivative self-check.
    std::uint64_t seed = 20240229;
};

/// Extremes observed on the sample grid.
struct ValidationReport {
    double u_range = 0.0;
    int samples = 0;
    double min_f = 0.0;
    double argmin_f = 0.0;
    double min_k = 0.0;
    double argmin_k = 0.0;
    double max_k = 0.0;
    double argmax_k = 0.0;
    double max_abs_k_prime = 0.0;
    double max_abs_k_double_prime = 0.0;
    double max_abs_f_prime = 0.0;

    std::string summary() const;
};

/// Diffusivity k(u), source shape f(u), the parameter lambda and the
/// declared bounds f >= sigma, k1 <= k <= k2. Derivatives are derived
/// symbolically on construction.
class CoefficientSet {
public:
    /// Validates the bounds on a sample grid and checks the symbolic
    /// derivatives against central differences. Throws HypothesisViolation
    /// or Error(InvalidArgument).
    static CoefficientSet make(Expr k, Expr f, double lambda, double sigma, double k1, double k2,
                               const ValidationOptions& opts = {});

    /// k = 1, f = 1.
    static CoefficientSet unit(double lambda = 1.0);
    /// k = 1 + 1/(1+u^2) in [1, 2], f = 1 + exp(-u^2) >= 1.
    static CoefficientSet smooth(double lambda = 1.0);

    const Expr& k() const noexcept { return k_; }
    const Expr& f() const noexcept { return f_; }
    const Expr& k_prime() const noexcept { return k_prime_; }
    const Expr& k_double_prime() const noexcept { return k_double_prime_; }
    const Expr& f_prime() const noexcept { return f_prime_; }
    double lambda() const noexcept { return lambda_; }
    double sigma() const noexcept { return sigma_; }
    double k1() const noexcept { return k1_; }
    double k2() const noexcept { return k2_; }
    const ValidationReport& report() const noexcept { return report_; }

    /// k is the literal constant 1.
    bool unit_diffusivity() const { return k_.is_constant(1.0); }

    /// Same coefficients with a different lambda (bounds are unaffected).
    CoefficientSet with_lambda(double lambda) const;

private:
    CoefficientSet() = default;

    Expr k_, f_, k_prime_, k_double_prime_, f_prime_;
    double lambda_ = 0.0, sigma_ = 0.0, k1_ = 0.0, k2_ = 0.0;
    ValidationReport report_;
};

/// Samples f and k on a symmetric grid {0, +-u_range*j/m} (m = samples/2)
/// and fails on the first violating sample closest to u = 0.
ValidationReport validate_hypotheses(const CoefficientSet& cs, double u_range, int samples);

/// Same check on raw expressions, used before a CoefficientSet exists.
ValidationReport validate_hypotheses(const Expr& k, const Expr& f, double sigma, double k1, double k2, double u_range,
                                     int samples);

}  // namespace thermistor
