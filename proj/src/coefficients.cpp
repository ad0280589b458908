#include "thermistor/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <sstream>

#include "thermistor/error.hpp"

namespace thermistor {

namespace {

struct Violation {
    std::string bound;
    double u;
    double value;
    std::string message;
};

double eval_at(const Expr& e, double u, const char* name, std::optional<Violation>& violation) {
    try {
        return e.eval({.u = u});
    } catch (const Error& err) {
        if (!violation)
            violation = Violation{name, u, std::numeric_limits<double>::quiet_NaN(),
                                  std::string(name) + " is not defined at u = " + std::to_string(u) + " (" +
                                      err.what() + ")"};
        return std::numeric_limits<double>::quiet_NaN();
    }
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

void check_derivative(const Expr& e, const Expr& de, const char* name, double u_range, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-u_range, u_range);
    constexpr double step = 1e-6;
    for (int i = 0; i < 100; ++i) {
        const double u = dist(rng);
        const double fd = (e.eval({.u = u + step}) - e.eval({.u = u - step})) / (2.0 * step);
        const double sym = de.eval({.u = u});
        if (std::abs(fd - sym) > 1e-6 * std::max(1.0, std::abs(sym)))
            throw Error(ErrorCode::InvalidArgument, std::string("symbolic derivative ") + name +
                                                        " disagrees with finite differences at u = " + fmt(u));
    }
}

}  // namespace

std::string ValidationReport::summary() const {
    std::ostringstream os;
    os.precision(10);
    os << "hypothesis check on u in [" << -u_range << ", " << u_range << "] with " << samples << " samples: "
       << "min f = " << min_f << " (u = " << argmin_f << "), "
       << "min k = " << min_k << " (u = " << argmin_k << "), "
       << "max k = " << max_k << " (u = " << argmax_k << "), "
       << "max |k'| = " << max_abs_k_prime << ", max |k''| = " << max_abs_k_double_prime
       << ", max |f'| = " << max_abs_f_prime;
    return os.str();
}

ValidationReport validate_hypotheses(const Expr& k, const Expr& f, double sigma, double k1, double k2, double u_range,
                                     int samples) {
    if (!(u_range > 0.0)) throw Error(ErrorCode::InvalidArgument, "u_range must be positive");
    if (samples < 100) throw Error(ErrorCode::InvalidArgument, "at least 100 samples are required");

    const Expr dk = differentiate(k, Var::U);
    const Expr ddk = differentiate(dk, Var::U);
    const Expr df = differentiate(f, Var::U);

    ValidationReport r;
    r.u_range = u_range;
    r.min_f = r.min_k = std::numeric_limits<double>::infinity();
    r.max_k = -std::numeric_limits<double>::infinity();

    std::optional<Violation> violation;
    const int m = samples / 2;
    r.samples = 2 * m + 1;
    for (int j = 0; j <= m; ++j) {
        for (const double sign : {1.0, -1.0}) {
            if (j == 0 && sign < 0.0) continue;
            const double u = sign * u_range * j / m;
            const double fv = eval_at(f, u, "f", violation);
            const double kv = eval_at(k, u, "k", violation);
            if (std::isnan(fv) || std::isnan(kv)) continue;
            if (fv < r.min_f) r.min_f = fv, r.argmin_f = u;
            if (kv < r.min_k) r.min_k = kv, r.argmin_k = u;
            if (kv > r.max_k) r.max_k = kv, r.argmax_k = u;
            r.max_abs_k_prime = std::max(r.max_abs_k_prime, std::abs(eval_at(dk, u, "k'", violation)));
            r.max_abs_k_double_prime = std::max(r.max_abs_k_double_prime, std::abs(eval_at(ddk, u, "k''", violation)));
            r.max_abs_f_prime = std::max(r.max_abs_f_prime, std::abs(eval_at(df, u, "f'", violation)));
            if (violation) continue;
            if (fv < sigma)
                violation = Violation{"f >= sigma", u, fv,
                                      "f(" + fmt(u) + ") = " + fmt(fv) + " is below sigma = " + fmt(sigma)};
            else if (kv < k1)
                violation = Violation{"k >= k1", u, kv, "k(" + fmt(u) + ") = " + fmt(kv) + " is below k1 = " + fmt(k1)};
            else if (kv > k2)
                violation = Violation{"k <= k2", u, kv, "k(" + fmt(u) + ") = " + fmt(kv) + " exceeds k2 = " + fmt(k2)};
        }
    }
    if (violation)
        throw HypothesisViolation(violation->bound, violation->u, violation->value,
                                  violation->message + "; witness u = " + fmt(violation->u));
    return r;
}

ValidationReport validate_hypotheses(const CoefficientSet& cs, double u_range, int samples) {
    return validate_hypotheses(cs.k(), cs.f(), cs.sigma(), cs.k1(), cs.k2(), u_range, samples);
}

CoefficientSet CoefficientSet::make(Expr k, Expr f, double lambda, double sigma, double k1, double k2,
                                    const ValidationOptions& opts) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw Error(ErrorCode::InvalidArgument, "lambda must be >= 0");
    if (!(sigma > 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma must be positive");
    if (!(k1 > 0.0) || !(k1 <= k2)) throw Error(ErrorCode::InvalidArgument, "bounds must satisfy 0 < k1 <= k2");
    for (const Var v : {Var::X, Var::Y, Var::T}) {
        if (k.depends_on(v) || f.depends_on(v))
            throw Error(ErrorCode::InvalidArgument,
                        "k and f may depend on u only, found '" + std::string(var_name(v)) + "'");
    }

    CoefficientSet cs;
    cs.k_ = std::move(k);
    cs.f_ = std::move(f);
    cs.k_prime_ = differentiate(cs.k_, Var::U);
    cs.k_double_prime_ = differentiate(cs.k_prime_, Var::U);
    cs.f_prime_ = differentiate(cs.f_, Var::U);
    cs.lambda_ = lambda;
    cs.sigma_ = sigma;
    cs.k1_ = k1;
    cs.k2_ = k2;
    cs.report_ = validate_hypotheses(cs, opts.u_range, opts.samples);

    check_derivative(cs.k_, cs.k_prime_, "k'", opts.u_range, opts.seed);
    check_derivative(cs.k_prime_, cs.k_double_prime_, "k''", opts.u_range, opts.seed + 1);
    check_derivative(cs.f_, cs.f_prime_, "f'", opts.u_range, opts.seed + 2);
    return cs;
}

CoefficientSet CoefficientSet::unit(double lambda) {
    return make(Expr(1.0), Expr(1.0), lambda, 1.0, 1.0, 1.0);
}

CoefficientSet CoefficientSet::smooth(double lambda) {
    return make(parse_expr("1 + 1/(1 + u^2)"), parse_expr("1 + exp(-u^2)"), lambda, 1.0, 1.0, 2.0);
}

CoefficientSet CoefficientSet::with_lambda(double lambda) const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw Error(ErrorCode::InvalidArgument, "lambda must be >= 0");
    CoefficientSet out = *this;
    out.lambda_ = lambda;
    return out;
}

}  // namespace thermistor
