#include "thermistor/schemes.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "thermistor/error.hpp"

namespace thermistor {

std::string_view to_string(SchemeKind k) {
    switch (k) {
    case SchemeKind::BackwardEuler: return "backward_euler";
    case SchemeKind::CrankNicolson: return "crank_nicolson";
    case SchemeKind::Linearized: return "linearized";
    }
    return "?";
}

std::string_view to_string(NonlinearMethod m) {
    return m == NonlinearMethod::Newton ? "newton" : "fixed_point";
}

void SchemeConfig::validate() const {
    if (!(tau > 0.0)) throw Error(ErrorCode::InvalidArgument, "tau must be positive");
    if (!(tau <= t_end * (1.0 + 1e-12))) throw Error(ErrorCode::InvalidArgument, "tau must not exceed t_end");
    if (!(nonlinear.tolerance > 0.0)) throw Error(ErrorCode::InvalidArgument, "nonlinear tolerance must be positive");
    if (nonlinear.max_iters < 1) throw Error(ErrorCode::InvalidArgument, "max_iters must be at least 1");
    if (!(nonlinear.damping > 0.0 && nonlinear.damping <= 1.0))
        throw Error(ErrorCode::InvalidArgument, "damping must lie in (0, 1]");
}

int step_count(const SchemeConfig& cfg) {
    cfg.validate();
    const double steps = cfg.t_end / cfg.tau;
    const double rounded = std::round(steps);
    if (std::abs(steps - rounded) > 1e-9) {
        std::ostringstream os;
        os.precision(17);
        os << "t_end / tau = " << steps << " is not an integer";
        throw Error(ErrorCode::NonIntegerStepCount, os.str());
    }
    return static_cast<int>(rounded);
}

namespace {

double mass_norm(const SparseMatrix& mass, std::span<const double> v) {
    return std::sqrt(std::max(0.0, dot(v, mass.multiply(v))));
}

Vector source_vector(const DofMap& dm, const SourceTerm& forcing, double t) {
    if (!forcing) return Vector(dm.n_dofs(), 0.0);
    return assemble_source(dm, forcing(t));
}

/// theta = 1 gives backward Euler, theta = 1/2 Crank-Nicolson.
struct ImplicitProblem {
    const DofMap& dm;
    const CoefficientSet& cs;
    const SparseMatrix& mass;
    const Vector& prev;
    const Vector& g;
    double tau;
    double theta;

    Vector blend(std::span<const double> v) const {
        Vector w(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) w[i] = theta * v[i] + (1.0 - theta) * prev[i];
        return w;
    }

    /// R(V) = A (V - prev)/tau + B(W) W - load(W) - g, W = blend(V).
    Vector residual(std::span<const double> v, const Vector& w, const NonlinearTerms& terms) const {
        Vector diff(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) diff[i] = (v[i] - prev[i]) / tau;
        Vector r = mass.multiply(diff);
        terms.stiffness.multiply_add(w, 1.0, r);
        const double scale = cs.lambda() / (terms.integral * terms.integral);
        for (std::size_t i = 0; i < r.size(); ++i) r[i] -= scale * terms.source[i] + g[i];
        return r;
    }

    Vector fixed_point_update(const NonlinearTerms& terms) const {
        const SparseMatrix lhs = mass.combine(1.0, terms.stiffness, tau * theta);
        Vector rhs = mass.multiply(prev);
        if (theta < 1.0) terms.stiffness.multiply_add(prev, -tau * (1.0 - theta), rhs);
        const Vector load = terms.load(cs.lambda());
        for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += tau * (load[i] + g[i]);
        return solve(lhs, rhs, default_solve_options(lhs, 1e-13));
    }

    /// Newton correction for J delta = -R. The nonlocal factor lambda/I^2
    /// contributes a rank-one term handled by Sherman-Morrison.
    Vector newton_update(std::span<const double> v, const Vector& r, const NonlinearTerms& terms) const {
        const double lam = cs.lambda();
        const double inv_i2 = 1.0 / (terms.integral * terms.integral);
        SparseMatrix j0 = mass.combine(1.0 / tau, terms.stiffness, theta);
        j0 = j0.combine(1.0, terms.stiffness_derivative, theta);
        j0 = j0.combine(1.0, terms.source_derivative, -theta * lam * inv_i2);
        const auto opts = default_solve_options(j0, 1e-13);

        Vector minus_r(r.size());
        for (std::size_t i = 0; i < r.size(); ++i) minus_r[i] = -r[i];
        Vector y = solve(j0, minus_r, opts);
        const double c = theta * 2.0 * lam * inv_i2 / terms.integral;
        if (c != 0.0) {
            const Vector z = solve(j0, terms.source, opts);
            const double denom = 1.0 + c * dot(terms.integral_derivative, z);
            const double factor = c * dot(terms.integral_derivative, y) / denom;
            for (std::size_t i = 0; i < y.size(); ++i) y[i] -= factor * z[i];
        }
        Vector out(v.begin(), v.end());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += y[i];
        return out;
    }
};

TimeStepRecord implicit_step(const TimeStepRecord& prev, const SchemeConfig& cfg, const CoefficientSet& cs,
                             const SourceTerm& forcing, const std::optional<Vector>& initial_guess, double theta) {
    cfg.validate();
    const DofMap& dm = *prev.state.dofmap;
    const double tau = cfg.tau;
    const double t_new = prev.t + tau;
    const SparseMatrix mass = assemble_mass(dm);
    const Vector g = source_vector(dm, forcing, prev.t + theta * tau);
    const ImplicitProblem problem{dm, cs, mass, prev.state.coeffs, g, tau, theta};
    const bool newton = cfg.nonlinear.method == NonlinearMethod::Newton;

    Vector v = initial_guess ? *initial_guess : prev.state.coeffs;
    if (v.size() != dm.n_dofs()) throw Error(ErrorCode::DimensionMismatch, "initial guess does not match dof map");

    // For tiny tau the residual has a roundoff floor of order eps ||A|| ||V|| / tau;
    // an update that has stagnated at roundoff is accepted as converged.
    constexpr double kStagnation = 1e-14;
    double last_residual = 0.0;
    double last_update = std::numeric_limits<double>::infinity();
    for (int m = 0;; ++m) {
        const Vector w = problem.blend(v);
        const NonlinearTerms terms = assemble_nonlinear_terms(dm, cs, w, newton);
        const Vector r = problem.residual(v, w, terms);
        last_residual = norm2(r);
        const double scale = 1.0 + mass_norm(mass, v);
        if (last_residual <= cfg.nonlinear.tolerance * scale || last_update <= kStagnation * scale) {
            TimeStepRecord rec;
            rec.n = prev.n + 1;
            rec.t = t_new;
            rec.state = FeFunction{prev.state.dofmap, std::move(v)};
            rec.nonlinear_iters = m;
            rec.nonlocal_value = nonlocal_integral(dm, cs.f(), rec.state);
            return rec;
        }
        if (m == cfg.nonlinear.max_iters) break;

        const Vector next = newton ? problem.newton_update(v, r, terms) : problem.fixed_point_update(terms);
        const double omega = cfg.nonlinear.damping;
        Vector delta(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            delta[i] = omega * (next[i] - v[i]);
            v[i] += delta[i];
        }
        last_update = mass_norm(mass, delta);
    }
    std::ostringstream os;
    os << to_string(cfg.nonlinear.method) << " iteration did not converge in " << cfg.nonlinear.max_iters
       << " iterations at t = " << t_new << " (residual " << last_residual << ")";
    throw Error(ErrorCode::NonlinearDivergence, os.str());
}

}  // namespace

TimeStepRecord step_backward_euler(const TimeStepRecord& prev, const SchemeConfig& cfg, const CoefficientSet& cs,
                                   const SourceTerm& forcing, const std::optional<Vector>& initial_guess) {
    return implicit_step(prev, cfg, cs, forcing, initial_guess, 1.0);
}

TimeStepRecord step_crank_nicolson(const TimeStepRecord& prev, const SchemeConfig& cfg, const CoefficientSet& cs,
                                   const SourceTerm& forcing, const std::optional<Vector>& initial_guess) {
    return implicit_step(prev, cfg, cs, forcing, initial_guess, 0.5);
}

SparseMatrix linearized_system_matrix(const DofMap& dm, double tau) {
    const SparseMatrix mass = assemble_mass(dm);
    const SparseMatrix stiff = assemble_stiffness(dm, Expr(1.0), FeFunction{nullptr, Vector(dm.n_dofs(), 0.0)});
    return mass.combine(1.0, stiff, tau);
}

TimeStepRecord step_linearized(const TimeStepRecord& prev, const SchemeConfig& cfg, const CoefficientSet& cs,
                               const SourceTerm& forcing) {
    cfg.validate();
    if (!cs.unit_diffusivity())
        throw Error(ErrorCode::UnsupportedCoefficient, "the linearized scheme requires k = 1, got k = " + cs.k().str());
    const DofMap& dm = *prev.state.dofmap;
    if (dm.dim() != 1) throw Error(ErrorCode::UnsupportedDimension, "the linearized scheme is one-dimensional");

    const double tau = cfg.tau;
    const double t_new = prev.t + tau;
    const SparseMatrix mass = assemble_mass(dm);
    const NonlinearTerms terms = assemble_nonlinear_terms(dm, cs, prev.state.coeffs, false);
    const SparseMatrix lhs = mass.combine(1.0, terms.stiffness, tau);
    Vector rhs = mass.multiply(prev.state.coeffs);
    const Vector load = terms.load(cs.lambda());
    const Vector g = source_vector(dm, forcing, t_new);
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += tau * (load[i] + g[i]);

    LinearSolveOptions opts;
    opts.method = LinearSolveOptions::Method::Tridiagonal;
    TimeStepRecord rec;
    rec.n = prev.n + 1;
    rec.t = t_new;
    rec.state = FeFunction{prev.state.dofmap, solve(lhs, rhs, opts)};
    rec.nonlinear_iters = 0;
    rec.nonlocal_value = nonlocal_integral(dm, cs.f(), rec.state);
    return rec;
}

TimeStepRecord step(const TimeStepRecord& prev, const SchemeConfig& cfg, const CoefficientSet& cs,
                    const SourceTerm& forcing, const std::optional<Vector>& initial_guess) {
    switch (cfg.scheme) {
    case SchemeKind::BackwardEuler: return step_backward_euler(prev, cfg, cs, forcing, initial_guess);
    case SchemeKind::CrankNicolson: return step_crank_nicolson(prev, cfg, cs, forcing, initial_guess);
    case SchemeKind::Linearized: return step_linearized(prev, cfg, cs, forcing);
    }
    throw Error(ErrorCode::InvalidArgument, "unknown scheme");
}

Vector step_residual(const TimeStepRecord& prev, const FeFunction& next, const SchemeConfig& cfg,
                     const CoefficientSet& cs, const SourceTerm& forcing) {
    const DofMap& dm = *prev.state.dofmap;
    const double tau = cfg.tau;
    const SparseMatrix mass = assemble_mass(dm);
    const Vector& u_prev = prev.state.coeffs;
    const std::size_t n = dm.n_dofs();

    Vector diff(n);
    for (std::size_t i = 0; i < n; ++i) diff[i] = (next.coeffs[i] - u_prev[i]) / tau;
    Vector r = mass.multiply(diff);

    if (cfg.scheme == SchemeKind::Linearized) {
        const NonlinearTerms old_terms = assemble_nonlinear_terms(dm, cs, u_prev, false);
        old_terms.stiffness.multiply_add(next.coeffs, 1.0, r);
        const Vector load = old_terms.load(cs.lambda());
        const Vector g = source_vector(dm, forcing, prev.t + tau);
        for (std::size_t i = 0; i < n; ++i) r[i] -= load[i] + g[i];
        return r;
    }

    const double theta = cfg.scheme == SchemeKind::CrankNicolson ? 0.5 : 1.0;
    Vector w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = theta * next.coeffs[i] + (1.0 - theta) * u_prev[i];
    const NonlinearTerms terms = assemble_nonlinear_terms(dm, cs, w, false);
    terms.stiffness.multiply_add(w, 1.0, r);
    const Vector load = terms.load(cs.lambda());
    const Vector g = source_vector(dm, forcing, prev.t + theta * tau);
    for (std::size_t i = 0; i < n; ++i) r[i] -= load[i] + g[i];
    return r;
}

RunResult run(const Expr& u0, const SchemeConfig& cfg, const CoefficientSet& cs,
              const std::shared_ptr<const DofMap>& dm, const SourceTerm& forcing, const RecordCallback& on_record) {
    const int steps = step_count(cfg);
    SchemeConfig uniform = cfg;
    uniform.tau = cfg.t_end / steps;

    RunResult out;
    const double ratio = uniform.tau / dm->mesh().h();
    if (ratio > 1.0) {
        std::ostringstream os;
        os << "tau/h = " << ratio << " > 1: uniqueness of the discrete solution is only guaranteed for small tau/h";
        out.warnings.push_back(os.str());
    }

    TimeStepRecord first;
    first.n = 0;
    first.t = 0.0;
    first.state = interpolate(dm, u0, 0.0);
    first.nonlocal_value = nonlocal_integral(*dm, cs.f(), first.state);
    out.records.reserve(static_cast<std::size_t>(steps) + 1);
    out.records.push_back(std::move(first));
    if (on_record) on_record(out.records.back());
    for (int n = 1; n <= steps; ++n) {
        TimeStepRecord next = step(out.records.back(), uniform, cs, forcing);
        next.t = n == steps ? cfg.t_end : next.t;
        out.records.push_back(std::move(next));
        if (on_record) on_record(out.records.back());
    }
    return out;
}

}  // namespace thermistor
