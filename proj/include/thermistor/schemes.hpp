#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "thermistor/coefficients.hpp"
#include "thermistor/fespace.hpp"

namespace thermistor {

enum class SchemeKind { BackwardEuler, CrankNicolson, Linearized };
enum class NonlinearMethod { FixedPoint, Newton };

struct NonlinearOptions {
    NonlinearMethod method = NonlinearMethod::FixedPoint;
    double tolerance = 1e-10;
    int max_iters = 50;
    /// Relaxation of each update, in (0, 1].
    double damping = 1.0;
};

struct SchemeConfig {
    SchemeKind scheme = SchemeKind::BackwardEuler;
    double tau = 0.01;
    double t_end = 0.5;
    NonlinearOptions nonlinear;

    /// Throws Error(InvalidArgument) when a field is out of range.
    void validate() const;
};

/// Additional right-hand side g(x, t). Calling it with a time returns the
/// spatial snapshot at that time, so per-time precomputation happens once.
using SourceTerm = std::function<SpatialFunction(double t)>;

struct TimeStepRecord {
    int n = 0;
    double t = 0.0;
    FeFunction state;
    int nonlinear_iters = 0;
    /// I(U^n) = int f(U^n) dx.
    double nonlocal_value = 0.0;
};

/// Fully implicit step: (U - U_prev)/tau + k(U), f(U) terms at U.
TimeStepRecord step_backward_euler(const TimeStepRecord& prev, const SchemeConfig& cfg, const CoefficientSet& cs,
                                   const SourceTerm& forcing = {},
                                   const std::optional<Vector>& initial_guess = std::nullopt);

/// Midpoint step: every state-dependent term at (U + U_prev)/2, forcing at
/// t_{n-1/2}.
TimeStepRecord step_crank_nicolson(const TimeStepRecord& prev, const SchemeConfig& cfg, const CoefficientSet& cs,
                                   const SourceTerm& forcing = {},
                                   const std::optional<Vector>& initial_guess = std::nullopt);

/// One linear solve of (A + tau K) U = A U_prev + tau (load(U_prev) + g(t_n)).
/// Requires k = 1 and a 1D mesh.
TimeStepRecord step_linearized(const TimeStepRecord& prev, const SchemeConfig& cfg, const CoefficientSet& cs,
                               const SourceTerm& forcing = {});

TimeStepRecord step(const TimeStepRecord& prev, const SchemeConfig& cfg, const CoefficientSet& cs,
                    const SourceTerm& forcing = {}, const std::optional<Vector>& initial_guess = std::nullopt);

/// Discrete residual of the configured scheme for the pair (prev, next);
/// zero when next is an exact solution of the step equations.
Vector step_residual(const TimeStepRecord& prev, const FeFunction& next, const SchemeConfig& cfg,
                     const CoefficientSet& cs, const SourceTerm& forcing = {});

/// Linear system of the linearized scheme, A + tau K (exposed for checks).
SparseMatrix linearized_system_matrix(const DofMap& dm, double tau);

struct RunResult {
    std::vector<TimeStepRecord> records;
    std::vector<std::string> warnings;
};

using RecordCallback = std::function<void(const TimeStepRecord&)>;

/// Time loop from U^0 = I_h u0 to t_end with uniform steps. `on_record` sees
/// each record as soon as it is computed.
RunResult run(const Expr& u0, const SchemeConfig& cfg, const CoefficientSet& cs,
              const std::shared_ptr<const DofMap>& dm, const SourceTerm& forcing = {},
              const RecordCallback& on_record = {});

/// Number of uniform steps, checking t_end / tau is an integer to 1e-9.
int step_count(const SchemeConfig& cfg);

std::string_view to_string(SchemeKind k);
std::string_view to_string(NonlinearMethod m);

}  // namespace thermistor
