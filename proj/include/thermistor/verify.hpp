#pragma once

#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <vector>

#include "thermistor/coefficients.hpp"
#include "thermistor/fespace.hpp"
#include "thermistor/mesh.hpp"
#include "thermistor/schemes.hpp"

namespace thermistor {

/// Manufactured problem: the equation is augmented with
///
///     g = u_t - div(k(u) grad u) - lambda f(u) / I(t)^2,
///     I(t) = int_Omega f(u(., t)) dx,
///
/// so that u_exact solves it. The local part of g is symbolic; I(t) is
/// evaluated by composite Gauss quadrature (5 points per panel, 256 panels
/// in 1D, 64 x 64 cells in 2D) and cached per time.
class MmsProblem {
public:
    const ExactSolution& exact() const noexcept { return exact_; }
    const Expr& u0() const noexcept { return u0_; }
    const CoefficientSet& coefficients() const noexcept { return cs_; }
    int dim() const noexcept { return dim_; }
    const Box& box() const noexcept { return box_; }
    /// u_t - div(k(u) grad u) evaluated symbolically.
    const Expr& local_forcing() const noexcept { return local_forcing_; }

    double nonlocal_integral(double t) const;
    double forcing(const Point& p, double t) const;
    SourceTerm source() const;

    /// Largest relative PDE residual over `samples` random space-time
    /// points, computed via the expanded form k(u) lap u + k'(u) |grad u|^2.
    double residual_check(int samples = 100, double t_max = 1.0) const;

private:
    friend MmsProblem build_mms(const Expr& u_exact, const CoefficientSet& cs, const Mesh& domain);

    struct Cache {
        std::mutex mutex;
        std::map<double, double> values;
    };

    ExactSolution exact_;
    Expr u0_;
    CoefficientSet cs_ = CoefficientSet::unit();
    int dim_ = 1;
    Box box_;
    Expr local_forcing_;
    Expr f_of_exact_;
    std::shared_ptr<Cache> cache_ = std::make_shared<Cache>();
};

/// Throws Error(BoundaryViolation) if u_exact does not vanish on the domain
/// boundary and Error(ResidualCheckFailed) if the residual check exceeds 1e-8.
MmsProblem build_mms(const Expr& u_exact, const CoefficientSet& cs, const Mesh& domain);

/// e^{-t} sin(pi (x+1)/2) for 1D meshes of (-1,1); e^{-t} sin(pi x) sin(pi y)
/// for the unit square.
Expr default_exact_solution(int dim);

/// Empirical order between two successive levels.
struct Eoc {
    enum class Kind { None, Value, Exact };
    Kind kind = Kind::None;
    double value = 0.0;
};

/// log2(e[i-1] / e[i]) for i >= 1; entry 0 is None. Pairs where both
/// errors fall below 1e-10 are flagged Exact.
std::vector<Eoc> compute_eoc(std::span<const double> errors);

struct SplitNorms {
    double l2 = 0.0;        // ||u_h - u||
    double h1 = 0.0;        // ||grad(u_h - u)||
    double theta = 0.0;     // ||u_h - p||, p the elliptic projection
    double rho = 0.0;       // ||p - u||
    double rho_grad = 0.0;  // ||grad(p - u)||
    double projection_grad_max = 0.0;
};

/// Splits u_h - u(t) = (u_h - p) + (p - u) with p the elliptic projection of
/// u(t) weighted by k(u(t)).
SplitNorms error_split(const FeFunction& uh, const MmsProblem& mms, double t);

struct ErrorReport {
    int level = 0;
    double h = 0.0;
    double tau = 0.0;
    SplitNorms norms;
    Eoc eoc_l2;
    Eoc eoc_h1;
};

/// Runs on meshes h, h/2, ... with a common step tau (default: t_end/N with
/// N = ceil(t_end / h_finest^2)).
std::vector<ErrorReport> spatial_eoc_study(const MmsProblem& mms, const SchemeConfig& cfg, const Mesh& coarsest,
                                           int levels, std::optional<double> tau = std::nullopt, int threads = 1);

/// Runs with tau = cfg.tau, cfg.tau/2, ... on a fixed mesh.
std::vector<ErrorReport> temporal_eoc_study(const MmsProblem& mms, const SchemeConfig& cfg, const Mesh& mesh,
                                            int levels, int threads = 1);

/// Columns level,h,tau,L2,H1semi,theta,rho,rho_grad,eoc_L2,eoc_H1; numbers
/// with 17 significant digits.
void write_errors_csv(std::ostream& os, std::span<const ErrorReport> rows);

}  // namespace thermistor
