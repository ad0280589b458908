#pragma once

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "thermistor/coefficients.hpp"
#include "thermistor/expr.hpp"
#include "thermistor/mesh.hpp"
#include "thermistor/quadrature.hpp"
#include "thermistor/sparse.hpp"

namespace thermistor {

/// Degrees of freedom of the continuous P1 space on a mesh. By default the
/// boundary vertices are eliminated (homogeneous Dirichlet data), so dof i
/// is the i-th interior vertex in mesh order.
class DofMap {
public:
    enum class Boundary { Eliminate, Keep };

    explicit DofMap(Mesh mesh, Boundary boundary = Boundary::Eliminate);

    static std::shared_ptr<const DofMap> create(Mesh mesh, Boundary boundary = Boundary::Eliminate) {
        return std::make_shared<const DofMap>(std::move(mesh), boundary);
    }

    const Mesh& mesh() const noexcept { return mesh_; }
    int dim() const noexcept { return mesh_.dim(); }
    std::size_t n_dofs() const noexcept { return dof_vertices_.size(); }
    /// Vertex index of each dof.
    std::span<const int> dof_vertices() const noexcept { return dof_vertices_; }
    /// Dof index of vertex v, or -1 when v is an eliminated boundary vertex.
    int dof(std::size_t v) const { return vertex_dofs_[v]; }

    double element_measure(std::size_t e) const { return measure_[e]; }
    /// Gradient of the barycentric coordinate of local vertex a (constant).
    const Point& basis_gradient(std::size_t e, int a) const { return gradients_[e * 3 + a]; }

    /// Physical coordinates of a barycentric point in element e.
    Point map_point(std::size_t e, const std::array<double, 3>& bary) const;

    /// Expands dof coefficients to one value per vertex (zero on eliminated
    /// boundary vertices).
    std::vector<double> vertex_values(std::span<const double> coeffs) const;

private:
    Mesh mesh_;
    std::vector<int> dof_vertices_;
    std::vector<int> vertex_dofs_;
    std::vector<double> measure_;
    std::vector<Point> gradients_;
};

/// Element of S_h: u_h = sum_j coeffs[j] phi_j.
struct FeFunction {
    std::shared_ptr<const DofMap> dofmap;
    Vector coeffs;

    static FeFunction zero(std::shared_ptr<const DofMap> dm) {
        const std::size_t n = dm->n_dofs();
        return {std::move(dm), Vector(n, 0.0)};
    }

    /// Nodal value; zero on eliminated boundary vertices.
    double vertex_value(std::size_t v) const {
        const int d = dofmap->dof(v);
        return d < 0 ? 0.0 : coeffs[static_cast<std::size_t>(d)];
    }
};

FeFunction operator-(const FeFunction& a, const FeFunction& b);

/// Exact field with its symbolic spatial gradient.
struct ExactSolution {
    Expr u;
    Expr ux;
    Expr uy;

    static ExactSolution from(Expr u) {
        ExactSolution s{std::move(u), {}, {}};
        s.ux = differentiate(s.u, Var::X);
        s.uy = differentiate(s.u, Var::Y);
        return s;
    }
};

using SpatialFunction = std::function<double(const Point&)>;

SparseMatrix assemble_mass(const DofMap& dm);

/// (k(u_h) grad phi_j, grad phi_k) without bound checks.
SparseMatrix assemble_stiffness(const DofMap& dm, const Expr& k, const FeFunction& state);

/// As above, raising HypothesisViolation when k(u_h) leaves
/// [k1 (1 - 1e-9), k2 (1 + 1e-9)] at a quadrature point.
SparseMatrix assemble_stiffness(const DofMap& dm, const CoefficientSet& cs, const FeFunction& state);

/// (k(u(., t)) grad phi_j, grad phi_k) with the exact solution inside k.
SparseMatrix assemble_weighted_stiffness_exact(const DofMap& dm, const Expr& k, const Expr& u_exact, double t);

/// I(u_h) = int_Omega f(u_h) dx using the assembly rule.
double nonlocal_integral(const DofMap& dm, const Expr& f, const FeFunction& state);

/// lambda (f(u_h), phi_j) / I(u_h)^2 with the same rule as nonlocal_integral.
Vector assemble_load(const DofMap& dm, const Expr& f, const FeFunction& state, double lambda);

/// (g, phi_j) with the assembly rule.
Vector assemble_source(const DofMap& dm, const SpatialFunction& g);

FeFunction interpolate(const std::shared_ptr<const DofMap>& dm, const Expr& v, double t);

/// Solves (k(u) grad(p - u), grad chi) = 0 for all chi in S_h.
FeFunction elliptic_projection(const std::shared_ptr<const DofMap>& dm, const Expr& k, const Expr& u_exact, double t);

double norm_L2(const FeFunction& v);
double norm_H1_semi(const FeFunction& v);
/// || v - u(., t) || with the order-5 rule.
double error_L2(const FeFunction& v, const ExactSolution& u, double t);
double error_H1_semi(const FeFunction& v, const ExactSolution& u, double t);
/// max over elements of |grad v| (v is piecewise linear).
double max_gradient(const FeFunction& v);

/// Every state-dependent quantity one nonlinear iteration needs, from a
/// single pass over the elements with the assembly rule.
struct NonlinearTerms {
    SparseMatrix stiffness;   // (k(w) grad phi_m, grad phi_j)
    Vector source;            // (f(w), phi_j)
    double integral = 0.0;    // int f(w)
    // Jacobian pieces, only with_jacobian:
    SparseMatrix stiffness_derivative;  // (k'(w) phi_m grad w, grad phi_j)
    SparseMatrix source_derivative;     // (f'(w) phi_m, phi_j)
    Vector integral_derivative;         // (f'(w), phi_m)

    /// lambda * source / integral^2
    Vector load(double lambda) const;
};

NonlinearTerms assemble_nonlinear_terms(const DofMap& dm, const CoefficientSet& cs, std::span<const double> coeffs,
                                        bool with_jacobian);

}  // namespace thermistor
