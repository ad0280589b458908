#include "thermistor/fespace.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "thermistor/error.hpp"

namespace thermistor {

DofMap::DofMap(Mesh mesh, Boundary boundary) : mesh_(std::move(mesh)) {
    vertex_dofs_.assign(mesh_.n_vertices(), -1);
    for (std::size_t v = 0; v < mesh_.n_vertices(); ++v) {
        if (boundary == Boundary::Eliminate && mesh_.is_boundary(v)) continue;
        vertex_dofs_[v] = static_cast<int>(dof_vertices_.size());
        dof_vertices_.push_back(static_cast<int>(v));
    }

    const std::size_t ne = mesh_.n_elements();
    measure_.resize(ne);
    gradients_.assign(ne * 3, Point{0.0, 0.0});
    for (std::size_t e = 0; e < ne; ++e) {
        const auto el = mesh_.element(e);
        const double m = mesh_.element_measure(e);
        measure_[e] = std::abs(m);
        if (mesh_.dim() == 1) {
            gradients_[e * 3 + 0] = {-1.0 / m, 0.0};
            gradients_[e * 3 + 1] = {1.0 / m, 0.0};
        } else {
            const Point& p0 = mesh_.vertex(el[0]);
            const Point& p1 = mesh_.vertex(el[1]);
            const Point& p2 = mesh_.vertex(el[2]);
            const double twice = 2.0 * m;
            gradients_[e * 3 + 0] = {(p1[1] - p2[1]) / twice, (p2[0] - p1[0]) / twice};
            gradients_[e * 3 + 1] = {(p2[1] - p0[1]) / twice, (p0[0] - p2[0]) / twice};
            gradients_[e * 3 + 2] = {(p0[1] - p1[1]) / twice, (p1[0] - p0[0]) / twice};
        }
    }
}

Point DofMap::map_point(std::size_t e, const std::array<double, 3>& bary) const {
    const auto el = mesh_.element(e);
    Point p{0.0, 0.0};
    for (std::size_t a = 0; a < el.size(); ++a) {
        const Point& v = mesh_.vertex(el[a]);
        p[0] += bary[a] * v[0];
        p[1] += bary[a] * v[1];
    }
    return p;
}

std::vector<double> DofMap::vertex_values(std::span<const double> coeffs) const {
    if (coeffs.size() != n_dofs()) throw Error(ErrorCode::DimensionMismatch, "coefficient vector does not match dof map");
    std::vector<double> out(mesh_.n_vertices(), 0.0);
    for (std::size_t d = 0; d < dof_vertices_.size(); ++d) out[dof_vertices_[d]] = coeffs[d];
    return out;
}

FeFunction operator-(const FeFunction& a, const FeFunction& b) {
    if (a.coeffs.size() != b.coeffs.size()) throw Error(ErrorCode::DimensionMismatch, "FE functions on different spaces");
    FeFunction out{a.dofmap, a.coeffs};
    for (std::size_t i = 0; i < out.coeffs.size(); ++i) out.coeffs[i] -= b.coeffs[i];
    return out;
}

namespace {

/// Quadrature point data handed to the element kernels.
struct QPoint {
    std::size_t element;
    double weight;  // includes the element measure
    const std::array<double, 3>* bary;
    Point x;
    double u;  // u_h at the point
};

/// Calls fn(qp) for every quadrature point of every element; `vertex_u`
/// may be empty when no state is needed.
template <class Fn>
void for_each_qpoint(const DofMap& dm, const QuadratureRule& rule, std::span<const double> vertex_u, Fn&& fn) {
    const Mesh& mesh = dm.mesh();
    const double inv_ref = 1.0 / rule.reference_measure();
    for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
        const auto el = mesh.element(e);
        const double scale = dm.element_measure(e) * inv_ref;
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const auto& bary = rule.points[q];
            double u = 0.0;
            if (!vertex_u.empty())
                for (std::size_t a = 0; a < el.size(); ++a) u += bary[a] * vertex_u[el[a]];
            fn(QPoint{e, rule.weights[q] * scale, &bary, dm.map_point(e, bary), u});
        }
    }
}

double grad_dot(const Point& a, const Point& b) { return a[0] * b[0] + a[1] * b[1]; }

void check_state(const DofMap& dm, const FeFunction& state) {
    if (state.coeffs.size() != dm.n_dofs())
        throw Error(ErrorCode::DimensionMismatch, "state vector does not match dof map");
}

/// Assembles sum_q w(q) phi_a phi_b (mass_like) or sum_q w(q) grad phi_a . grad phi_b.
template <class Weight>
SparseMatrix assemble_weighted(const DofMap& dm, const QuadratureRule& rule, std::span<const double> vertex_u,
                               bool gradient_form, Weight&& weight) {
    const Mesh& mesh = dm.mesh();
    const int npe = mesh.nodes_per_element();
    SparseBuilder builder(dm.n_dofs());
    builder.reserve(mesh.n_elements() * npe * npe);
    std::vector<double> local(9, 0.0);
    std::size_t current = static_cast<std::size_t>(-1);

    auto flush = [&](std::size_t e) {
        const auto el = mesh.element(e);
        for (int a = 0; a < npe; ++a) {
            const int da = dm.dof(el[a]);
            if (da < 0) continue;
            for (int b = 0; b < npe; ++b) {
                const int db = dm.dof(el[b]);
                if (db < 0) continue;
                builder.add(da, db, local[a * 3 + b]);
            }
        }
    };

    for_each_qpoint(dm, rule, vertex_u, [&](const QPoint& qp) {
        if (qp.element != current) {
            if (current != static_cast<std::size_t>(-1)) flush(current);
            current = qp.element;
            std::fill(local.begin(), local.end(), 0.0);
        }
        const double w = qp.weight * weight(qp);
        for (int a = 0; a < npe; ++a)
            for (int b = 0; b < npe; ++b) {
                const double v = gradient_form
                                     ? grad_dot(dm.basis_gradient(qp.element, a), dm.basis_gradient(qp.element, b))
                                     : (*qp.bary)[a] * (*qp.bary)[b];
                local[a * 3 + b] += w * v;
            }
    });
    if (current != static_cast<std::size_t>(-1)) flush(current);
    return builder.finalize(true);
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

}  // namespace

SparseMatrix assemble_mass(const DofMap& dm) {
    return assemble_weighted(dm, assembly_rule(dm.dim()), {}, false, [](const QPoint&) { return 1.0; });
}

SparseMatrix assemble_stiffness(const DofMap& dm, const Expr& k, const FeFunction& state) {
    check_state(dm, state);
    const auto vu = dm.vertex_values(state.coeffs);
    return assemble_weighted(dm, assembly_rule(dm.dim()), vu, true, [&](const QPoint& qp) { return k.eval({.u = qp.u}); });
}

SparseMatrix assemble_stiffness(const DofMap& dm, const CoefficientSet& cs, const FeFunction& state) {
    check_state(dm, state);
    const auto vu = dm.vertex_values(state.coeffs);
    const double lo = cs.k1() * (1.0 - 1e-9);
    const double hi = cs.k2() * (1.0 + 1e-9);
    return assemble_weighted(dm, assembly_rule(dm.dim()), vu, true, [&](const QPoint& qp) {
        const double kv = cs.k().eval({.u = qp.u});
        if (kv < lo || kv > hi)
            throw HypothesisViolation(kv < lo ? "k >= k1" : "k <= k2", qp.u, kv,
                                      "k(" + fmt(qp.u) + ") = " + fmt(kv) + " outside [" + fmt(cs.k1()) + ", " +
                                          fmt(cs.k2()) + "] during assembly; witness u = " + fmt(qp.u));
        return kv;
    });
}

SparseMatrix assemble_weighted_stiffness_exact(const DofMap& dm, const Expr& k, const Expr& u_exact, double t) {
    return assemble_weighted(dm, exact_data_rule(dm.dim()), {}, true, [&](const QPoint& qp) {
        const double u = u_exact.eval({.x = qp.x[0], .y = qp.x[1], .t = t});
        return k.eval({.u = u});
    });
}

double nonlocal_integral(const DofMap& dm, const Expr& f, const FeFunction& state) {
    check_state(dm, state);
    const auto vu = dm.vertex_values(state.coeffs);
    double integral = 0.0;
    for_each_qpoint(dm, assembly_rule(dm.dim()), vu, [&](const QPoint& qp) { integral += qp.weight * f.eval({.u = qp.u}); });
    if (!(integral > 0.0))
        throw Error(ErrorCode::NonpositiveIntegral, "int f(u_h) dx = " + fmt(integral) + " is not positive");
    return integral;
}

Vector assemble_load(const DofMap& dm, const Expr& f, const FeFunction& state, double lambda) {
    check_state(dm, state);
    const auto vu = dm.vertex_values(state.coeffs);
    const Mesh& mesh = dm.mesh();
    Vector source(dm.n_dofs(), 0.0);
    double integral = 0.0;
    for_each_qpoint(dm, assembly_rule(dm.dim()), vu, [&](const QPoint& qp) {
        const double fw = qp.weight * f.eval({.u = qp.u});
        integral += fw;
        const auto el = mesh.element(qp.element);
        for (std::size_t a = 0; a < el.size(); ++a) {
            const int d = dm.dof(el[a]);
            if (d >= 0) source[d] += fw * (*qp.bary)[a];
        }
    });
    if (!(integral > 0.0))
        throw Error(ErrorCode::NonpositiveIntegral, "int f(u_h) dx = " + fmt(integral) + " is not positive");
    const double scale = lambda / (integral * integral);
    for (double& s : source) s *= scale;
    return source;
}

Vector assemble_source(const DofMap& dm, const SpatialFunction& g) {
    const Mesh& mesh = dm.mesh();
    Vector out(dm.n_dofs(), 0.0);
    for_each_qpoint(dm, assembly_rule(dm.dim()), {}, [&](const QPoint& qp) {
        const double gw = qp.weight * g(qp.x);
        const auto el = mesh.element(qp.element);
        for (std::size_t a = 0; a < el.size(); ++a) {
            const int d = dm.dof(el[a]);
            if (d >= 0) out[d] += gw * (*qp.bary)[a];
        }
    });
    return out;
}

FeFunction interpolate(const std::shared_ptr<const DofMap>& dm, const Expr& v, double t) {
    FeFunction out = FeFunction::zero(dm);
    const auto verts = dm->dof_vertices();
    for (std::size_t d = 0; d < verts.size(); ++d) {
        const Point& p = dm->mesh().vertex(verts[d]);
        out.coeffs[d] = v.eval({.x = p[0], .y = p[1], .t = t});
    }
    return out;
}

FeFunction elliptic_projection(const std::shared_ptr<const DofMap>& dm, const Expr& k, const Expr& u_exact, double t) {
    const SparseMatrix w = assemble_weighted_stiffness_exact(*dm, k, u_exact, t);
    const ExactSolution ex = ExactSolution::from(u_exact);
    const Mesh& mesh = dm->mesh();
    Vector rhs(dm->n_dofs(), 0.0);
    for_each_qpoint(*dm, exact_data_rule(dm->dim()), {}, [&](const QPoint& qp) {
        const Bindings b{.x = qp.x[0], .y = qp.x[1], .t = t};
        const double kw = qp.weight * k.eval({.u = u_exact.eval(b)});
        const Point grad{ex.ux.eval(b), ex.uy.eval(b)};
        const auto el = mesh.element(qp.element);
        for (std::size_t a = 0; a < el.size(); ++a) {
            const int d = dm->dof(el[a]);
            if (d >= 0) rhs[d] += kw * grad_dot(grad, dm->basis_gradient(qp.element, static_cast<int>(a)));
        }
    });
    FeFunction out{dm, {}};
    out.coeffs = w.n() == 0 ? Vector{} : solve(w, rhs, default_solve_options(w, 1e-13));
    return out;
}

namespace {

Point fe_gradient(const DofMap& dm, std::size_t e, std::span<const double> vertex_u) {
    const auto el = dm.mesh().element(e);
    Point g{0.0, 0.0};
    for (std::size_t a = 0; a < el.size(); ++a) {
        const Point& ga = dm.basis_gradient(e, static_cast<int>(a));
        g[0] += vertex_u[el[a]] * ga[0];
        g[1] += vertex_u[el[a]] * ga[1];
    }
    return g;
}

}  // namespace

double norm_L2(const FeFunction& v) {
    const DofMap& dm = *v.dofmap;
    const auto vu = dm.vertex_values(v.coeffs);
    double s = 0.0;
    for_each_qpoint(dm, norm_rule(dm.dim()), vu, [&](const QPoint& qp) { s += qp.weight * qp.u * qp.u; });
    return std::sqrt(s);
}

double norm_H1_semi(const FeFunction& v) {
    const DofMap& dm = *v.dofmap;
    const auto vu = dm.vertex_values(v.coeffs);
    double s = 0.0;
    for (std::size_t e = 0; e < dm.mesh().n_elements(); ++e) {
        const Point g = fe_gradient(dm, e, vu);
        s += dm.element_measure(e) * grad_dot(g, g);
    }
    return std::sqrt(s);
}

double error_L2(const FeFunction& v, const ExactSolution& u, double t) {
    const DofMap& dm = *v.dofmap;
    const auto vu = dm.vertex_values(v.coeffs);
    double s = 0.0;
    for_each_qpoint(dm, norm_rule(dm.dim()), vu, [&](const QPoint& qp) {
        const double d = qp.u - u.u.eval({.x = qp.x[0], .y = qp.x[1], .t = t});
        s += qp.weight * d * d;
    });
    return std::sqrt(s);
}

double error_H1_semi(const FeFunction& v, const ExactSolution& u, double t) {
    const DofMap& dm = *v.dofmap;
    const auto vu = dm.vertex_values(v.coeffs);
    double s = 0.0;
    Point g{0.0, 0.0};
    std::size_t current = static_cast<std::size_t>(-1);
    for_each_qpoint(dm, norm_rule(dm.dim()), {}, [&](const QPoint& qp) {
        if (qp.element != current) {
            current = qp.element;
            g = fe_gradient(dm, current, vu);
        }
        const Bindings b{.x = qp.x[0], .y = qp.x[1], .t = t};
        const double dx = g[0] - u.ux.eval(b);
        const double dy = dm.dim() == 2 ? g[1] - u.uy.eval(b) : 0.0;
        s += qp.weight * (dx * dx + dy * dy);
    });
    return std::sqrt(s);
}

double max_gradient(const FeFunction& v) {
    const DofMap& dm = *v.dofmap;
    const auto vu = dm.vertex_values(v.coeffs);
    double m = 0.0;
    for (std::size_t e = 0; e < dm.mesh().n_elements(); ++e) {
        const Point g = fe_gradient(dm, e, vu);
        m = std::max(m, std::sqrt(grad_dot(g, g)));
    }
    return m;
}

Vector NonlinearTerms::load(double lambda) const {
    Vector out = source;
    const double scale = lambda / (integral * integral);
    for (double& v : out) v *= scale;
    return out;
}

NonlinearTerms assemble_nonlinear_terms(const DofMap& dm, const CoefficientSet& cs, std::span<const double> coeffs,
                                        bool with_jacobian) {
    const Mesh& mesh = dm.mesh();
    const auto vu = dm.vertex_values(coeffs);
    const QuadratureRule rule = assembly_rule(dm.dim());
    const int npe = mesh.nodes_per_element();
    const std::size_t n = dm.n_dofs();
    const double k_lo = cs.k1() * (1.0 - 1e-9);
    const double k_hi = cs.k2() * (1.0 + 1e-9);

    NonlinearTerms out;
    out.source.assign(n, 0.0);
    if (with_jacobian) out.integral_derivative.assign(n, 0.0);
    SparseBuilder stiff(n), dstiff(n), dsource(n);
    stiff.reserve(mesh.n_elements() * npe * npe);
    if (with_jacobian) {
        dstiff.reserve(mesh.n_elements() * npe * npe);
        dsource.reserve(mesh.n_elements() * npe * npe);
    }

    std::array<double, 9> k_loc{}, dk_loc{}, df_loc{};
    std::array<int, 3> dofs{};
    Point grad_w{};
    std::size_t current = static_cast<std::size_t>(-1);
    auto flush = [&]() {
        for (int a = 0; a < npe; ++a) {
            if (dofs[a] < 0) continue;
            for (int b = 0; b < npe; ++b) {
                if (dofs[b] < 0) continue;
                stiff.add(dofs[a], dofs[b], k_loc[a * 3 + b]);
                if (with_jacobian) {
                    dstiff.add(dofs[a], dofs[b], dk_loc[a * 3 + b]);
                    dsource.add(dofs[a], dofs[b], df_loc[a * 3 + b]);
                }
            }
        }
    };

    for_each_qpoint(dm, rule, vu, [&](const QPoint& qp) {
        const std::size_t e = qp.element;
        if (e != current) {
            if (current != static_cast<std::size_t>(-1)) flush();
            current = e;
            k_loc.fill(0.0);
            dk_loc.fill(0.0);
            df_loc.fill(0.0);
            const auto el = mesh.element(e);
            for (int a = 0; a < npe; ++a) dofs[a] = dm.dof(el[a]);
            if (with_jacobian) grad_w = fe_gradient(dm, e, vu);
        }
        const auto& bary = *qp.bary;
        const double kv = cs.k().eval({.u = qp.u});
        if (kv < k_lo || kv > k_hi)
            throw HypothesisViolation(kv < k_lo ? "k >= k1" : "k <= k2", qp.u, kv,
                                      "k(" + fmt(qp.u) + ") = " + fmt(kv) + " outside [" + fmt(cs.k1()) + ", " +
                                          fmt(cs.k2()) + "] during assembly; witness u = " + fmt(qp.u));
        const double fv = cs.f().eval({.u = qp.u});
        out.integral += qp.weight * fv;
        double dkv = 0.0, dfv = 0.0;
        if (with_jacobian) {
            dkv = cs.k_prime().eval({.u = qp.u});
            dfv = cs.f_prime().eval({.u = qp.u});
        }
        for (int a = 0; a < npe; ++a) {
            const Point& ga = dm.basis_gradient(e, a);
            if (dofs[a] >= 0) {
                out.source[dofs[a]] += qp.weight * fv * bary[a];
                if (with_jacobian) out.integral_derivative[dofs[a]] += qp.weight * dfv * bary[a];
            }
            for (int b = 0; b < npe; ++b) {
                k_loc[a * 3 + b] += qp.weight * kv * grad_dot(ga, dm.basis_gradient(e, b));
                if (with_jacobian) {
                    // row a (test function), column b (perturbed coefficient)
                    dk_loc[a * 3 + b] += qp.weight * dkv * bary[b] * grad_dot(grad_w, ga);
                    df_loc[a * 3 + b] += qp.weight * dfv * bary[a] * bary[b];
                }
            }
        }
    });
    if (current != static_cast<std::size_t>(-1)) flush();

    if (!(out.integral > 0.0))
        throw Error(ErrorCode::NonpositiveIntegral, "int f(u_h) dx = " + fmt(out.integral) + " is not positive");
    out.stiffness = stiff.finalize(true);
    if (with_jacobian) {
        out.stiffness_derivative = dstiff.finalize(false);
        out.source_derivative = dsource.finalize(true);
    }
    return out;
}

}  // namespace thermistor
