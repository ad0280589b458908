#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>

#include "thermistor/coefficients.hpp"
#include "thermistor/config.hpp"
#include "thermistor/driver.hpp"
#include "thermistor/error.hpp"
#include "thermistor/expr.hpp"
#include "thermistor/fespace.hpp"
#include "thermistor/mesh.hpp"
#include "thermistor/schemes.hpp"
#include "thermistor/sparse.hpp"
#include "thermistor/verify.hpp"

namespace py = pybind11;
using namespace thermistor;

namespace {

Var var_from(const std::string& name) {
    if (name == "u") return Var::U;
    if (name == "x") return Var::X;
    if (name == "y") return Var::Y;
    if (name == "t") return Var::T;
    throw Error(ErrorCode::InvalidArgument, "unknown variable '" + name + "'");
}

SchemeKind scheme_from(const std::string& name) {
    if (name == "backward_euler") return SchemeKind::BackwardEuler;
    if (name == "crank_nicolson") return SchemeKind::CrankNicolson;
    if (name == "linearized") return SchemeKind::Linearized;
    throw Error(ErrorCode::InvalidArgument, "unknown scheme '" + name + "'");
}

SchemeConfig scheme_config(const std::string& scheme, double tau, double t_end, const std::string& method,
                           double tolerance, int max_iters) {
    SchemeConfig c;
    c.scheme = scheme_from(scheme);
    c.tau = tau;
    c.t_end = t_end;
    if (method == "newton")
        c.nonlinear.method = NonlinearMethod::Newton;
    else if (method != "fixed_point")
        throw Error(ErrorCode::InvalidArgument, "unknown nonlinear method '" + method + "'");
    c.nonlinear.tolerance = tolerance;
    c.nonlinear.max_iters = max_iters;
    return c;
}

py::array_t<double> dense(const SparseMatrix& m) {
    py::array_t<double> out({m.n(), m.n()});
    const auto d = m.to_dense();
    std::copy(d.begin(), d.end(), out.mutable_data());
    return out;
}

py::list rows(const std::vector<ErrorReport>& reports) {
    const auto eoc = [](const Eoc& e) -> py::object {
        if (e.kind == Eoc::Kind::Value) return py::float_(e.value);
        if (e.kind == Eoc::Kind::Exact) return py::str("exact");
        return py::none();
    };
    py::list out;
    for (const auto& r : reports) {
        py::dict d;
        d["level"] = r.level;
        d["h"] = r.h;
        d["tau"] = r.tau;
        d["L2"] = r.norms.l2;
        d["H1semi"] = r.norms.h1;
        d["theta"] = r.norms.theta;
        d["rho"] = r.norms.rho;
        d["rho_grad"] = r.norms.rho_grad;
        d["eoc_L2"] = eoc(r.eoc_l2);
        d["eoc_H1"] = eoc(r.eoc_h1);
        out.append(d);
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_thermistor, m) {
    m.doc() = "P1 finite elements for the nonlocal parabolic thermistor problem";

    static py::exception<Error> error(m, "ThermistorError", PyExc_RuntimeError);
    static py::exception<HypothesisViolation> violation(m, "HypothesisViolation", error.ptr());
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const HypothesisViolation& e) {
            py::object exc = py::handle(violation.ptr())(e.what());
            exc.attr("code") = std::string(to_string(e.code()));
            exc.attr("bound") = e.bound();
            exc.attr("witness") = e.witness();
            exc.attr("value") = e.value();
            PyErr_SetObject(violation.ptr(), exc.ptr());
        } catch (const Error& e) {
            py::object exc = py::handle(error.ptr())(e.what());
            exc.attr("code") = std::string(to_string(e.code()));
            PyErr_SetObject(error.ptr(), exc.ptr());
        }
    });

    py::class_<Expr>(m, "Expr")
        .def(py::init([](const std::string& s) { return parse_expr(s); }), py::arg("source"))
        .def(py::init<double>(), py::arg("value"))
        .def(
            "__call__",
            [](const Expr& e, double x, double y, double t, double u) { return e.eval({u, x, y, t}); },
            py::arg("x") = 0.0, py::arg("y") = 0.0, py::arg("t") = 0.0, py::arg("u") = 0.0)
        .def("diff", [](const Expr& e, const std::string& v) { return differentiate(e, var_from(v)); }, py::arg("var"))
        .def("depends_on", [](const Expr& e, const std::string& v) { return e.depends_on(var_from(v)); })
        .def("__str__", &Expr::str)
        .def("__repr__", [](const Expr& e) { return "Expr('" + e.str() + "')"; });
    py::implicitly_convertible<std::string, Expr>();
    py::implicitly_convertible<double, Expr>();

    py::class_<Mesh>(m, "Mesh")
        .def_property_readonly("dim", &Mesh::dim)
        .def_property_readonly("h", &Mesh::h)
        .def_property_readonly("n_vertices", &Mesh::n_vertices)
        .def_property_readonly("n_elements", &Mesh::n_elements)
        .def_property_readonly("vertices",
                               [](const Mesh& mesh) {
                                   py::array_t<double> out({mesh.n_vertices(), std::size_t{2}});
                                   auto v = out.mutable_unchecked<2>();
                                   for (std::size_t i = 0; i < mesh.n_vertices(); ++i) {
                                       v(i, 0) = mesh.vertex(i)[0];
                                       v(i, 1) = mesh.vertex(i)[1];
                                   }
                                   return out;
                               })
        .def_property_readonly("elements", [](const Mesh& mesh) {
            const auto k = static_cast<std::size_t>(mesh.nodes_per_element());
            py::array_t<int> out({mesh.n_elements(), k});
            auto v = out.mutable_unchecked<2>();
            for (std::size_t e = 0; e < mesh.n_elements(); ++e)
                for (std::size_t a = 0; a < k; ++a) v(e, a) = mesh.element(e)[a];
            return out;
        });
    m.def("interval_mesh", &make_interval_mesh, py::arg("a"), py::arg("b"), py::arg("n"));
    m.def("rect_mesh", &make_rect_mesh, py::arg("x0"), py::arg("y0"), py::arg("x1"), py::arg("y1"), py::arg("nx"),
          py::arg("ny"));

    py::class_<CoefficientSet>(m, "Coefficients")
        .def_static(
            "make",
            [](const Expr& k, const Expr& f, double lambda, double sigma, double k1, double k2, double u_range,
               int samples) {
                return CoefficientSet::make(k, f, lambda, sigma, k1, k2, {.u_range = u_range, .samples = samples});
            },
            py::arg("k"), py::arg("f"), py::arg("lam"), py::arg("sigma"), py::arg("k1"), py::arg("k2"),
            py::arg("u_range") = 10.0, py::arg("samples") = 10000)
        .def_static("unit", &CoefficientSet::unit, py::arg("lam") = 1.0)
        .def_static("smooth", &CoefficientSet::smooth, py::arg("lam") = 1.0)
        .def_property_readonly("k", &CoefficientSet::k)
        .def_property_readonly("f", &CoefficientSet::f)
        .def_property_readonly("lam", &CoefficientSet::lambda)
        .def_property_readonly("summary", [](const CoefficientSet& cs) { return cs.report().summary(); });

    m.def(
        "mass_matrix", [](const Mesh& mesh) { return dense(assemble_mass(*DofMap::create(mesh))); }, py::arg("mesh"),
        "Dense P1 mass matrix on the interior vertices.");
    m.def(
        "stiffness_matrix",
        [](const Mesh& mesh, const Expr& k, std::optional<std::vector<double>> state) {
            const auto dm = DofMap::create(mesh);
            FeFunction s = FeFunction::zero(dm);
            if (state) {
                if (state->size() != dm->n_dofs())
                    throw Error(ErrorCode::DimensionMismatch, "state needs one value per interior vertex");
                s.coeffs = *state;
            }
            return dense(assemble_stiffness(*dm, k, s));
        },
        py::arg("mesh"), py::arg("k") = Expr(1.0), py::arg("state") = py::none(),
        "Dense stiffness matrix for k(u) evaluated at the interior-vertex state.");

    m.def(
        "solve",
        [](const Mesh& mesh, const CoefficientSet& cs, const Expr& u0, const std::string& scheme, double tau,
           double t_end, const std::string& method, double tolerance, int max_iters,
           std::optional<Expr> u_exact) {
            const auto dm = DofMap::create(mesh);
            const SchemeConfig cfg = scheme_config(scheme, tau, t_end, method, tolerance, max_iters);
            RunResult r;
            std::optional<MmsProblem> mms;
            {
                py::gil_scoped_release release;
                if (u_exact) mms = build_mms(*u_exact, cs, mesh);
                r = mms ? run(mms->u0(), cfg, cs, dm, mms->source()) : run(u0, cfg, cs, dm);
            }
            py::array_t<double> states({r.records.size(), mesh.n_vertices()});
            auto sv = states.mutable_unchecked<2>();
            std::vector<double> times, nonlocal;
            std::vector<int> iters;
            for (std::size_t n = 0; n < r.records.size(); ++n) {
                const auto values = dm->vertex_values(r.records[n].state.coeffs);
                for (std::size_t v = 0; v < values.size(); ++v) sv(n, v) = values[v];
                times.push_back(r.records[n].t);
                nonlocal.push_back(r.records[n].nonlocal_value);
                iters.push_back(r.records[n].nonlinear_iters);
            }
            py::dict out;
            out["t"] = times;
            out["u"] = states;
            out["iterations"] = iters;
            out["nonlocal"] = nonlocal;
            out["warnings"] = r.warnings;
            if (mms) {
                const double t = r.records.back().t;
                out["error_L2"] = error_L2(r.records.back().state, mms->exact(), t);
                out["error_H1semi"] = error_H1_semi(r.records.back().state, mms->exact(), t);
            }
            return out;
        },
        py::arg("mesh"), py::arg("coefficients"), py::arg("u0") = Expr(0.0), py::arg("scheme") = "backward_euler",
        py::arg("tau") = 0.01, py::arg("t_end") = 0.5, py::arg("method") = "fixed_point",
        py::arg("tolerance") = 1e-10, py::arg("max_iters") = 50, py::arg("u_exact") = py::none(),
        "Time loop from the interpolant of u0. With u_exact the manufactured forcing is added and u0 is ignored.");

    m.def(
        "spatial_eoc",
        [](const Mesh& coarsest, const CoefficientSet& cs, std::optional<Expr> u_exact, const std::string& scheme,
           int levels, std::optional<double> tau, double t_end, int threads) {
            const MmsProblem mms = build_mms(u_exact ? *u_exact : default_exact_solution(coarsest.dim()), cs, coarsest);
            const SchemeConfig cfg = scheme_config(scheme, tau.value_or(0.01), t_end, "fixed_point", 1e-10, 50);
            std::vector<ErrorReport> reports;
            {
                py::gil_scoped_release release;
                reports = spatial_eoc_study(mms, cfg, coarsest, levels, tau, threads);
            }
            return rows(reports);
        },
        py::arg("mesh"), py::arg("coefficients"), py::arg("u_exact") = py::none(),
        py::arg("scheme") = "crank_nicolson", py::arg("levels") = 4, py::arg("tau") = py::none(),
        py::arg("t_end") = 0.5, py::arg("threads") = 1);

    m.def(
        "temporal_eoc",
        [](const Mesh& mesh, const CoefficientSet& cs, std::optional<Expr> u_exact, const std::string& scheme,
           int levels, double tau, double t_end, int threads) {
            const MmsProblem mms = build_mms(u_exact ? *u_exact : default_exact_solution(mesh.dim()), cs, mesh);
            const SchemeConfig cfg = scheme_config(scheme, tau, t_end, "fixed_point", 1e-10, 50);
            std::vector<ErrorReport> reports;
            {
                py::gil_scoped_release release;
                reports = temporal_eoc_study(mms, cfg, mesh, levels, threads);
            }
            return rows(reports);
        },
        py::arg("mesh"), py::arg("coefficients"), py::arg("u_exact") = py::none(),
        py::arg("scheme") = "backward_euler", py::arg("levels") = 4, py::arg("tau") = 0.1, py::arg("t_end") = 0.5,
        py::arg("threads") = 1);

    m.def(
        "check_config",
        [](const std::string& text) {
            const ConfigResult r = parse_config(text);
            std::vector<std::pair<int, std::string>> issues;
            for (const auto& e : r.errors) issues.emplace_back(e.line, e.message);
            return issues;
        },
        py::arg("text"), "All configuration errors as (line, message); empty when the text is valid.");

    m.def(
        "run_config",
        [](const std::string& text, std::optional<std::string> output_dir, int threads) {
            const ConfigResult r = parse_config(text);
            if (!r.ok()) throw Error(ErrorCode::ConfigError, r.error_text());
            py::gil_scoped_release release;
            return execute(*r.config, {.output_dir = output_dir, .threads = threads});
        },
        py::arg("text"), py::arg("output_dir") = py::none(), py::arg("threads") = 1,
        "Runs a configuration like the command-line solver and returns its exit status.");
}
