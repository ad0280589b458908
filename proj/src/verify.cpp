#include "thermistor/verify.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "thermistor/error.hpp"

namespace thermistor {

namespace {

constexpr int kPanels1d = 256;
constexpr int kCells2d = 64;
constexpr int kGaussPoints = 5;

/// Runs fn(i) for i in [0, count) on up to `threads` workers. The first
/// exception (by index) is rethrown after all workers finish.
template <class Fn>
void parallel_for(int count, int threads, Fn&& fn) {
    threads = std::max(1, std::min(threads, count));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
    if (threads == 1) {
        for (int i = 0; i < count; ++i) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int w = 0; w < threads; ++w)
            pool.emplace_back([&] {
                for (int j = next++; j < count; j = next++) {
                    const int i = count - 1 - j;
                    try {
                        fn(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace

double MmsProblem::nonlocal_integral(double t) const {
    {
        std::lock_guard lock(cache_->mutex);
        if (auto it = cache_->values.find(t); it != cache_->values.end()) return it->second;
    }
    const auto [nodes, weights] = gauss_legendre(kGaussPoints);
    double total = 0.0;
    if (dim_ == 1) {
        const double len = (box_.x1 - box_.x0) / kPanels1d;
        for (int p = 0; p < kPanels1d; ++p) {
            const double a = box_.x0 + p * len;
            double s = 0.0;
            for (int q = 0; q < kGaussPoints; ++q) s += weights[q] * f_of_exact_.eval({.x = a + nodes[q] * len, .t = t});
            total += s * len;
        }
    } else {
        const double hx = (box_.x1 - box_.x0) / kCells2d;
        const double hy = (box_.y1 - box_.y0) / kCells2d;
        for (int j = 0; j < kCells2d; ++j)
            for (int i = 0; i < kCells2d; ++i) {
                const double ax = box_.x0 + i * hx;
                const double ay = box_.y0 + j * hy;
                double s = 0.0;
                for (int qy = 0; qy < kGaussPoints; ++qy)
                    for (int qx = 0; qx < kGaussPoints; ++qx)
                        s += weights[qx] * weights[qy] *
                             f_of_exact_.eval({.x = ax + nodes[qx] * hx, .y = ay + nodes[qy] * hy, .t = t});
                total += s * hx * hy;
            }
    }
    if (!(total > 0.0)) throw Error(ErrorCode::NonpositiveIntegral, "int f(u_exact) dx is not positive");
    std::lock_guard lock(cache_->mutex);
    cache_->values.emplace(t, total);
    return total;
}

double MmsProblem::forcing(const Point& p, double t) const {
    const double i = nonlocal_integral(t);
    const Bindings b{.x = p[0], .y = p[1], .t = t};
    return local_forcing_.eval(b) - cs_.lambda() * f_of_exact_.eval(b) / (i * i);
}

SourceTerm MmsProblem::source() const {
    // the returned closures keep a copy so the problem may go out of scope
    return [self = *this](double t) -> SpatialFunction {
        const double i = self.nonlocal_integral(t);
        const double scale = self.cs_.lambda() / (i * i);
        return [self, t, scale](const Point& p) {
            const Bindings b{.x = p[0], .y = p[1], .t = t};
            return self.local_forcing_.eval(b) - scale * self.f_of_exact_.eval(b);
        };
    };
}

double MmsProblem::residual_check(int samples, double t_max) const {
    const Expr& u = exact_.u;
    const Expr ut = differentiate(u, Var::T);
    const Expr uxx = differentiate(exact_.ux, Var::X);
    const Expr uyy = differentiate(exact_.uy, Var::Y);

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ux(box_.x0, box_.x1), uy(box_.y0, box_.y1), ut_dist(0.0, t_max);
    double worst = 0.0;
    for (int s = 0; s < samples; ++s) {
        const Bindings b{.x = ux(rng), .y = dim_ == 2 ? uy(rng) : 0.0, .t = ut_dist(rng)};
        const double uv = u.eval(b);
        const double gx = exact_.ux.eval(b), gy = exact_.uy.eval(b);
        const double lap = uxx.eval(b) + uyy.eval(b);
        const double kv = cs_.k().eval({.u = uv});
        const double dkv = cs_.k_prime().eval({.u = uv});
        const double i = nonlocal_integral(b.t);
        const double lhs = ut.eval(b) - kv * lap - dkv * (gx * gx + gy * gy);
        const double rhs = cs_.lambda() * cs_.f().eval({.u = uv}) / (i * i) + forcing({b.x, b.y}, b.t);
        worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
    }
    return worst;
}

MmsProblem build_mms(const Expr& u_exact, const CoefficientSet& cs, const Mesh& domain) {
    MmsProblem p;
    p.dim_ = domain.dim();
    p.box_ = domain.box();
    if (p.dim_ == 1 && u_exact.depends_on(Var::Y))
        throw Error(ErrorCode::InvalidArgument, "1D exact solution must not depend on y");
    if (u_exact.depends_on(Var::U)) throw Error(ErrorCode::InvalidArgument, "exact solution may not depend on u");

    // boundary sampling
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const Box& bx = p.box_;
    for (int s = 0; s < 100; ++s) {
        Bindings b{.t = unit(rng)};
        if (p.dim_ == 1) {
            b.x = s % 2 ? bx.x1 : bx.x0;
        } else {
            const double r = unit(rng);
            switch (s % 4) {
            case 0: b.x = bx.x0 + r * (bx.x1 - bx.x0), b.y = bx.y0; break;
            case 1: b.x = bx.x0 + r * (bx.x1 - bx.x0), b.y = bx.y1; break;
            case 2: b.x = bx.x0, b.y = bx.y0 + r * (bx.y1 - bx.y0); break;
            default: b.x = bx.x1, b.y = bx.y0 + r * (bx.y1 - bx.y0); break;
            }
        }
        const double v = u_exact.eval(b);
        if (std::abs(v) > 1e-12) {
            std::ostringstream os;
            os << "exact solution is " << v << " at boundary point (" << b.x << ", " << b.y << "), t = " << b.t;
            throw Error(ErrorCode::BoundaryViolation, os.str());
        }
    }

    p.exact_ = ExactSolution::from(u_exact);
    p.u0_ = substitute(u_exact, Var::T, Expr(0.0));
    p.cs_ = cs;
    const Expr k_of_u = substitute(cs.k(), Var::U, u_exact);
    Expr div = differentiate(k_of_u * p.exact_.ux, Var::X);
    if (p.dim_ == 2) div = div + differentiate(k_of_u * p.exact_.uy, Var::Y);
    p.local_forcing_ = differentiate(u_exact, Var::T) - div;
    p.f_of_exact_ = substitute(cs.f(), Var::U, u_exact);

    const double residual = p.residual_check();
    if (residual > 1e-8) {
        std::ostringstream os;
        os << "manufactured forcing residual " << residual << " exceeds 1e-8";
        throw Error(ErrorCode::ResidualCheckFailed, os.str());
    }
    return p;
}

Expr default_exact_solution(int dim) {
    return parse_expr(dim == 1 ? "exp(-t)*sin(pi*(x + 1)/2)" : "exp(-t)*sin(pi*x)*sin(pi*y)");
}

std::vector<Eoc> compute_eoc(std::span<const double> errors) {
    std::vector<Eoc> out(errors.size());
    for (std::size_t i = 1; i < errors.size(); ++i) {
        if (errors[i - 1] < 1e-10 && errors[i] < 1e-10)
            out[i].kind = Eoc::Kind::Exact;
        else if (errors[i] > 0.0 && errors[i - 1] > 0.0)
            out[i] = {Eoc::Kind::Value, std::log2(errors[i - 1] / errors[i])};
    }
    return out;
}

SplitNorms error_split(const FeFunction& uh, const MmsProblem& mms, double t) {
    const FeFunction proj = elliptic_projection(uh.dofmap, mms.coefficients().k(), mms.exact().u, t);
    SplitNorms s;
    s.l2 = error_L2(uh, mms.exact(), t);
    s.h1 = error_H1_semi(uh, mms.exact(), t);
    s.theta = norm_L2(uh - proj);
    s.rho = error_L2(proj, mms.exact(), t);
    s.rho_grad = error_H1_semi(proj, mms.exact(), t);
    s.projection_grad_max = max_gradient(proj);
    return s;
}

namespace {

void fill_eoc(std::vector<ErrorReport>& rows) {
    std::vector<double> l2, h1;
    for (const auto& r : rows) {
        l2.push_back(r.norms.l2);
        h1.push_back(r.norms.h1);
    }
    const auto e2 = compute_eoc(l2);
    const auto e1 = compute_eoc(h1);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i].eoc_l2 = e2[i];
        rows[i].eoc_h1 = e1[i];
    }
}

ErrorReport run_level(const MmsProblem& mms, const SchemeConfig& cfg, const Mesh& mesh, int level) {
    const auto dm = DofMap::create(mesh);
    const RunResult res = run(mms.u0(), cfg, mms.coefficients(), dm, mms.source());
    const TimeStepRecord& last = res.records.back();
    ErrorReport r;
    r.level = level;
    r.h = mesh.h();
    r.tau = cfg.t_end / step_count(cfg);
    r.norms = error_split(last.state, mms, last.t);
    return r;
}

}  // namespace

std::vector<ErrorReport> spatial_eoc_study(const MmsProblem& mms, const SchemeConfig& cfg, const Mesh& coarsest,
                                           int levels, std::optional<double> tau, int threads) {
    if (levels < 3) throw Error(ErrorCode::InvalidArgument, "an EOC study needs at least 3 levels");
    std::vector<Mesh> meshes{coarsest};
    for (int l = 1; l < levels; ++l) meshes.push_back(refine(meshes.back()));

    SchemeConfig level_cfg = cfg;
    if (tau) {
        level_cfg.tau = *tau;
    } else {
        const double hf = meshes.back().h();
        const double steps = std::ceil(cfg.t_end / (hf * hf) - 1e-9);
        level_cfg.tau = cfg.t_end / steps;
    }

    std::vector<ErrorReport> rows(static_cast<std::size_t>(levels));
    parallel_for(levels, threads, [&](int l) { rows[l] = run_level(mms, level_cfg, meshes[l], l); });
    fill_eoc(rows);
    return rows;
}

std::vector<ErrorReport> temporal_eoc_study(const MmsProblem& mms, const SchemeConfig& cfg, const Mesh& mesh,
                                            int levels, int threads) {
    if (levels < 3) throw Error(ErrorCode::InvalidArgument, "an EOC study needs at least 3 levels");
    std::vector<ErrorReport> rows(static_cast<std::size_t>(levels));
    parallel_for(levels, threads, [&](int l) {
        SchemeConfig c = cfg;
        c.tau = cfg.tau / std::ldexp(1.0, l);
        rows[l] = run_level(mms, c, mesh, l);
    });
    fill_eoc(rows);
    return rows;
}

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string eoc_text(const Eoc& e) {
    switch (e.kind) {
    case Eoc::Kind::None: return "";
    case Eoc::Kind::Exact: return "exact";
    case Eoc::Kind::Value: return num(e.value);
    }
    return "";
}

}  // namespace

void write_errors_csv(std::ostream& os, std::span<const ErrorReport> rows) {
    os << "level,h,tau,L2,H1semi,theta,rho,rho_grad,eoc_L2,eoc_H1\n";
    for (const auto& r : rows) {
        os << r.level << ',' << num(r.h) << ',' << num(r.tau) << ',' << num(r.norms.l2) << ',' << num(r.norms.h1) << ','
           << num(r.norms.theta) << ',' << num(r.norms.rho) << ',' << num(r.norms.rho_grad) << ','
           << eoc_text(r.eoc_l2) << ',' << eoc_text(r.eoc_h1) << '\n';
    }
}

}  // namespace thermistor
