#include "thermistor/driver.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include "thermistor/coefficients.hpp"
#include "thermistor/expr.hpp"
#include "thermistor/fespace.hpp"
#include "thermistor/output.hpp"
#include "thermistor/schemes.hpp"
#include "thermistor/verify.hpp"

namespace thermistor {

namespace fs = std::filesystem;

int exit_status(ErrorCode code) {
    switch (code) {
    case ErrorCode::HypothesisViolation: return kExitHypothesisViolation;
    case ErrorCode::InvalidRange:
    case ErrorCode::TooCoarse:
    case ErrorCode::InvalidArgument:
    case ErrorCode::SyntaxError:
    case ErrorCode::UnknownIdentifier:
    case ErrorCode::ArityError:
    case ErrorCode::UnsupportedCoefficient:
    case ErrorCode::UnsupportedDimension:
    case ErrorCode::NonIntegerStepCount:
    case ErrorCode::BoundaryViolation:
    case ErrorCode::ConfigError: return kExitConfigError;
    default: return kExitSolverError;
    }
}

namespace {

class Session {
public:
    Session(fs::path dir, const ExecuteOptions& opts) : dir_(std::move(dir)), opts_(opts) {
        fs::create_directories(dir_);
        log_.open(dir_ / "run.log", std::ios::trunc);
        if (!log_) throw Error(ErrorCode::IoError, "cannot open " + (dir_ / "run.log").string());
        artifacts_.push_back("run.log");
    }

    ~Session() { write_manifest(); }

    void info(const std::string& line) {
        log_ << line << '\n';
        log_.flush();
        if (opts_.echo) std::clog << line << '\n';
    }

    void debug(const std::string& line) {
        if (opts_.log_level == LogLevel::Debug) info(line);
    }

    bool debug_enabled() const { return opts_.log_level == LogLevel::Debug; }

    template <class Writer>
    void emit(const std::string& name, Writer&& write) {
        std::ofstream os(dir_ / name, std::ios::trunc);
        if (!os) throw Error(ErrorCode::IoError, "cannot open " + (dir_ / name).string());
        write(os);
        os.close();
        if (!os) throw Error(ErrorCode::IoError, "failed writing " + (dir_ / name).string());
        artifacts_.push_back(name);
    }

private:
    void write_manifest() {
        log_.close();
        std::ofstream os(dir_ / "MANIFEST", std::ios::trunc);
        for (const auto& a : artifacts_) os << a << '\n';
    }

    fs::path dir_;
    const ExecuteOptions& opts_;
    std::ofstream log_;
    std::vector<std::string> artifacts_;
};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

void log_config(Session& s, const RunConfig& cfg, int threads) {
    s.info("mode: " + std::string(to_string(cfg.mode)));
    std::ostringstream mesh;
    mesh << "mesh: dim=" << cfg.dim << " n=" << cfg.nx;
    if (cfg.dim == 2) mesh << " ny=" << cfg.ny;
    s.info(mesh.str());
    s.info("scheme: " + std::string(to_string(cfg.scheme.scheme)) + " tau=" + fmt(cfg.scheme.tau) +
           " t_end=" + fmt(cfg.scheme.t_end) + " nonlinear=" + std::string(to_string(cfg.scheme.nonlinear.method)) +
           " tol=" + fmt(cfg.scheme.nonlinear.tolerance));
    s.info("coefficients: k = " + cfg.k + ", f = " + cfg.f + ", lambda=" + fmt(cfg.lambda) + " sigma=" +
           fmt(cfg.sigma) + " k1=" + fmt(cfg.k1) + " k2=" + fmt(cfg.k2));
    if (cfg.u_exact) s.info("mms: u_exact = " + *cfg.u_exact);
    s.info("threads: " + std::to_string(threads));
}

void dump_operators(Session& s, const Mesh& mesh, const CoefficientSet& cs, const FeFunction& state) {
    s.emit("mesh.txt", [&](std::ostream& os) { write_mesh_text(os, mesh); });
    const DofMap& dm = *state.dofmap;
    s.emit("mass.txt", [&](std::ostream& os) { write_coordinate(os, assemble_mass(dm)); });
    s.emit("stiffness.txt", [&](std::ostream& os) { write_coordinate(os, assemble_stiffness(dm, cs, state)); });
}

void write_errors(Session& s, const std::vector<ErrorReport>& rows) {
    s.emit("errors.csv", [&](std::ostream& os) { write_errors_csv(os, rows); });
    for (const auto& r : rows) {
        std::ostringstream os;
        os << "level " << r.level << ": h=" << fmt(r.h) << " tau=" << fmt(r.tau) << " L2=" << fmt(r.norms.l2)
           << " H1=" << fmt(r.norms.h1);
        if (r.eoc_l2.kind == Eoc::Kind::Value) os << " eoc_L2=" << fmt(r.eoc_l2.value);
        if (r.eoc_h1.kind == Eoc::Kind::Value) os << " eoc_H1=" << fmt(r.eoc_h1.value);
        s.info(os.str());
    }
}

void run_solve(Session& s, const RunConfig& cfg, const CoefficientSet& cs, const Mesh& mesh) {
    auto dm = DofMap::create(mesh);
    std::optional<MmsProblem> mms;
    Expr u0 = parse_expr(cfg.u0);
    SourceTerm forcing;
    if (cfg.u_exact) {
        mms = build_mms(parse_expr(*cfg.u_exact), cs, mesh);
        u0 = mms->u0();
        forcing = mms->source();
    }
    if (s.debug_enabled()) dump_operators(s, mesh, cs, interpolate(dm, u0, 0.0));

    const int steps = step_count(cfg.scheme);
    const auto snapshot = [&](const TimeStepRecord& rec) {
        s.debug("step " + std::to_string(rec.n) + ": t=" + fmt(rec.t) + " iters=" + std::to_string(rec.nonlinear_iters) +
                " I=" + fmt(rec.nonlocal_value));
        if (cfg.snapshot_every == 0) return;
        if (rec.n % cfg.snapshot_every != 0 && rec.n != steps) return;
        const std::string stem = "u_" + std::to_string(rec.n);
        if (cfg.write_csv) s.emit(stem + ".csv", [&](std::ostream& os) { write_snapshot_csv(os, rec.state); });
        if (cfg.write_vtk)
            s.emit(stem + ".vtk", [&](std::ostream& os) { write_snapshot_vtk(os, rec.state, "u at t = " + fmt(rec.t)); });
    };
    const RunResult result = run(u0, cfg.scheme, cs, dm, forcing, snapshot);
    for (const auto& w : result.warnings) s.info("warning: " + w);

    int total_iters = 0;
    for (const auto& r : result.records) total_iters += r.nonlinear_iters;
    s.info("steps: " + std::to_string(steps) + ", nonlinear iterations: " + std::to_string(total_iters));

    if (mms) {
        const auto& last = result.records.back();
        ErrorReport row;
        row.h = mesh.h();
        row.tau = cfg.scheme.t_end / steps;
        row.norms = error_split(last.state, *mms, last.t);
        write_errors(s, {row});
    }
}

void run_study(Session& s, const RunConfig& cfg, const CoefficientSet& cs, const Mesh& mesh, int threads) {
    const Expr u_exact = cfg.u_exact ? parse_expr(*cfg.u_exact) : default_exact_solution(cfg.dim);
    const MmsProblem mms = build_mms(u_exact, cs, mesh);
    if (s.debug_enabled()) dump_operators(s, mesh, cs, interpolate(DofMap::create(mesh), mms.u0(), 0.0));

    std::vector<ErrorReport> rows;
    if (cfg.mode == RunMode::SpatialEoc) {
        rows = spatial_eoc_study(mms, cfg.scheme, mesh, cfg.levels, cfg.study_tau, threads);
    } else {
        rows = temporal_eoc_study(mms, cfg.scheme, mesh, cfg.levels, threads);
    }
    for (const auto& r : rows)
        if (r.tau / r.h > 1.0)
            s.info("warning: level " + std::to_string(r.level) + " has tau/h = " + fmt(r.tau / r.h) + " > 1");
    write_errors(s, rows);
}

}  // namespace

int execute(const RunConfig& cfg, const ExecuteOptions& opts) {
    const fs::path dir = opts.output_dir ? fs::path(*opts.output_dir) : fs::path(cfg.output_dir);
    const int threads = std::max(1, opts.threads);

    std::optional<Session> session;
    try {
        session.emplace(dir, opts);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitSolverError;
    }
    Session& s = *session;
    const auto start = std::chrono::steady_clock::now();
    log_config(s, cfg, threads);

    try {
        ValidationOptions vopts;
        vopts.u_range = cfg.u_range;
        vopts.samples = cfg.samples;
        const CoefficientSet cs =
            CoefficientSet::make(parse_expr(cfg.k), parse_expr(cfg.f), cfg.lambda, cfg.sigma, cfg.k1, cfg.k2, vopts);
        s.info("hypothesis validation: passed");
        s.info(cs.report().summary());

        const Mesh mesh = cfg.make_mesh();
        if (cfg.mode == RunMode::Solve)
            run_solve(s, cfg, cs, mesh);
        else
            run_study(s, cfg, cs, mesh, threads);
    } catch (const HypothesisViolation& e) {
        s.info("hypothesis validation: FAILED");
        s.info("violated bound: " + e.bound());
        s.info("witness u = " + fmt(e.witness()) + ", value = " + fmt(e.value()));
        s.info(std::string("error: ") + e.what());
        return kExitHypothesisViolation;
    } catch (const Error& e) {
        s.info(std::string("error: ") + e.what());
        return exit_status(e.code());
    } catch (const std::exception& e) {
        s.info(std::string("error: ") + e.what());
        return kExitSolverError;
    }

    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    s.info("done in " + fmt(elapsed) + " s");
    return kExitSuccess;
}

}  // namespace thermistor
