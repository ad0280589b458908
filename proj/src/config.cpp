#include "thermistor/config.hpp"

#include <charconv>
#include <functional>
#include <map>
#include <sstream>

#include "thermistor/error.hpp"
#include "thermistor/expr.hpp"

namespace thermistor {

std::string_view to_string(RunMode m) {
    switch (m) {
    case RunMode::Solve: return "solve";
    case RunMode::SpatialEoc: return "spatial_eoc";
    case RunMode::TemporalEoc: return "temporal_eoc";
    }
    return "?";
}

Mesh RunConfig::make_mesh() const {
    if (dim == 1) return make_interval_mesh(bounds.x0, bounds.x1, nx);
    return make_rect_mesh(bounds.x0, bounds.y0, bounds.x1, bounds.y1, nx, ny);
}

std::string ConfigResult::error_text() const {
    std::ostringstream os;
    for (const auto& e : errors) {
        if (e.line > 0) os << "line " << e.line << ": ";
        os << e.message << '\n';
    }
    return os.str();
}

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

struct Entry {
    int line;
    std::string value;
};

class Reader {
public:
    Reader(std::map<std::string, Entry>& entries, std::vector<ConfigIssue>& errors) : entries_(entries), errors_(errors) {}

    bool has(const std::string& key) const { return entries_.count(key) > 0; }
    int line(const std::string& key) const { return has(key) ? entries_.at(key).line : 0; }

    void error(const std::string& key, const std::string& message) { errors_.push_back({line(key), key + ": " + message}); }

    template <class T>
    void number(const std::string& key, T& out) {
        if (!has(key)) return;
        consumed_.push_back(key);
        const std::string& v = entries_.at(key).value;
        T parsed{};
        const auto res = std::from_chars(v.data(), v.data() + v.size(), parsed);
        if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
            error(key, "'" + v + "' is not a valid number");
            return;
        }
        out = parsed;
    }

    void text(const std::string& key, std::string& out) {
        if (!has(key)) return;
        consumed_.push_back(key);
        out = entries_.at(key).value;
    }

    void flag(const std::string& key, bool& out) {
        if (!has(key)) return;
        consumed_.push_back(key);
        const std::string& v = entries_.at(key).value;
        if (v == "true" || v == "1" || v == "yes")
            out = true;
        else if (v == "false" || v == "0" || v == "no")
            out = false;
        else
            error(key, "expected true or false, got '" + v + "'");
    }

    std::vector<double> list(const std::string& key) {
        std::vector<double> out;
        if (!has(key)) return out;
        consumed_.push_back(key);
        std::string_view rest = entries_.at(key).value;
        while (!rest.empty()) {
            const auto comma = rest.find(',');
            const std::string_view item = trim(rest.substr(0, comma));
            double v = 0.0;
            const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
            if (item.empty() || res.ec != std::errc() || res.ptr != item.data() + item.size()) {
                error(key, "'" + std::string(item) + "' is not a valid number");
                return {};
            }
            out.push_back(v);
            if (comma == std::string_view::npos) break;
            rest = rest.substr(comma + 1);
        }
        return out;
    }

    void unknown_keys() {
        for (const auto& [key, entry] : entries_) {
            bool used = false;
            for (const auto& c : consumed_) used = used || c == key;
            if (!used) errors_.push_back({entry.line, "unknown key '" + key + "'"});
        }
    }

private:
    std::map<std::string, Entry>& entries_;
    std::vector<ConfigIssue>& errors_;
    std::vector<std::string> consumed_;
};

}  // namespace

ConfigResult parse_config(std::string_view text) {
    ConfigResult result;
    auto& errors = result.errors;
    std::map<std::string, Entry> entries;

    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto eol = text.find('\n', pos);
        std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            errors.push_back({line_no, "expected 'key = value'"});
            continue;
        }
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        if (key.empty()) {
            errors.push_back({line_no, "missing key before '='"});
            continue;
        }
        if (value.empty()) {
            errors.push_back({line_no, key + ": missing value"});
            continue;
        }
        if (auto it = entries.find(key); it != entries.end()) {
            errors.push_back({line_no, "duplicate key '" + key + "' (first set on line " + std::to_string(it->second.line) + ")"});
            continue;
        }
        entries.emplace(key, Entry{line_no, value});
    }

    RunConfig cfg;
    Reader r(entries, errors);

    std::string mode = "solve";
    r.text("mode", mode);
    if (mode == "solve")
        cfg.mode = RunMode::Solve;
    else if (mode == "spatial_eoc")
        cfg.mode = RunMode::SpatialEoc;
    else if (mode == "temporal_eoc")
        cfg.mode = RunMode::TemporalEoc;
    else
        r.error("mode", "expected solve, spatial_eoc or temporal_eoc, got '" + mode + "'");

    r.number("mesh.dim", cfg.dim);
    if (cfg.dim != 1 && cfg.dim != 2) {
        r.error("mesh.dim", "must be 1 or 2");
        cfg.dim = 1;
    }
    cfg.bounds = cfg.dim == 1 ? Box{-1.0, 0.0, 1.0, 0.0} : Box{0.0, 0.0, 1.0, 1.0};
    if (r.has("mesh.bounds")) {
        const auto b = r.list("mesh.bounds");
        if (cfg.dim == 1 && b.size() == 2)
            cfg.bounds = {b[0], 0.0, b[1], 0.0};
        else if (cfg.dim == 2 && b.size() == 4)
            cfg.bounds = {b[0], b[1], b[2], b[3]};
        else if (!b.empty())
            r.error("mesh.bounds", cfg.dim == 1 ? "expected 'a, b'" : "expected 'x0, y0, x1, y1'");
    }
    r.number("mesh.n", cfg.nx);
    cfg.ny = cfg.nx;
    r.number("mesh.ny", cfg.ny);
    if (cfg.nx < 2) r.error("mesh.n", "must be at least 2");
    if (cfg.dim == 2 && cfg.ny < 2) r.error("mesh.ny", "must be at least 2");
    if (cfg.bounds.x0 >= cfg.bounds.x1 || (cfg.dim == 2 && cfg.bounds.y0 >= cfg.bounds.y1))
        r.error("mesh.bounds", "lower bounds must be below upper bounds");

    std::string scheme = "backward_euler";
    r.text("scheme.type", scheme);
    if (scheme == "backward_euler")
        cfg.scheme.scheme = SchemeKind::BackwardEuler;
    else if (scheme == "crank_nicolson")
        cfg.scheme.scheme = SchemeKind::CrankNicolson;
    else if (scheme == "linearized")
        cfg.scheme.scheme = SchemeKind::Linearized;
    else
        r.error("scheme.type", "expected backward_euler, crank_nicolson or linearized, got '" + scheme + "'");
    r.number("scheme.tau", cfg.scheme.tau);
    r.number("scheme.t_end", cfg.scheme.t_end);
    std::string method = "fixed_point";
    r.text("scheme.nonlinear_method", method);
    if (method == "fixed_point")
        cfg.scheme.nonlinear.method = NonlinearMethod::FixedPoint;
    else if (method == "newton")
        cfg.scheme.nonlinear.method = NonlinearMethod::Newton;
    else
        r.error("scheme.nonlinear_method", "expected fixed_point or newton, got '" + method + "'");
    r.number("scheme.tolerance", cfg.scheme.nonlinear.tolerance);
    r.number("scheme.max_iters", cfg.scheme.nonlinear.max_iters);
    r.number("scheme.damping", cfg.scheme.nonlinear.damping);
    if (!(cfg.scheme.tau > 0.0)) r.error("scheme.tau", "must be positive");
    if (!(cfg.scheme.t_end > 0.0)) r.error("scheme.t_end", "must be positive");
    if (cfg.scheme.tau > cfg.scheme.t_end) r.error("scheme.tau", "must not exceed scheme.t_end");
    if (!(cfg.scheme.nonlinear.tolerance > 0.0)) r.error("scheme.tolerance", "must be positive");
    if (cfg.scheme.nonlinear.max_iters < 1) r.error("scheme.max_iters", "must be at least 1");
    if (!(cfg.scheme.nonlinear.damping > 0.0 && cfg.scheme.nonlinear.damping <= 1.0))
        r.error("scheme.damping", "must lie in (0, 1]");

    std::string preset = "smooth";
    r.text("coefficients.preset", preset);
    if (preset == "unit") {
        cfg.k = "1";
        cfg.f = "1";
        cfg.sigma = cfg.k1 = cfg.k2 = 1.0;
    } else if (preset != "smooth") {
        r.error("coefficients.preset", "expected unit or smooth, got '" + preset + "'");
    }
    r.text("coefficients.k", cfg.k);
    r.text("coefficients.f", cfg.f);
    r.number("coefficients.lambda", cfg.lambda);
    r.number("coefficients.sigma", cfg.sigma);
    r.number("coefficients.k1", cfg.k1);
    r.number("coefficients.k2", cfg.k2);
    r.number("coefficients.u_range", cfg.u_range);
    r.number("coefficients.samples", cfg.samples);
    if (!(cfg.lambda > 0.0)) r.error("coefficients.lambda", "lambda is a positive parameter");
    if (!(cfg.sigma > 0.0)) r.error("coefficients.sigma", "must be positive");
    if (!(cfg.k1 > 0.0)) r.error("coefficients.k1", "must be positive");
    if (cfg.k2 < cfg.k1) r.error("coefficients.k2", "must not be below coefficients.k1");
    if (!(cfg.u_range > 0.0)) r.error("coefficients.u_range", "must be positive");
    if (cfg.samples < 100) r.error("coefficients.samples", "must be at least 100");

    auto check_expr = [&](const std::string& key, const std::string& src, bool u_only) -> std::optional<Expr> {
        try {
            Expr e = parse_expr(src);
            if (u_only && (e.depends_on(Var::X) || e.depends_on(Var::Y) || e.depends_on(Var::T)))
                r.error(key, "may depend on u only");
            if (!u_only && e.depends_on(Var::U)) r.error(key, "may not depend on u");
            return e;
        } catch (const Error& err) {
            r.error(key, err.what());
            return std::nullopt;
        }
    };
    const auto k_expr = check_expr("coefficients.k", cfg.k, true);
    check_expr("coefficients.f", cfg.f, true);

    if (r.has("mms.u_exact")) {
        std::string s;
        r.text("mms.u_exact", s);
        if (check_expr("mms.u_exact", s, false)) cfg.u_exact = s;
    }
    r.text("initial.u0", cfg.u0);
    if (r.has("initial.u0")) check_expr("initial.u0", cfg.u0, false);

    r.number("study.levels", cfg.levels);
    if (r.has("study.tau")) {
        double tau = 0.0;
        r.number("study.tau", tau);
        if (!(tau > 0.0))
            r.error("study.tau", "must be positive");
        else
            cfg.study_tau = tau;
    }
    if (cfg.mode != RunMode::Solve && cfg.levels < 3) r.error("study.levels", "an EOC study needs at least 3 levels");

    r.text("output.dir", cfg.output_dir);
    r.number("output.snapshot_every", cfg.snapshot_every);
    if (cfg.snapshot_every < 0) r.error("output.snapshot_every", "must be non-negative (0 disables snapshots)");
    cfg.write_csv = cfg.dim == 1;
    cfg.write_vtk = cfg.dim == 2;
    if (r.has("output.formats")) {
        std::string formats;
        r.text("output.formats", formats);
        cfg.write_csv = cfg.write_vtk = false;
        std::string_view rest = formats;
        while (!rest.empty()) {
            const auto comma = rest.find(',');
            const std::string_view item = trim(rest.substr(0, comma));
            if (item == "csv" && cfg.dim == 2)
                r.error("output.formats", "csv snapshots are 1D only; use vtk");
            else if (item == "csv")
                cfg.write_csv = true;
            else if (item == "vtk")
                cfg.write_vtk = true;
            else if (item != "none")
                r.error("output.formats", "unknown format '" + std::string(item) + "'");
            if (comma == std::string_view::npos) break;
            rest = rest.substr(comma + 1);
        }
    }

    // cross-field checks
    if (cfg.scheme.scheme == SchemeKind::Linearized) {
        if (cfg.dim != 1) r.error("scheme.type", "linearized scheme requires mesh.dim = 1");
        if (k_expr && !k_expr->is_constant(1.0)) r.error("scheme.type", "linearized scheme requires coefficients.k = 1");
    }
    if (cfg.mode != RunMode::Solve && r.has("initial.u0"))
        r.error("initial.u0", "EOC modes start from the exact solution; remove initial.u0");

    r.unknown_keys();
    std::stable_sort(errors.begin(), errors.end(), [](const ConfigIssue& a, const ConfigIssue& b) { return a.line < b.line; });
    if (errors.empty()) result.config = std::move(cfg);
    return result;
}

}  // namespace thermistor
