#include "thermistor/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "thermistor/error.hpp"

namespace thermistor {

namespace {

double distance(const Point& a, const Point& b) {
    return std::hypot(a[0] - b[0], a[1] - b[1]);
}

double angle_at(const Point& p, const Point& q, const Point& r) {
    const double ux = q[0] - p[0], uy = q[1] - p[1];
    const double vx = r[0] - p[0], vy = r[1] - p[1];
    return std::atan2(std::abs(ux * vy - uy * vx), ux * vx + uy * vy);
}

}  // namespace

std::vector<int> Mesh::boundary_vertices() const {
    std::vector<int> out;
    for (std::size_t v = 0; v < boundary_.size(); ++v)
        if (boundary_[v]) out.push_back(static_cast<int>(v));
    return out;
}

double Mesh::element_diameter(std::size_t e) const {
    const auto el = element(e);
    double d = 0.0;
    for (std::size_t a = 0; a < el.size(); ++a)
        for (std::size_t b = a + 1; b < el.size(); ++b)
            d = std::max(d, distance(vertices_[el[a]], vertices_[el[b]]));
    return d;
}

double Mesh::element_measure(std::size_t e) const {
    const auto el = element(e);
    const Point& p0 = vertices_[el[0]];
    const Point& p1 = vertices_[el[1]];
    if (dim_ == 1) return p1[0] - p0[0];
    const Point& p2 = vertices_[el[2]];
    return 0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]));
}

double Mesh::min_angle() const {
    if (dim_ == 1) return std::numbers::pi;
    double best = std::numbers::pi;
    for (std::size_t e = 0; e < n_elements(); ++e) {
        const auto el = element(e);
        const Point& a = vertices_[el[0]];
        const Point& b = vertices_[el[1]];
        const Point& c = vertices_[el[2]];
        best = std::min({best, angle_at(a, b, c), angle_at(b, c, a), angle_at(c, a, b)});
    }
    return best;
}

double Mesh::domain_measure() const {
    if (dim_ == 1) return box_.x1 - box_.x0;
    return (box_.x1 - box_.x0) * (box_.y1 - box_.y0);
}

void Mesh::finish() {
    h_ = 0.0;
    for (std::size_t e = 0; e < n_elements(); ++e) h_ = std::max(h_, element_diameter(e));
}

Mesh make_interval_mesh(double a, double b, int n) {
    if (!(a < b)) throw Error(ErrorCode::InvalidRange, "interval requires a < b");
    if (n < 2) throw Error(ErrorCode::TooCoarse, "interval mesh needs at least 2 elements");

    Mesh m;
    m.dim_ = 1;
    m.box_ = {a, 0.0, b, 0.0};
    m.nx_ = n;
    m.ny_ = 0;
    const double len = b - a;
    m.vertices_.resize(n + 1);
    for (int i = 0; i <= n; ++i) m.vertices_[i] = {a + len * i / n, 0.0};
    m.vertices_[n][0] = b;
    m.connectivity_.reserve(2 * n);
    for (int i = 0; i < n; ++i) {
        m.connectivity_.push_back(i);
        m.connectivity_.push_back(i + 1);
    }
    m.boundary_.assign(n + 1, false);
    m.boundary_[0] = m.boundary_[n] = true;
    m.finish();
    return m;
}

Mesh make_rect_mesh(double x0, double y0, double x1, double y1, int nx, int ny) {
    if (!(x0 < x1) || !(y0 < y1)) throw Error(ErrorCode::InvalidRange, "rectangle requires x0 < x1 and y0 < y1");
    if (nx < 2 || ny < 2) throw Error(ErrorCode::TooCoarse, "rectangle mesh needs at least 2 cells per direction");

    Mesh m;
    m.dim_ = 2;
    m.box_ = {x0, y0, x1, y1};
    m.nx_ = nx;
    m.ny_ = ny;
    const int stride = nx + 1;
    m.vertices_.resize(static_cast<std::size_t>(stride) * (ny + 1));
    m.boundary_.assign(m.vertices_.size(), false);
    for (int j = 0; j <= ny; ++j) {
        const double y = j == ny ? y1 : y0 + (y1 - y0) * j / ny;
        for (int i = 0; i <= nx; ++i) {
            const double x = i == nx ? x1 : x0 + (x1 - x0) * i / nx;
            const int v = j * stride + i;
            m.vertices_[v] = {x, y};
            m.boundary_[v] = (i == 0 || j == 0 || i == nx || j == ny);
        }
    }
    m.connectivity_.reserve(static_cast<std::size_t>(6) * nx * ny);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const int ll = j * stride + i;
            const int lr = ll + 1;
            const int ul = ll + stride;
            const int ur = ul + 1;
            // counter-clockwise, split along ll-ur
            m.connectivity_.insert(m.connectivity_.end(), {ll, lr, ur});
            m.connectivity_.insert(m.connectivity_.end(), {ll, ur, ul});
        }
    }
    m.finish();
    return m;
}

Mesh refine(const Mesh& m) {
    const Box& b = m.box();
    if (m.dim() == 1) return make_interval_mesh(b.x0, b.x1, 2 * m.nx());
    return make_rect_mesh(b.x0, b.y0, b.x1, b.y1, 2 * m.nx(), 2 * m.ny());
}

void write_mesh_text(std::ostream& os, const Mesh& m) {
    const auto prec = os.precision(17);
    os << m.dim() << ' ' << m.n_vertices() << ' ' << m.n_elements() << '\n';
    for (const auto& p : m.vertices()) {
        os << p[0];
        if (m.dim() == 2) os << ' ' << p[1];
        os << '\n';
    }
    for (std::size_t e = 0; e < m.n_elements(); ++e) {
        const auto el = m.element(e);
        for (std::size_t a = 0; a < el.size(); ++a) os << (a ? " " : "") << el[a];
        os << '\n';
    }
    os.precision(prec);
}

}  // namespace thermistor
