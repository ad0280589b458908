#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace thermistor {

using Point = std::array<double, 2>;

/// Axis-aligned bounding box of the meshed domain. In 1D only x0/x1 matter.
struct Box {
    double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;
};

/// Conforming simplicial mesh of an interval or a rectangle.
///
/// Vertices are numbered ascending in 1D and lexicographically by (y, x)
/// in 2D. Every grid cell of a 2D mesh is cut along its lower-left to
/// upper-right diagonal. The mesh is immutable once built.
class Mesh {
public:
    int dim() const noexcept { return dim_; }
    std::size_t n_vertices() const noexcept { return vertices_.size(); }
    std::size_t n_elements() const noexcept { return connectivity_.size() / nodes_per_element(); }
    int nodes_per_element() const noexcept { return dim_ + 1; }

    const std::vector<Point>& vertices() const noexcept { return vertices_; }
    const Point& vertex(std::size_t v) const { return vertices_[v]; }
    std::span<const int> element(std::size_t e) const {
        return {connectivity_.data() + e * nodes_per_element(), static_cast<std::size_t>(nodes_per_element())};
    }

    bool is_boundary(std::size_t v) const { return boundary_[v]; }
    std::vector<int> boundary_vertices() const;

    /// Maximum element diameter.
    double h() const noexcept { return h_; }
    const Box& box() const noexcept { return box_; }
    int nx() const noexcept { return nx_; }
    int ny() const noexcept { return ny_; }

    /// Diameter of element e recomputed from its vertex coordinates.
    double element_diameter(std::size_t e) const;
    /// Signed length (1D) or signed area (2D) of element e.
    double element_measure(std::size_t e) const;
    /// Smallest interior angle (radians) over all triangles; pi for 1D meshes.
    double min_angle() const;
    /// Total measure |Omega|.
    double domain_measure() const;

private:
    friend Mesh make_interval_mesh(double, double, int);
    friend Mesh make_rect_mesh(double, double, double, double, int, int);

    Mesh() = default;
    void finish();

    int dim_ = 1;
    std::vector<Point> vertices_;
    std::vector<int> connectivity_;
    std::vector<bool> boundary_;
    double h_ = 0.0;
    Box box_;
    int nx_ = 0;
    int ny_ = 0;
};

/// Uniform partition of (a, b) into n segments.
Mesh make_interval_mesh(double a, double b, int n);

/// Structured triangulation of [x0,x1]x[y0,y1] with nx*ny cells, two
/// triangles per cell.
Mesh make_rect_mesh(double x0, double y0, double x1, double y1, int nx, int ny);

/// Uniform refinement: halves every segment (1D) or doubles nx and ny (2D).
Mesh refine(const Mesh& m);

/// Debug dump: header `dim n_vertices n_elements`, then vertex lines, then
/// element lines.
void write_mesh_text(std::ostream& os, const Mesh& m);

}  // namespace thermistor
