#include "thermistor/output.hpp"

#include <cstdio>
#include <ostream>

namespace thermistor {

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void write_snapshot_csv(std::ostream& os, const FeFunction& u) {
    const Mesh& mesh = u.dofmap->mesh();
    os << "x,u\n";
    for (std::size_t v = 0; v < mesh.n_vertices(); ++v) os << num(mesh.vertex(v)[0]) << ',' << num(u.vertex_value(v)) << '\n';
}

void write_snapshot_vtk(std::ostream& os, const FeFunction& u, const std::string& title) {
    const Mesh& mesh = u.dofmap->mesh();
    const std::size_t nv = mesh.n_vertices();
    const std::size_t ne = mesh.n_elements();
    const int npe = mesh.nodes_per_element();

    os << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    os << "POINTS " << nv << " double\n";
    for (const auto& p : mesh.vertices()) os << num(p[0]) << ' ' << num(p[1]) << " 0\n";
    os << "CELLS " << ne << ' ' << ne * (npe + 1) << '\n';
    for (std::size_t e = 0; e < ne; ++e) {
        os << npe;
        for (const int v : mesh.element(e)) os << ' ' << v;
        os << '\n';
    }
    // 3 = VTK_LINE, 5 = VTK_TRIANGLE
    os << "CELL_TYPES " << ne << '\n';
    for (std::size_t e = 0; e < ne; ++e) os << (npe == 2 ? 3 : 5) << '\n';
    os << "POINT_DATA " << nv << "\nSCALARS u double 1\nLOOKUP_TABLE default\n";
    for (std::size_t v = 0; v < nv; ++v) os << num(u.vertex_value(v)) << '\n';
}

}  // namespace thermistor
