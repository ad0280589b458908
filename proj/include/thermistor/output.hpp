#pragma once

#include <iosfwd>
#include <string>

#include "thermistor/fespace.hpp"

namespace thermistor {

/// 1D snapshot: header `x,u`, then one `x,u` line per vertex, boundary
/// vertices included.
void write_snapshot_csv(std::ostream& os, const FeFunction& u);

/// 2D snapshot as legacy ASCII VTK unstructured grid with POINT_DATA
/// scalar `u`.
void write_snapshot_vtk(std::ostream& os, const FeFunction& u, const std::string& title);

}  // namespace thermistor
