#pragma once

#include <array>
#include <utility>
#include <vector>

namespace thermistor {

/// Quadrature on the reference simplex. Points are barycentric coordinates
/// (third entry unused in 1D); weights sum to the reference measure (1 for
/// [0,1], 1/2 for the unit triangle).
struct QuadratureRule {
    int dim = 1;
    /// Polynomial degree integrated exactly.
    int order = 0;
    std::vector<std::array<double, 3>> points;
    std::vector<double> weights;

    std::size_t size() const noexcept { return weights.size(); }
    double reference_measure() const noexcept { return dim == 1 ? 1.0 : 0.5; }
};

/// Gauss-Legendre nodes and weights on [0, 1].
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n);

QuadratureRule interval_rule(int n_points);
/// Supported orders: 1 (centroid), 2 (edge midpoints), 5 (7-point).
QuadratureRule triangle_rule(int order);

/// Rule for assembling nonlinear terms: 2-point Gauss in 1D, edge
/// midpoints in 2D.
QuadratureRule assembly_rule(int dim);
/// Rule for error norms: 3-point Gauss in 1D, 7-point in 2D.
QuadratureRule norm_rule(int dim);
/// Rule for integrands built from smooth exact data: 5-point Gauss in 1D,
/// 7-point in 2D.
QuadratureRule exact_data_rule(int dim);

}  // namespace thermistor
