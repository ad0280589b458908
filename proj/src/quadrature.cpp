#include "thermistor/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "thermistor/error.hpp"

namespace thermistor {

std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "Gauss-Legendre needs at least one point");
    std::vector<double> nodes(n), weights(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Newton iteration on P_n from the Chebyshev-like initial guess
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = z;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        // map [-1,1] -> [0,1]
        nodes[i] = 0.5 * (1.0 - z);
        nodes[n - 1 - i] = 0.5 * (1.0 + z);
        weights[i] = weights[n - 1 - i] = 0.5 * w;
    }
    return {nodes, weights};
}

QuadratureRule interval_rule(int n_points) {
    auto [nodes, weights] = gauss_legendre(n_points);
    QuadratureRule q;
    q.dim = 1;
    q.order = 2 * n_points - 1;
    for (int i = 0; i < n_points; ++i) q.points.push_back({1.0 - nodes[i], nodes[i], 0.0});
    q.weights = std::move(weights);
    return q;
}

QuadratureRule triangle_rule(int order) {
    QuadratureRule q;
    q.dim = 2;
    q.order = order;
    switch (order) {
    case 1:
        q.points = {{1.0 / 3, 1.0 / 3, 1.0 / 3}};
        q.weights = {0.5};
        break;
    case 2:
        q.points = {{0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}};
        q.weights = {1.0 / 6, 1.0 / 6, 1.0 / 6};
        break;
    case 5: {
        const double s = std::sqrt(15.0);
        const double a1 = (6.0 - s) / 21.0, b1 = (9.0 + 2.0 * s) / 21.0;
        const double a2 = (6.0 + s) / 21.0, b2 = (9.0 - 2.0 * s) / 21.0;
        const double w1 = (155.0 - s) / 2400.0, w2 = (155.0 + s) / 2400.0;
        q.points = {{1.0 / 3, 1.0 / 3, 1.0 / 3}, {a1, a1, b1}, {a1, b1, a1}, {b1, a1, a1},
                    {a2, a2, b2}, {a2, b2, a2}, {b2, a2, a2}};
        q.weights = {9.0 / 80.0, w1, w1, w1, w2, w2, w2};
        break;
    }
    default: throw Error(ErrorCode::InvalidArgument, "unsupported triangle rule order " + std::to_string(order));
    }
    return q;
}

QuadratureRule assembly_rule(int dim) { return dim == 1 ? interval_rule(2) : triangle_rule(2); }

QuadratureRule norm_rule(int dim) { return dim == 1 ? interval_rule(3) : triangle_rule(5); }

QuadratureRule exact_data_rule(int dim) { return dim == 1 ? interval_rule(5) : triangle_rule(5); }

}  // namespace thermistor
