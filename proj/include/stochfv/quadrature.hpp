#pragma once

#include <vector>

#include "stochfv/geometry.hpp"

namespace stochfv {

struct QuadratureRule1D {
    std::vector<double> nodes;    // on [0, 1]
    std::vector<double> weights;  // sum to 1
};

/// Gauss-Legendre rule mapped to [0, 1]. Supported orders: 1-10, 12, 16, 20.
const QuadratureRule1D& gauss_legendre(unsigned order);

struct TriangleRule {
    std::vector<Vec2> barycentric;  // (lambda1, lambda2); lambda0 = 1 - l1 - l2
    std::vector<double> weights;    // sum to 1 (fraction of the triangle area)
};

/// Collapsed (Duffy) Gauss-Legendre product rule on the reference triangle;
/// exact for polynomials of degree 2*order - 2.
const TriangleRule& triangle_rule(unsigned order);

}  // namespace stochfv
