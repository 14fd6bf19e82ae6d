#pragma once

#include <utility>
#include <vector>

namespace magsphere {

struct GaussRule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

// Gauss-Legendre rule, computed by Newton iteration on the Legendre
// polynomial and cached per order.
const GaussRule& gauss_legendre(int n);

}  // namespace magsphere
