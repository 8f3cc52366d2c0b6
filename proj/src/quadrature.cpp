#include "stochfv/quadrature.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <map>
#include <mutex>
#include <stdexcept>
#include <string>

namespace stochfv {
namespace {

// Boost stores the non-negative half of the symmetric rule on [-1, 1].
template <unsigned N>
QuadratureRule1D expand_boost_rule() {
    using rule = boost::math::quadrature::gauss<double, N>;
    const auto& x = rule::abscissa();
    const auto& w = rule::weights();
    QuadratureRule1D out;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] == 0.0) {
            out.nodes.push_back(0.5);
            out.weights.push_back(0.5 * w[i]);
            continue;
        }
        out.nodes.push_back(0.5 * (1.0 - x[i]));
        out.weights.push_back(0.5 * w[i]);
        out.nodes.push_back(0.5 * (1.0 + x[i]));
        out.weights.push_back(0.5 * w[i]);
    }
    return out;
}

QuadratureRule1D make_rule(unsigned order) {
    switch (order) {
        case 1: return {{0.5}, {1.0}};
        case 2: return expand_boost_rule<2>();
        case 3: return expand_boost_rule<3>();
        case 4: return expand_boost_rule<4>();
        case 5: return expand_boost_rule<5>();
        case 6: return expand_boost_rule<6>();
        case 7: return expand_boost_rule<7>();
        case 8: return expand_boost_rule<8>();
        case 9: return expand_boost_rule<9>();
        case 10: return expand_boost_rule<10>();
        case 12: return expand_boost_rule<12>();
        case 16: return expand_boost_rule<16>();
        case 20: return expand_boost_rule<20>();
        default: throw std::invalid_argument("unsupported Gauss-Legendre order " + std::to_string(order));
    }
}

std::mutex cache_mutex;

}  // namespace

const QuadratureRule1D& gauss_legendre(unsigned order) {
    static std::map<unsigned, QuadratureRule1D> cache;
    std::lock_guard lock(cache_mutex);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, make_rule(order)).first;
    return it->second;
}

const TriangleRule& triangle_rule(unsigned order) {
    static std::map<unsigned, TriangleRule> cache;
    const QuadratureRule1D& g = gauss_legendre(order);
    std::lock_guard lock(cache_mutex);
    auto it = cache.find(order);
    if (it != cache.end()) return it->second;
    TriangleRule rule;
    // (u, v) on the unit square -> (u, v (1 - u)); Jacobian (1 - u), area 1/2.
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        for (std::size_t j = 0; j < g.nodes.size(); ++j) {
            const double u = g.nodes[i];
            const double v = g.nodes[j] * (1.0 - u);
            rule.barycentric.push_back({u, v});
            rule.weights.push_back(2.0 * g.weights[i] * g.weights[j] * (1.0 - u));
        }
    }
    return cache.emplace(order, std::move(rule)).first->second;
}

}  // namespace stochfv
