#include <doctest.h>

#include <cmath>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "stochfv/noise.hpp"

using namespace stochfv;

TEST_CASE("noise coefficients, Lipschitz and growth constants") {
    const auto zero = NoiseModel::zero();
    const auto add = NoiseModel::additive(0.5);
    const auto lin = NoiseModel::linear(-2.0);
    const auto sine = NoiseModel::sine(1.5, 3.0);
    CHECK(zero(7.0) == 0.0);
    CHECK(add(7.0) == 0.5);
    CHECK(lin(1.5) == -3.0);
    CHECK(sine(0.2) == doctest::Approx(1.5 * std::sin(0.6)));
    CHECK(zero.lipschitz_L() == 0.0);
    CHECK(add.lipschitz_L() == 0.0);
    CHECK(lin.lipschitz_L() == 2.0);
    CHECK(sine.lipschitz_L() == doctest::Approx(4.5));
    // |g(r)|^2 <= C_L (1 + r^2) on a grid of r.
    for (const auto& g : {zero, add, lin, sine}) {
        for (double r = -20.0; r <= 20.0; r += 0.01) {
            REQUIRE(g(r) * g(r) <= g.growth_CL() * (1.0 + r * r) * (1.0 + 1e-14));
        }
    }
    CHECK(parse_noise_kind("sine") == NoiseModel::Kind::Sine);
    CHECK(std::string(to_string(NoiseModel::Kind::Linear)) == "linear");
    CHECK_THROWS_AS(parse_noise_kind("cubic"), std::invalid_argument);
}

TEST_CASE("eval_g applies g cellwise") {
    const auto m = std::make_shared<const Mesh>(build_uniform_rect(2, 1, {}));
    const CellField u(m, std::vector<double>{1.0, -2.0});
    const CellField g = eval_g(NoiseModel::linear(3.0), u);
    CHECK(g[0] == 3.0);
    CHECK(g[1] == -6.0);
}

TEST_CASE("Brownian increments have variance dt") {
    const std::size_t N = 100000;
    const double T = 2.0;
    const auto p = sample_path(11, N, T);
    REQUIRE(p.increments.size() == N);
    double s = 0.0, s2 = 0.0;
    for (double d : p.increments) {
        s += d;
        s2 += d * d;
    }
    const double dt = T / N;
    CHECK(std::abs(s / N) < 5.0 * std::sqrt(dt / N));
    CHECK(std::abs(s2 / N / dt - 1.0) < 5.0 * std::sqrt(2.0 / N));
    CHECK(p.W(0) == 0.0);
    CHECK(p.W(N) == doctest::Approx(s));
}

TEST_CASE("paths are reproducible and quantized") {
    const auto a = sample_path(5, 64, 1.0);
    const auto b = sample_path(5, 64, 1.0);
    const auto c = sample_path(6, 64, 1.0);
    CHECK(a.increments == b.increments);
    CHECK(a.increments != c.increments);
    // Increments sit on a binary grid of 2^-40, so every partial sum is exact.
    for (double d : a.increments) CHECK(std::ldexp(d, 40) == std::round(std::ldexp(d, 40)));
}

TEST_CASE("coarsening sums increments and composes exactly") {
    const auto p = sample_path(9, 96, 3.0);
    const auto c2 = coarsen_path(p, 2);
    REQUIRE(c2.N == 48);
    CHECK(c2.T == 3.0);
    for (std::size_t i = 0; i < 48; ++i) CHECK(c2.increments[i] == p.increments[2 * i] + p.increments[2 * i + 1]);
    const auto a = coarsen_path(coarsen_path(p, 2), 3);
    const auto b = coarsen_path(coarsen_path(p, 3), 2);
    const auto d = coarsen_path(p, 6);
    CHECK(a.increments == d.increments);
    CHECK(b.increments == d.increments);
    CHECK(coarsen_path(p, 96).increments[0] == p.W(96));
    CHECK_THROWS_AS(coarsen_path(p, 5), std::invalid_argument);
    CHECK_THROWS_AS(coarsen_path(p, 0), std::invalid_argument);
}

TEST_CASE("path CSV round trip is bitwise") {
    const auto p = sample_path(12, 40, 0.7);
    std::stringstream ss;
    write_path_csv(ss, p);
    const auto q = read_path_csv(ss);
    CHECK(q.seed == p.seed);
    CHECK(q.N == p.N);
    CHECK(q.T == p.T);
    CHECK(q.increments == p.increments);
    std::istringstream bad("step,increment\n0,1\n");
    CHECK_THROWS(read_path_csv(bad));
}
