#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "stochfv/rng.hpp"
#include "stochfv/solver.hpp"

using namespace stochfv;

namespace {

const Rectangle kUnit{0.0, 0.0, 1.0, 1.0};

MeshPtr uniform(std::size_t nx, std::size_t ny, const Rectangle& r = kUnit) {
    return std::make_shared<const Mesh>(build_uniform_rect(nx, ny, r));
}

SchemeConfig scheme(double T, std::size_t N) {
    SchemeConfig c;
    c.T = T;
    c.N = N;
    return c;
}

}  // namespace

TEST_CASE("TPFA matrix of two cells") {
    const auto op = assemble(uniform(2, 1));
    // l = 1, d = 1/2: transmissibility 2.
    CHECK(op.A.at(0, 0) == doctest::Approx(2.0));
    CHECK(op.A.at(0, 1) == doctest::Approx(-2.0));
    CHECK(op.A.at(1, 0) == doctest::Approx(-2.0));
    CHECK(op.mass[0] == doctest::Approx(0.5));
    std::ostringstream mm;
    write_matrix_market(mm, op.A);
    CHECK(mm.str().rfind("%%MatrixMarket matrix coordinate real symmetric", 0) == 0);
}

TEST_CASE("assemble rejects inadmissible meshes") {
    Mesh m = build_uniform_rect(3, 3, kUnit);
    m.cells[4].center.x += 0.05;
    CHECK_THROWS_AS(assemble(std::make_shared<const Mesh>(m)), std::invalid_argument);
}

TEST_CASE("CG and dense Cholesky recover a known solution") {
    const auto m = std::make_shared<const Mesh>(build_voronoi(jittered_lattice(7, 6, kUnit, 0.3, 2), kUnit.polygon()));
    const auto op = assemble(m);
    const CsrMatrix S = shifted_system(op, 0.01);
    std::vector<double> x_true(S.n), b(S.n);
    for (std::size_t k = 0; k < S.n; ++k) x_true[k] = std::sin(3.0 * k);
    S.multiply(x_true, b);
    std::vector<double> x;
    const auto info = solve_linear_system(S, b, x, 1e-12);
    CHECK(info.relative_residual <= 1e-12);
    const auto y = dense_cholesky_solve(S, b);
    for (std::size_t k = 0; k < S.n; ++k) {
        CHECK(x[k] == doctest::Approx(x_true[k]).epsilon(1e-9));
        CHECK(y[k] == doctest::Approx(x_true[k]).epsilon(1e-11));
    }
    std::vector<double> z;
    CHECK(solve_linear_system(S, std::vector<double>(S.n, 0.0), z).iterations == 0);
    CHECK(z == std::vector<double>(S.n, 0.0));
}

TEST_CASE("CG reports failure when the iteration cap is hit") {
    const auto op = assemble(uniform(16, 16));
    const CsrMatrix S = shifted_system(op, 1.0);
    std::vector<double> b(S.n);
    for (std::size_t k = 0; k < S.n; ++k) b[k] = uniform01(3, 0, k) - 0.5;
    std::vector<double> x;
    CHECK_THROWS_AS(solve_linear_system(S, b, x, 1e-12, 2), SolverError);
    std::vector<double> wrong(S.n + 1);
    CHECK_THROWS_AS(solve_linear_system(S, wrong, x), std::invalid_argument);
}

TEST_CASE("projection and L2 norms of analytic functions") {
    const auto m = std::make_shared<const Mesh>(build_voronoi(jittered_lattice(5, 5, kUnit, 0.3, 8), kUnit.polygon()));
    // Mean of x^2 y over each cell, compared through the total integral 1/6.
    const CellField p = project_initial([](double x, double y) { return x * x * y; }, m);
    double total = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) total += m->cells[k].area * p[k];
    CHECK(total == doctest::Approx(1.0 / 6.0).epsilon(1e-13));
    CHECK(l2_norm_squared([](double x, double) { return x; }, *m) == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
    CHECK_THROWS_AS(project_initial([](double, double) { return NAN; }, m), std::invalid_argument);
}

TEST_CASE("implicit step damps a discrete cosine mode by 1 / (1 + dt lambda_h)") {
    // On an n-by-1 grid, v_i = cos(pi x_i) is an eigenvector of M^{-1} A with
    // eigenvalue (4 / h^2) sin^2(pi h / 2).
    const std::size_t n = 20;
    const auto m = uniform(n, 1);
    const auto op = assemble(m);
    const double h = 1.0 / n;
    const double lambda = 4.0 / (h * h) * std::pow(std::sin(std::numbers::pi * h / 2.0), 2);
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = std::cos(std::numbers::pi * m->cells[i].center.x);
    const double dt = 0.01;
    SchemeConfig c = scheme(dt, 1);
    c.tolerance = 1e-13;
    const CellField next = step(op, CellField(m, v), NoiseModel::zero(), 0.0, c);
    for (std::size_t i = 0; i < n; ++i) CHECK(next[i] == doctest::Approx(v[i] / (1.0 + dt * lambda)).epsilon(1e-10));
}

TEST_CASE("constant fields: zero noise keeps them, linear noise multiplies by 1 + dW") {
    const auto m = uniform(4, 4);
    const auto op = assemble(m);
    const auto c = scheme(1.0, 8);
    const auto path = sample_path(21, 8, 1.0);
    const auto still = solve_trajectory(op, c, NoiseModel::zero(), path, CellField(m, 2.5));
    for (std::size_t n = 0; n <= 8; ++n)
        for (std::size_t k = 0; k < 16; ++k) CHECK(still[n][k] == 2.5);

    const auto u = solve_trajectory(op, c, NoiseModel::linear(1.0), path, CellField(m, 1.0));
    double expected = 1.0;
    for (std::size_t n = 1; n <= 8; ++n) {
        expected *= 1.0 + path.increments[n - 1];
        for (std::size_t k = 0; k < 16; ++k) CHECK(u[n][k] == doctest::Approx(expected).epsilon(1e-12));
    }
    // The Ito sums telescope: M_n = u^n - u^0 for a spatially constant solution.
    const auto M = ito_partial_sums(NoiseModel::linear(1.0), u, path);
    for (std::size_t n = 0; n <= 8; ++n) CHECK(M[n][3] == doctest::Approx(u[n][3] - 1.0).epsilon(1e-12));
    CHECK(reconstruction_for(ItoConvention::Left) == TimeMode::Left);
    CHECK(reconstruction_for(ItoConvention::Running) == TimeMode::Affine);
}

TEST_CASE("trajectory argument checks") {
    const auto m = uniform(2, 2);
    const auto op = assemble(m);
    const auto path = sample_path(1, 4, 1.0);
    CHECK_THROWS_AS(solve_trajectory(op, scheme(1.0, 8), NoiseModel::zero(), path, CellField(m, 0.0)),
                    std::invalid_argument);
    CHECK_THROWS_AS(scheme(0.0, 4).validate(), std::invalid_argument);
    CHECK_THROWS_AS(scheme(1.0, 0).validate(), std::invalid_argument);
    SchemeConfig loose = scheme(1.0, 4);
    loose.tolerance = 1e-2;
    CHECK_THROWS_AS(loose.validate(), std::invalid_argument);
}

TEST_CASE("stepper reuses the system and matches the free step") {
    const auto m = uniform(5, 5);
    const auto op = assemble(m);
    const auto c = scheme(0.5, 10);
    const SemiImplicitStepper stepper(op, c);
    std::vector<double> u(25), next;
    for (std::size_t k = 0; k < 25; ++k) u[k] = std::cos(1.0 + k);
    stepper.step(u, NoiseModel::sine(1.0, 1.0), 0.1, next);
    const CellField ref = step(op, CellField(m, u), NoiseModel::sine(1.0, 1.0), 0.1, c);
    for (std::size_t k = 0; k < 25; ++k) CHECK(next[k] == doctest::Approx(ref[k]).epsilon(1e-12));
}
