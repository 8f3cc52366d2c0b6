// Acceptance suite: one PASS/FAIL line per criterion, tolerances and runtime
// limits pinned below. Exit status is nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "stochfv/analysis.hpp"
#include "stochfv/verify.hpp"

using namespace stochfv;

namespace {

constexpr std::uint64_t kSeed = 20240611;
const Rectangle kUnit{0.0, 0.0, 1.0, 1.0};

MeshPtr uniform(std::size_t nx, std::size_t ny) {
    return std::make_shared<const Mesh>(build_uniform_rect(nx, ny, kUnit));
}

MeshPtr voronoi(std::size_t nx, std::size_t ny, std::uint64_t seed) {
    return std::make_shared<const Mesh>(build_voronoi(jittered_lattice(nx, ny, kUnit, 0.3, seed), kUnit.polygon()));
}

double cos_mode(double x, double y) { return std::cos(std::numbers::pi * x) * std::cos(std::numbers::pi * y); }

struct Outcome {
    bool passed = false;
    std::string detail;
};

struct Criterion {
    int id;
    std::string title;
    double limit_seconds;
    std::function<Outcome()> run;
};

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

// 1. ||grad^h w||^2 = 2 |w|_{1,h}^2 to 1e-12 on 100 random fields per mesh.
Outcome gradient_identity() {
    double worst = 0.0;
    bool ok = true;
    for (const MeshPtr& m : {uniform(8, 8), voronoi(10, 5, 3)}) {
        const auto r = gradient_identity_check(m, 100, kSeed, 1e-12);
        ok = ok && r.passed && r.rows.size() == 100;
        worst = std::max(worst, r.metrics.at("worst_relative_error"));
    }
    return {ok, "worst relative error " + fmt(worst) + " (tol 1e-12)"};
}

// 2. Discrete partial integration, 100 random pairs per mesh family.
Outcome partial_integration() {
    double worst = 0.0;
    bool ok = true;
    for (const MeshPtr& m : {uniform(8, 8), voronoi(10, 5, 3)}) {
        const auto r = partial_integration_check(m, 100, kSeed, 1e-12);
        ok = ok && r.passed && r.rows.size() == 100;
        worst = std::max(worst, r.metrics.at("worst_relative_residual"));
    }
    return {ok, "worst scaled residual " + fmt(worst) + " (tol 1e-12)"};
}

// 3. Mass balance on a 256-step sine-noise trajectory, 16x16 mesh.
Outcome mass_balance() {
    const MeshPtr m = uniform(16, 16);
    const TpfaOperator op = assemble(m);
    SchemeConfig config;
    config.T = 1.0;
    config.N = 256;
    const CellField u0 = project_initial(cos_mode, m);
    const auto r = mass_balance_check(op, config, NoiseModel::sine(1.0, 2.0), u0,
                                      realization_path(kSeed, 0, config.N, config.T), 1e-10);
    return {r.passed && r.rows.size() == 256, "worst relative defect " + fmt(r.metrics.at("worst_relative_defect")) +
                                                  " (tol 1e-10)"};
}

// 4. CG vs dense Cholesky on meshes up to 100 cells, 50 right-hand sides each.
Outcome solver_oracle() {
    std::vector<MeshPtr> meshes{uniform(1, 1), uniform(4, 4), uniform(8, 8), uniform(10, 10), uniform(25, 4),
                                voronoi(10, 5, 3), voronoi(10, 10, 5)};
    double worst = 0.0;
    bool ok = true;
    for (const auto& m : meshes) {
        ok = ok && m->num_cells() <= 100;
        const TpfaOperator op = assemble(m);
        for (double dt : {1e-3, 1.0 / 64.0, 1.0}) {
            const auto r = dense_oracle_check(op, dt, 50, kSeed, 1e-8);
            ok = ok && r.passed && r.rows.size() == 50;
            worst = std::max(worst, r.metrics.at("worst_scaled_difference"));
        }
    }
    return {ok, "worst inf-norm difference " + fmt(worst) + " (tol 1e-8) over " + std::to_string(meshes.size()) +
                    " meshes x 3 time steps"};
}

// 5. Deterministic heat mode, 8^2 .. 64^2 cells with dt proportional to h^2.
Outcome deterministic_convergence() {
    const std::vector<LevelSpec> levels{{8, 8, 4}, {16, 16, 16}, {32, 32, 64}, {64, 64, 256}};
    const auto r = heat_mode_study(levels, kUnit, 0.1, 1, 1);
    double min_order = INFINITY;
    for (const auto& o : r.orders) min_order = std::min(min_order, o[0][0]);
    std::string errs;
    for (const auto& L : r.levels) errs += fmt(L.errors[0][0].mean) + " ";
    return {r.monotone && r.levels.size() == 4 && min_order >= 1.0,
            "errors " + errs + "min order " + fmt(min_order) + " (need >= 1)"};
}

// 6. Energy estimate with linear noise, 8x8, N = 64, M = 500.
Outcome energy_estimate() {
    const MeshPtr m = uniform(8, 8);
    const TpfaOperator op = assemble(m);
    SchemeConfig config;
    config.T = 1.0;
    config.N = 64;
    const NoiseModel g = NoiseModel::linear(1.0);
    const CellField u0 = project_initial(cos_mode, m);
    const auto stats = run_ensemble(op, config, g, u0, 500, kSeed);
    const auto r = energy_estimate_check(stats, g, l2_norm_squared(cos_mode, *m));
    return {r.passed && stats.M == 500, r.summary};
}

// 7. Time translate O(tau) with a rough initial condition.
Outcome time_translate() {
    const MeshPtr m = uniform(64, 2);
    const TpfaOperator op = assemble(m);
    SchemeConfig config;
    config.T = 0.1;
    config.N = 256;
    auto weierstrass = [](double x, double) {
        double v = 0.0;
        for (int j = 0; j < 6; ++j) {
            const double f = std::ldexp(1.0, j);
            v += std::pow(f, -0.25) * std::cos(f * std::numbers::pi * x);
        }
        return v;
    };
    const CellField u0 = project_initial(weierstrass, m);
    TimeTranslateOptions options;
    options.taus = {config.T / 64, config.T / 32, config.T / 16, config.T / 8};
    const auto r = time_translate_check(op, config, NoiseModel::linear(1.0), u0, 500, options, kSeed);
    std::string detail = r.summary;
    for (const auto& [k, v] : r.metrics) detail += "; " + k + " " + fmt(v);
    return {r.passed, detail};
}

// 8. Pathwise uniqueness: bitwise identity, linear scaling, sine envelope.
Outcome pathwise_uniqueness() {
    const MeshPtr m = uniform(8, 8);
    const TpfaOperator op = assemble(m);
    SchemeConfig config;
    config.T = 1.0;
    config.N = 64;
    config.tolerance = 1e-13;
    const CellField u0 = project_initial(cos_mode, m);
    const CellField delta = random_field(m, kSeed, 11);

    const auto same = pathwise_uniqueness_check(op, config, NoiseModel::sine(1.0, 2.0), u0, u0, 200, kSeed);
    const bool bitwise = same.passed && same.metrics.at("bitwise_equal") == 1.0;

    const auto scaling =
        difference_scaling_check(op, config, NoiseModel::linear(1.0), u0, delta, 0.5, 2.0, 200, kSeed, 1e-10);

    CellField u0b = u0;
    for (std::size_t k = 0; k < u0b.size(); ++k) u0b[k] += 0.1 * delta[k];
    const auto sine = pathwise_uniqueness_check(op, config, NoiseModel::sine(1.0, 2.0), u0, u0b, 200, kSeed);

    std::string detail = std::string("bitwise ") + (bitwise ? "yes" : "no") + "; scaling " + scaling.summary +
                         "; sine envelope " + sine.summary;
    return {bitwise && scaling.passed && sine.passed, detail};
}

// 9. Stochastic strong convergence, linear noise, coupled paths, M = 1000, p = 1.
// The initial mean is nonzero so the noise term, not the fast decay of the
// cosine mode, dominates the time error.
Outcome strong_convergence() {
    const std::vector<LevelSpec> levels{{8, 8, 16}, {8, 8, 64}, {8, 8, 256}};
    auto u0 = [](double x, double y) { return 1.0 + 0.5 * cos_mode(x, y); };
    const auto r = convergence_study(levels, kUnit, 1.0, NoiseModel::linear(1.0), u0, {1.0}, 1000, kSeed);
    const double order = r.orders.empty() ? NAN : r.orders[0][0][0];
    std::string errs;
    for (const auto& L : r.levels) errs += fmt(L.errors[0][0].mean) + " ";
    return {r.monotone && order >= 0.3 && order <= 0.7,
            "errors " + errs + "time-only order " + fmt(order) + " (need [0.3, 0.7])"};
}

// 10. Left/right gap E||u^r - u^l||^2 <= C_1 dt on two time-step levels.
Outcome left_right_gap() {
    const MeshPtr m = uniform(8, 8);
    const TpfaOperator op = assemble(m);
    const NoiseModel g = NoiseModel::linear(1.0);
    const CellField u0 = project_initial(cos_mode, m);
    std::vector<EnsembleStats> levels;
    for (std::size_t N : {32, 64}) {
        SchemeConfig config;
        config.T = 1.0;
        config.N = N;
        levels.push_back(run_ensemble(op, config, g, u0, 500, kSeed));
    }
    const auto r = lr_gap_check(levels, g, l2_norm_squared(cos_mode, *m));
    return {r.passed && r.rows.size() == 2, r.summary};
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "gradient identity", 1.0, gradient_identity},
        {2, "discrete partial integration", 1.0, partial_integration},
        {3, "mass balance per step", 5.0, mass_balance},
        {4, "CG vs dense oracle", 5.0, solver_oracle},
        {5, "deterministic convergence", 120.0, deterministic_convergence},
        {6, "energy estimate", 60.0, energy_estimate},
        {7, "time translate", 120.0, time_translate},
        {8, "pathwise uniqueness", 60.0, pathwise_uniqueness},
        {9, "stochastic strong convergence", 300.0, strong_convergence},
        {10, "left/right gap", 60.0, left_right_gap},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = secs < c.limit_seconds;
        const bool pass = o.passed && in_time;
        if (!pass) ++failures;
        std::printf("%s criterion %d (%s): %s [%.2f s, limit %.0f s%s]\n", pass ? "PASS" : "FAIL", c.id,
                    c.title.c_str(), o.detail.c_str(), secs, c.limit_seconds, in_time ? "" : ", TOO SLOW");
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
