#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <iosfwd>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "stochfv/field.hpp"
#include "stochfv/noise.hpp"
#include "stochfv/solver.hpp"

namespace stochfv {

/// Monte Carlo mean with its standard error.
struct Estimate {
    double mean = 0.0;
    double se = 0.0;
};

/// Sample mean and standard error sd / sqrt(M). Needs at least two samples.
Estimate estimate(const std::vector<double>& samples);

/// Raised when a realization fails; what() names the realization index.
class RealizationError : public std::runtime_error {
public:
    RealizationError(std::size_t index, const std::string& what)
        : std::runtime_error("realization " + std::to_string(index) + ": " + what), index_(index) {}
    std::size_t index() const { return index_; }

private:
    std::size_t index_;
};

/// Evaluates f(r) for r = 0..M-1 on up to `threads` workers and returns the
/// results indexed by r, so any reduction over them is schedule independent.
template <class F>
auto map_realizations(std::size_t M, unsigned threads, F&& f) -> std::vector<decltype(f(std::size_t{}))> {
    using R = decltype(f(std::size_t{}));
    std::vector<R> results(M);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::size_t failed_index = M;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t r = next++; r < M; r = next++) {
            try {
                results[r] = f(r);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (r < failed_index) {
                    failed_index = r;
                    failure = std::current_exception();
                }
            }
        }
    };
    const unsigned n_threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(M)));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) {
        try {
            std::rethrow_exception(failure);
        } catch (const std::exception& e) {
            throw RealizationError(failed_index, e.what());
        }
    }
    return results;
}

/// Outcome of a verification: pass flag, one-line summary, a table and named scalars.
struct CheckReport {
    std::string name;
    bool passed = false;
    std::string summary;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::map<std::string, double> metrics;

    void write_csv(std::ostream& os) const;
    void write_text(std::ostream& os) const;
};

/// Per-time-index Monte Carlo estimates over M realizations.
struct EnsembleStats {
    std::size_t M = 0;
    std::size_t N = 0;
    double T = 0.0;
    double domain_area = 0.0;
    double initial_l2_sq = 0.0;           // ||u_h^0||^2
    std::vector<Estimate> l2_sq;          // E ||u^n||^2, n = 0..N
    Estimate max_l2_sq;                   // E max_n ||u^n||^2
    std::vector<Estimate> h1_energy;      // E dt sum_{k<n} |u^{k+1}|_{1,h}^2
    std::vector<Estimate> increments_sq;  // E sum_{k<n} ||u^{k+1} - u^k||^2
    std::vector<Estimate> energy_lhs;     // E of ||u^n||^2 + sum ||du||^2 + 2 dt sum |u|_{1,h}^2
    Estimate lr_gap;                      // E dt sum_{k<N} ||u^{k+1} - u^k||^2 = E ||u^r - u^l||^2

    double dt() const { return T / static_cast<double>(N); }
};

/// Realization r uses sample_path(derive_seed(master_seed, r), N, T).
EnsembleStats run_ensemble(const TpfaOperator& op, const SchemeConfig& config, const NoiseModel& model,
                           const CellField& u0, std::size_t M, std::uint64_t master_seed, unsigned threads = 1);

BrownianPath realization_path(std::uint64_t master_seed, std::size_t r, std::size_t N, double T);

/// C_1 = ||u0||^2 + 2 C_L T (Upsilon + |Lambda|) with
/// Upsilon = ((1 + 2 C_L T) ||u_h^0||^2 + 2 C_L |Lambda| T) e^{2 C_L T}.
double energy_constant_C1(const NoiseModel& model, double T, double domain_area, double u0_l2_sq,
                          double uh0_l2_sq);

/// Passes when LHS_n - 2 SE <= C_1 for all n. `u0_l2_sq` is the continuous ||u0||^2.
CheckReport energy_estimate_check(const EnsembleStats& stats, const NoiseModel& model, double u0_l2_sq);

/// E max_n ||u^n||^2 across refinement levels (coarse to fine). Passes when all
/// estimates are finite and none exceeds the largest earlier estimate by more
/// than 4 joint standard errors plus `relative_slack` of that estimate.
CheckReport max_bound_check(const std::vector<EnsembleStats>& levels, double relative_slack = 0.0);

/// int |w(x + eta) - w(x)|^2 dx for the zero extension of w, from exact
/// polygon overlap areas.
double space_translate_lhs(const CellField& w, const Vec2& eta);

/// Per snapshot: LHS, |eta| (|u|_{1,h}^2 + ||u||^2) and their ratio. Passes when all are finite.
CheckReport space_translate_check(const SpaceTimeField& trajectory, const Vec2& eta);

/// int_0^{T - tau} ||phi(t + tau) - phi(t)||^2 dt for phi = u^l - M, with M
/// read through `mode` (Left: piecewise constant, Affine: running sum
/// interpolated in time). Exact: the integrand is quadratic between the
/// breakpoints t_n and t_n - tau.
double time_translate_integral(const SpaceTimeField& u, const SpaceTimeField& ito, TimeMode mode, double tau);

/// Monte Carlo version over M realizations, both conventions. Passes when for
/// each convention the ratios estimate / tau vary by less than `max_spread`
/// and the least-squares log-log slope lies in [slope_min, slope_max].
struct TimeTranslateOptions {
    std::vector<double> taus;
    double max_spread = 3.0;
    double slope_min = 0.7;
    double slope_max = 1.3;
};
CheckReport time_translate_check(const TpfaOperator& op, const SchemeConfig& config, const NoiseModel& model,
                                 const CellField& u0, std::size_t M, const TimeTranslateOptions& options,
                                 std::uint64_t master_seed, unsigned threads = 1);

/// Nested uniform-grid refinement level.
struct LevelSpec {
    std::size_t nx = 1;
    std::size_t ny = 1;
    std::size_t N = 1;
};

/// Throws std::invalid_argument unless each level refines the previous one by
/// integer factors in nx, ny and N (a factor of one is allowed).
void require_nested(const std::vector<LevelSpec>& levels);

using InitialCondition = std::function<double(double, double)>;

/// E int_0^T [u^l(t)]^2_{W^{alpha,2}(Lambda)} dt and E [u^l]^2_{W^{alpha,2}(0,T;L^2)}
/// per level. Passes when neither estimate grows past the largest earlier one
/// by more than 4 joint SE plus `relative_slack`.
CheckReport gagliardo_bound_check(const std::vector<LevelSpec>& levels, const Rectangle& domain, double T,
                                  const NoiseModel& model, const InitialCondition& u0, double alpha, std::size_t M,
                                  std::uint64_t master_seed, unsigned threads = 1, double relative_slack = 0.0);

/// Paired trajectories on shared paths. Passes when E ||u_a - u_b||^2(t_n) - 2 SE
/// <= e^{(1 + C_L) T} ||u0_a - u0_b||^2 for every n; identical initial data must
/// give bitwise identical trajectories.
CheckReport pathwise_uniqueness_check(const TpfaOperator& op, const SchemeConfig& config, const NoiseModel& model,
                                      const CellField& u0_a, const CellField& u0_b, std::size_t M,
                                      std::uint64_t master_seed, unsigned threads = 1);

/// Runs u0, u0 + eps_a delta and u0 + eps_b delta on shared paths and checks
/// that every difference norm scales by eps_b / eps_a to `rel_tol`. Meant for
/// linear g, where the coupled scheme is linear.
CheckReport difference_scaling_check(const TpfaOperator& op, const SchemeConfig& config, const NoiseModel& model,
                                     const CellField& u0, const CellField& delta, double eps_a, double eps_b,
                                     std::size_t M, std::uint64_t master_seed, double rel_tol = 1e-10,
                                     unsigned threads = 1);

struct ConvergenceLevel {
    LevelSpec spec;
    double h = 0.0;
    double dt = 0.0;
    // errors[p index][0 = left, 1 = right]
    std::vector<std::array<Estimate, 2>> errors;
};

struct ConvergenceReport {
    std::vector<double> p_values;
    std::vector<ConvergenceLevel> levels;  // the reference level is not listed when it is the finest level
    /// orders[i][p index][mode] between levels i and i + 1, against h when h
    /// changes and against dt otherwise.
    std::vector<std::vector<std::array<double, 2>>> orders;
    bool monotone = false;  // errors non-increasing for every p and mode

    void write_csv(std::ostream& os) const;
    void write_text(std::ostream& os) const;
};

/// Coupled Monte Carlo study: the finest level is the reference, coarser
/// levels use coarsened paths, and coarse fields are injected onto the fine grid.
ConvergenceReport convergence_study(const std::vector<LevelSpec>& levels, const Rectangle& domain, double T,
                                    const NoiseModel& model, const InitialCondition& u0,
                                    const std::vector<double>& p_values, std::size_t M, std::uint64_t master_seed,
                                    unsigned threads = 1);

/// Deterministic study with g = 0 against the Neumann eigenmode
///   u(t) = e^{-(kx^2 / W^2 + ky^2 / H^2) pi^2 t} cos(kx pi (x - x0) / W) cos(ky pi (y - y0) / H),
/// integrated in closed form per cell and time interval. Reports p = 2.
ConvergenceReport heat_mode_study(const std::vector<LevelSpec>& levels, const Rectangle& domain, double T,
                                  int kx = 1, int ky = 1);

/// Squared L^2(0, T; L^2) distance between a reconstruction and the Neumann eigenmode solution.
double heat_mode_error_squared(const SpaceTimeField& field, TimeMode mode, const Rectangle& domain, int kx, int ky);

/// E ||u^r - u^l||^2 <= C_1 dt (with 2 SE slack) on every level.
CheckReport lr_gap_check(const std::vector<EnsembleStats>& levels, const NoiseModel& model, double u0_l2_sq);

}  // namespace stochfv
