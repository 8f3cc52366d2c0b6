#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "stochfv/field.hpp"

namespace stochfv {

/// Noise coefficient g with its Lipschitz constant L and growth constant
/// C_L = 2 max(L^2, g(0)^2), so that |g(r)|^2 <= C_L (1 + r^2).
struct NoiseModel {
    enum class Kind { Zero, Additive, Linear, Sine };

    Kind kind = Kind::Zero;
    double sigma0 = 0.0;  // additive level or sine amplitude
    double lambda = 0.0;  // linear slope
    double omega = 0.0;   // sine frequency

    static NoiseModel zero() { return {}; }
    static NoiseModel additive(double sigma0) { return {Kind::Additive, sigma0, 0.0, 0.0}; }
    static NoiseModel linear(double lambda) { return {Kind::Linear, 0.0, lambda, 0.0}; }
    /// g(u) = sigma0 sin(omega u)
    static NoiseModel sine(double sigma0, double omega) { return {Kind::Sine, sigma0, 0.0, omega}; }

    double operator()(double u) const;
    double lipschitz_L() const;
    double growth_CL() const;
    std::string describe() const;
};

const char* to_string(NoiseModel::Kind kind);
/// Accepts "zero", "additive", "linear", "sine".
NoiseModel::Kind parse_noise_kind(const std::string& name);

CellField eval_g(const NoiseModel& model, const CellField& u);

/// Brownian increments dW_1..dW_N on the uniform grid of [0, T].
///
/// Sampled increments are rounded to a fixed binary quantum (2^-40 times a
/// power of two >= sqrt(T)), far below any statistical resolution. All partial
/// sums of a path are then exact in double precision, which makes coarsening
/// associative to the last bit.
struct BrownianPath {
    std::uint64_t seed = 0;
    std::size_t N = 0;
    double T = 0.0;
    std::vector<double> increments;

    double dt() const { return T / static_cast<double>(N); }
    /// W(t_n) as the running sum of the first n increments.
    double W(std::size_t n) const;
};

BrownianPath sample_path(std::uint64_t seed, std::size_t N, double T);

/// Sums `factor` consecutive increments. Throws unless factor divides N.
BrownianPath coarsen_path(const BrownianPath& path, std::size_t factor);

/// CSV "step,increment" preceded by a "# brownian_path seed=... N=... T=..." line.
void write_path_csv(std::ostream& os, const BrownianPath& path);
BrownianPath read_path_csv(std::istream& is);

}  // namespace stochfv
