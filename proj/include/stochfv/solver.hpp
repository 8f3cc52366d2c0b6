#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "stochfv/field.hpp"
#include "stochfv/noise.hpp"

namespace stochfv {

/// Compressed sparse row matrix, columns sorted within each row.
struct CsrMatrix {
    std::size_t n = 0;
    std::vector<std::size_t> row_ptr{0};
    std::vector<std::size_t> col;
    std::vector<double> val;

    void multiply(const std::vector<double>& x, std::vector<double>& y) const;
    double at(std::size_t i, std::size_t j) const;
    std::vector<double> diagonal() const;
};

/// TPFA discretization of -Laplace with zero Neumann flux, plus the mass vector.
struct TpfaOperator {
    MeshPtr mesh;
    CsrMatrix A;
    std::vector<double> mass;
};

/// Throws std::invalid_argument if the mesh fails validate_admissibility.
TpfaOperator assemble(MeshPtr mesh);

struct SchemeConfig {
    double T = 1.0;
    std::size_t N = 1;
    double tolerance = 1e-10;        // relative residual of the linear solves
    std::size_t max_iterations = 0;  // 0 means 10 x cell count

    double dt() const { return T / static_cast<double>(N); }
    /// Throws std::invalid_argument on T <= 0, N = 0 or tolerance outside (0, 1e-4].
    void validate() const;
};

/// Linear solver failure; carries the final relative residual.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double residual, std::size_t iterations)
        : std::runtime_error(what), residual_(residual), iterations_(iterations) {}
    double residual() const { return residual_; }
    std::size_t iterations() const { return iterations_; }

private:
    double residual_;
    std::size_t iterations_;
};

struct SolveInfo {
    std::size_t iterations = 0;
    double relative_residual = 0.0;
};

/// Jacobi-preconditioned conjugate gradients for SPD `S`. `x` holds the
/// initial guess on entry (resized to zero if empty) and the solution on
/// return. Stops at ||b - S x|| <= tolerance ||b||; throws SolverError when
/// max_iterations is exhausted (0 means 10 n).
SolveInfo solve_linear_system(const CsrMatrix& S, const std::vector<double>& b, std::vector<double>& x,
                              double tolerance = 1e-10, std::size_t max_iterations = 0);

/// Dense Cholesky solve used as a test oracle. Limited to 400 unknowns.
std::vector<double> dense_cholesky_solve(const CsrMatrix& S, const std::vector<double>& b);

/// M + dt A.
CsrMatrix shifted_system(const TpfaOperator& op, double dt);

/// Cell means of u0 by a degree-10 exact triangle rule on the fan of each cell
/// around its centroid. Throws std::invalid_argument on non-finite samples.
CellField project_initial(const std::function<double(double, double)>& u0, MeshPtr mesh);

/// Same rule, integrating u0^2 over the whole domain.
double l2_norm_squared(const std::function<double(double, double)>& u0, const Mesh& mesh);

/// Advances (M + dt A) u^{n+1} = M (u^n + g(u^n) dW), reusing the shifted matrix.
class SemiImplicitStepper {
public:
    SemiImplicitStepper(const TpfaOperator& op, const SchemeConfig& config);

    /// Overwrites `next`; `next` also serves as the initial CG guess when sized.
    SolveInfo step(const std::vector<double>& current, const NoiseModel& model, double dW,
                   std::vector<double>& next) const;
    CellField step(const CellField& current, const NoiseModel& model, double dW) const;

    const TpfaOperator& op() const { return *op_; }
    const SchemeConfig& config() const { return config_; }

private:
    const TpfaOperator* op_;
    SchemeConfig config_;
    CsrMatrix system_;
};

CellField step(const TpfaOperator& op, const CellField& u, const NoiseModel& model, double dW,
               const SchemeConfig& config);

/// Requires path.N == config.N and path.T == config.T.
SpaceTimeField solve_trajectory(const TpfaOperator& op, const SchemeConfig& config, const NoiseModel& model,
                                const BrownianPath& path, const CellField& u0);

enum class ItoConvention { Running, Left };

/// Snapshot n holds sum_{k<n} g(u^k) dW_{k+1}. Both conventions share these
/// grid values: Left is read through the left reconstruction, Running through
/// the affine one.
SpaceTimeField ito_partial_sums(const NoiseModel& model, const SpaceTimeField& trajectory, const BrownianPath& path,
                                ItoConvention convention = ItoConvention::Running);

TimeMode reconstruction_for(ItoConvention convention);

/// Matrix Market coordinate format, symmetric lower triangle.
void write_matrix_market(std::ostream& os, const CsrMatrix& A);

}  // namespace stochfv
