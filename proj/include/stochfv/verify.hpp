#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "stochfv/analysis.hpp"

namespace stochfv {

/// Deliberate defect injected into one invariant check, so the failure path
/// of the verification suite can itself be exercised.
enum class VerifyFault { None, Gradient, PartialIntegration, MassBalance, Spd, Dense };

const char* to_string(VerifyFault fault);
/// Accepts "none", "gradient", "partial_integration", "mass_balance", "spd", "dense".
VerifyFault parse_verify_fault(const std::string& name);

/// Random cell field with values uniform in [-1, 1).
CellField random_field(const MeshPtr& mesh, std::uint64_t seed, std::uint64_t stream);

/// ||grad^h w||^2 = 2 |w|_{1,h}^2 to `rel_tol` on `count` random fields.
CheckReport gradient_identity_check(const MeshPtr& mesh, std::size_t count, std::uint64_t seed,
                                    double rel_tol = 1e-12, VerifyFault fault = VerifyFault::None);

/// Partial integration residual over sum_sigma tau |w_K - w_L| |v_K - v_L| on
/// `count` random pairs, at most `rel_tol`.
CheckReport partial_integration_check(const MeshPtr& mesh, std::size_t count, std::uint64_t seed,
                                      double rel_tol = 1e-12, VerifyFault fault = VerifyFault::None);

/// Per step: |sum_K m_K (u^{n+1}_K - u^n_K - g(u^n_K) dW)| relative to
/// sum_K m_K (|u^{n+1}_K| + |u^n_K| + |g(u^n_K) dW|), at most `rel_tol`.
CheckReport mass_balance_check(const TpfaOperator& op, const SchemeConfig& config, const NoiseModel& model,
                               const CellField& u0, const BrownianPath& path, double rel_tol = 1e-10,
                               VerifyFault fault = VerifyFault::None);

/// A symmetric with non-positive off-diagonals and zero row sums, and
/// M + dt A symmetric with positive diagonal and strict diagonal dominance
/// (hence SPD).
CheckReport operator_spd_check(const TpfaOperator& op, double dt, VerifyFault fault = VerifyFault::None);

/// CG against dense Cholesky on `count` random right-hand sides:
/// ||x_cg - x_dense||_inf <= tol max(1, ||x_dense||_inf). Meshes above 400
/// cells are reported as skipped (and pass).
CheckReport dense_oracle_check(const TpfaOperator& op, double dt, std::size_t count, std::uint64_t seed,
                               double tol = 1e-8, double cg_tolerance = 1e-12,
                               VerifyFault fault = VerifyFault::None);

}  // namespace stochfv
