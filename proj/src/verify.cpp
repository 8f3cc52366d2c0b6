#include "stochfv/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "stochfv/rng.hpp"

namespace stochfv {

namespace {

std::string format_summary(const std::string& what, double worst, double tol) {
    std::ostringstream os;
    os.precision(3);
    os << what << ": worst " << worst << " (tolerance " << tol << ")";
    return os.str();
}

}  // namespace

const char* to_string(VerifyFault fault) {
    switch (fault) {
        case VerifyFault::None: return "none";
        case VerifyFault::Gradient: return "gradient";
        case VerifyFault::PartialIntegration: return "partial_integration";
        case VerifyFault::MassBalance: return "mass_balance";
        case VerifyFault::Spd: return "spd";
        case VerifyFault::Dense: return "dense";
    }
    return "?";
}

VerifyFault parse_verify_fault(const std::string& name) {
    for (auto f : {VerifyFault::None, VerifyFault::Gradient, VerifyFault::PartialIntegration, VerifyFault::MassBalance,
                   VerifyFault::Spd, VerifyFault::Dense}) {
        if (name == to_string(f)) return f;
    }
    throw std::invalid_argument("unknown verify fault '" + name + "'");
}

CellField random_field(const MeshPtr& mesh, std::uint64_t seed, std::uint64_t stream) {
    std::vector<double> values(mesh->num_cells());
    for (std::size_t k = 0; k < values.size(); ++k) values[k] = 2.0 * uniform01(seed, stream, k) - 1.0;
    return CellField(mesh, std::move(values));
}

CheckReport gradient_identity_check(const MeshPtr& mesh, std::size_t count, std::uint64_t seed, double rel_tol,
                                    VerifyFault fault) {
    CheckReport report;
    report.name = "gradient_identity";
    report.columns = {"field", "gradient_sq", "two_h1_sq", "relative_error"};
    double worst = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const CellField w = random_field(mesh, derive_seed(seed, i), 0);
        double g = gradient_l2_norm_squared(w);
        if (fault == VerifyFault::Gradient) g *= 1.0 + 1e-6;
        const double h = 2.0 * h1_seminorm_squared(w);
        const double err = std::abs(g - h) / std::max(h, std::numeric_limits<double>::min());
        worst = std::max(worst, std::isfinite(err) ? err : INFINITY);
        report.rows.push_back({static_cast<double>(i), g, h, err});
    }
    report.passed = count > 0 && worst <= rel_tol;
    report.metrics["worst_relative_error"] = worst;
    report.summary = format_summary("||grad w||^2 vs 2|w|_1h^2", worst, rel_tol);
    return report;
}

CheckReport partial_integration_check(const MeshPtr& mesh, std::size_t count, std::uint64_t seed, double rel_tol,
                                      VerifyFault fault) {
    CheckReport report;
    report.name = "partial_integration";
    report.columns = {"pair", "residual", "scale", "relative_residual"};
    double worst = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const std::uint64_t key = derive_seed(seed, i);
        const CellField w = random_field(mesh, key, 1);
        const CellField v = random_field(mesh, key, 2);
        double scale = 0.0;
        for (const auto& e : mesh->interior_edges) {
            scale += e.transmissibility() * std::abs(w[e.k] - w[e.l]) * std::abs(v[e.k] - v[e.l]);
        }
        double r = discrete_partial_integration_residual(w, v);
        if (fault == VerifyFault::PartialIntegration) r += 1e-6 * scale;
        const double rel = scale > 0.0 ? std::abs(r) / scale : std::abs(r);
        worst = std::max(worst, rel);
        report.rows.push_back({static_cast<double>(i), r, scale, rel});
    }
    report.passed = count > 0 && worst <= rel_tol;
    report.metrics["worst_relative_residual"] = worst;
    report.summary = format_summary("partial integration residual", worst, rel_tol);
    return report;
}

CheckReport mass_balance_check(const TpfaOperator& op, const SchemeConfig& config, const NoiseModel& model,
                               const CellField& u0, const BrownianPath& path, double rel_tol, VerifyFault fault) {
    SpaceTimeField u = solve_trajectory(op, config, model, path, u0);
    if (fault == VerifyFault::MassBalance) {
        CellField& mid = u[(u.N() + 1) / 2];
        mid[0] += 1e-6 * (1.0 + std::abs(mid[0]));
    }
    CheckReport report;
    report.name = "mass_balance";
    report.columns = {"step", "defect", "scale", "relative_defect"};
    const auto& m = op.mass;
    double worst = 0.0;
    for (std::size_t n = 0; n < u.N(); ++n) {
        const double dW = path.increments[n];
        double defect = 0.0, scale = 0.0;
        for (std::size_t k = 0; k < m.size(); ++k) {
            const double gdw = model(u[n][k]) * dW;
            defect += m[k] * (u[n + 1][k] - u[n][k] - gdw);
            scale += m[k] * (std::abs(u[n + 1][k]) + std::abs(u[n][k]) + std::abs(gdw));
        }
        const double rel = scale > 0.0 ? std::abs(defect) / scale : std::abs(defect);
        worst = std::max(worst, rel);
        report.rows.push_back({static_cast<double>(n + 1), defect, scale, rel});
    }
    report.passed = worst <= rel_tol;
    report.metrics["worst_relative_defect"] = worst;
    report.summary = format_summary("per-step mass defect", worst, rel_tol);
    return report;
}

CheckReport operator_spd_check(const TpfaOperator& op, double dt, VerifyFault fault) {
    CsrMatrix A = op.A;
    if (fault == VerifyFault::Spd) {
        // Flip the sign of the first off-diagonal entry.
        for (std::size_t i = A.row_ptr[0]; i < A.row_ptr[1]; ++i) {
            if (A.col[i] != 0) {
                A.val[i] = -A.val[i];
                break;
            }
        }
    }
    CsrMatrix S = A;
    for (std::size_t i = 0; i < S.n; ++i) {
        for (std::size_t p = S.row_ptr[i]; p < S.row_ptr[i + 1]; ++p) {
            S.val[p] *= dt;
            if (S.col[p] == i) S.val[p] += op.mass[i];
        }
    }
    CheckReport report;
    report.name = "operator_spd";
    report.columns = {"row", "asymmetry", "max_offdiag", "row_sum", "dominance_margin"};
    bool ok = A.n == op.mesh->num_cells();
    double worst_asym = 0.0, worst_rowsum = 0.0, worst_offdiag = -INFINITY, min_margin = INFINITY;
    for (std::size_t i = 0; i < A.n; ++i) {
        double asym = 0.0, offdiag = -INFINITY, row_sum = 0.0, abs_sum = 0.0, s_off = 0.0, s_diag = 0.0;
        for (std::size_t p = A.row_ptr[i]; p < A.row_ptr[i + 1]; ++p) {
            const std::size_t j = A.col[p];
            row_sum += A.val[p];
            abs_sum += std::abs(A.val[p]);
            if (j != i) {
                offdiag = std::max(offdiag, A.val[p]);
                asym = std::max(asym, std::abs(A.val[p] - A.at(j, i)));
            }
        }
        for (std::size_t p = S.row_ptr[i]; p < S.row_ptr[i + 1]; ++p) {
            if (S.col[p] == i) {
                s_diag = S.val[p];
            } else {
                s_off += std::abs(S.val[p]);
                asym = std::max(asym, std::abs(S.val[p] - S.at(S.col[p], i)) / (dt > 0.0 ? dt : 1.0));
            }
        }
        const double scale = std::max(abs_sum, std::numeric_limits<double>::min());
        const double margin = (s_diag - s_off) / std::max(s_diag, std::numeric_limits<double>::min());
        worst_asym = std::max(worst_asym, asym / scale);
        worst_rowsum = std::max(worst_rowsum, std::abs(row_sum) / scale);
        worst_offdiag = std::max(worst_offdiag, offdiag);
        min_margin = std::min(min_margin, margin);
        report.rows.push_back({static_cast<double>(i), asym, offdiag, row_sum, margin});
    }
    ok = ok && worst_asym <= 1e-14 && worst_rowsum <= 1e-12 && !(worst_offdiag > 0.0) && min_margin > 0.0;
    report.passed = ok;
    report.metrics["worst_asymmetry"] = worst_asym;
    report.metrics["worst_row_sum"] = worst_rowsum;
    report.metrics["max_offdiag"] = worst_offdiag;
    report.metrics["min_dominance_margin"] = min_margin;
    std::ostringstream os;
    os.precision(3);
    os << "asymmetry " << worst_asym << ", row sum " << worst_rowsum << ", max off-diagonal " << worst_offdiag
       << ", dominance margin " << min_margin;
    report.summary = os.str();
    return report;
}

CheckReport dense_oracle_check(const TpfaOperator& op, double dt, std::size_t count, std::uint64_t seed, double tol,
                               double cg_tolerance, VerifyFault fault) {
    CheckReport report;
    report.name = "dense_oracle";
    report.columns = {"rhs", "cg_iterations", "max_abs_diff", "scale"};
    const std::size_t n = op.mesh->num_cells();
    if (n > 400) {
        report.passed = true;
        report.summary = "skipped: " + std::to_string(n) + " cells exceed the dense oracle limit of 400";
        return report;
    }
    const CsrMatrix S = shifted_system(op, dt);
    double worst = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const CellField r = random_field(op.mesh, derive_seed(seed, i), 3);
        std::vector<double> b(r.values().begin(), r.values().end());
        std::vector<double> x;
        const SolveInfo info = solve_linear_system(S, b, x, cg_tolerance);
        if (fault == VerifyFault::Dense) b[0] += 1e-3;
        const std::vector<double> y = dense_cholesky_solve(S, b);
        double diff = 0.0, scale = 1.0;
        for (std::size_t k = 0; k < n; ++k) {
            diff = std::max(diff, std::abs(x[k] - y[k]));
            scale = std::max(scale, std::abs(y[k]));
        }
        worst = std::max(worst, diff / scale);
        report.rows.push_back({static_cast<double>(i), static_cast<double>(info.iterations), diff, scale});
    }
    report.passed = count > 0 && worst <= tol;
    report.metrics["worst_scaled_difference"] = worst;
    report.summary = format_summary("CG vs dense Cholesky", worst, tol);
    return report;
}

}  // namespace stochfv
