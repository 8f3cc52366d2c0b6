#include "stochfv/solver.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>

#include "stochfv/quadrature.hpp"

namespace stochfv {

void CsrMatrix::multiply(const std::vector<double>& x, std::vector<double>& y) const {
    y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p) s += val[p] * x[col[p]];
        y[i] = s;
    }
}

double CsrMatrix::at(std::size_t i, std::size_t j) const {
    const auto first = col.begin() + static_cast<std::ptrdiff_t>(row_ptr[i]);
    const auto last = col.begin() + static_cast<std::ptrdiff_t>(row_ptr[i + 1]);
    const auto it = std::lower_bound(first, last, j);
    return (it != last && *it == j) ? val[static_cast<std::size_t>(it - col.begin())] : 0.0;
}

std::vector<double> CsrMatrix::diagonal() const {
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = at(i, i);
    return d;
}

TpfaOperator assemble(MeshPtr mesh) {
    if (!mesh) throw std::invalid_argument("assemble: null mesh");
    const auto report = validate_admissibility(*mesh);
    if (!report.empty()) {
        throw std::invalid_argument("assemble: inadmissible mesh (" + std::to_string(report.size()) +
                                    " violations, first: " + report.front().message + ")");
    }
    const std::size_t n = mesh->num_cells();
    std::vector<std::map<std::size_t, double>> rows(n);
    for (std::size_t k = 0; k < n; ++k) rows[k][k] = 0.0;
    for (const auto& e : mesh->interior_edges) {
        const double tau = e.transmissibility();
        rows[e.k][e.k] += tau;
        rows[e.l][e.l] += tau;
        rows[e.k][e.l] -= tau;
        rows[e.l][e.k] -= tau;
    }
    TpfaOperator op;
    op.mesh = mesh;
    op.A.n = n;
    for (const auto& row : rows) {
        for (const auto& [j, v] : row) {
            op.A.col.push_back(j);
            op.A.val.push_back(v);
        }
        op.A.row_ptr.push_back(op.A.col.size());
    }
    op.mass.resize(n);
    for (std::size_t k = 0; k < n; ++k) op.mass[k] = mesh->cells[k].area;
    return op;
}

void SchemeConfig::validate() const {
    if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("SchemeConfig: T must be positive");
    if (N == 0) throw std::invalid_argument("SchemeConfig: N must be positive");
    if (!(tolerance > 0.0 && tolerance <= 1e-4)) throw std::invalid_argument("SchemeConfig: tolerance must lie in (0, 1e-4]");
}

SolveInfo solve_linear_system(const CsrMatrix& S, const std::vector<double>& b, std::vector<double>& x,
                              double tolerance, std::size_t max_iterations) {
    const std::size_t n = S.n;
    if (b.size() != n) throw std::invalid_argument("solve_linear_system: rhs size mismatch");
    if (x.size() != n) x.assign(n, 0.0);
    if (max_iterations == 0) max_iterations = 10 * std::max<std::size_t>(n, 1);

    const auto diag = S.diagonal();
    for (double d : diag) {
        if (!(d > 0.0)) throw std::invalid_argument("solve_linear_system: matrix has a non-positive diagonal");
    }
    const double bnorm = std::sqrt(std::inner_product(b.begin(), b.end(), b.begin(), 0.0));
    if (bnorm == 0.0) {
        x.assign(n, 0.0);
        return {0, 0.0};
    }

    std::vector<double> r(n), z(n), p(n), q(n);
    SolveInfo info;
    // The recursive residual can drift below the true one near round-off, so
    // every cycle ends with the true residual and restarts from it if needed.
    for (int cycle = 0; cycle < 4; ++cycle) {
        S.multiply(x, q);
        for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
        double rnorm = std::sqrt(std::inner_product(r.begin(), r.end(), r.begin(), 0.0));
        info.relative_residual = rnorm / bnorm;
        if (info.relative_residual <= tolerance || info.iterations >= max_iterations) break;

        for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag[i];
        p = z;
        double rz = std::inner_product(r.begin(), r.end(), z.begin(), 0.0);
        while (info.iterations < max_iterations) {
            S.multiply(p, q);
            const double alpha = rz / std::inner_product(p.begin(), p.end(), q.begin(), 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                x[i] += alpha * p[i];
                r[i] -= alpha * q[i];
            }
            ++info.iterations;
            rnorm = std::sqrt(std::inner_product(r.begin(), r.end(), r.begin(), 0.0));
            if (rnorm / bnorm <= tolerance) break;
            for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag[i];
            const double rz_new = std::inner_product(r.begin(), r.end(), z.begin(), 0.0);
            const double beta = rz_new / rz;
            rz = rz_new;
            for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        }
    }
    if (!(info.relative_residual <= tolerance)) {
        throw SolverError("conjugate gradients did not converge: relative residual " +
                              std::to_string(info.relative_residual) + " after " + std::to_string(info.iterations) +
                              " iterations",
                          info.relative_residual, info.iterations);
    }
    return info;
}

std::vector<double> dense_cholesky_solve(const CsrMatrix& S, const std::vector<double>& b) {
    const std::size_t n = S.n;
    if (n > 400) throw std::invalid_argument("dense_cholesky_solve: limited to 400 unknowns");
    if (b.size() != n) throw std::invalid_argument("dense_cholesky_solve: rhs size mismatch");
    std::vector<double> L(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t p = S.row_ptr[i]; p < S.row_ptr[i + 1]; ++p) L[i * n + S.col[p]] = S.val[p];
    }
    for (std::size_t j = 0; j < n; ++j) {
        double d = L[j * n + j];
        for (std::size_t k = 0; k < j; ++k) d -= L[j * n + k] * L[j * n + k];
        if (!(d > 0.0)) throw std::invalid_argument("dense_cholesky_solve: matrix is not positive definite");
        d = std::sqrt(d);
        L[j * n + j] = d;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = L[i * n + j];
            for (std::size_t k = 0; k < j; ++k) s -= L[i * n + k] * L[j * n + k];
            L[i * n + j] = s / d;
        }
    }
    std::vector<double> y(b);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < i; ++k) y[i] -= L[i * n + k] * y[k];
        y[i] /= L[i * n + i];
    }
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t k = i + 1; k < n; ++k) y[i] -= L[k * n + i] * y[k];
        y[i] /= L[i * n + i];
    }
    return y;
}

CsrMatrix shifted_system(const TpfaOperator& op, double dt) {
    CsrMatrix S = op.A;
    for (std::size_t i = 0; i < S.n; ++i) {
        for (std::size_t p = S.row_ptr[i]; p < S.row_ptr[i + 1]; ++p) {
            S.val[p] *= dt;
            if (S.col[p] == i) S.val[p] += op.mass[i];
        }
    }
    return S;
}

namespace {

constexpr unsigned kProjectionOrder = 6;

// Calls f(x, y, weight) over a fan triangulation of the cell around its centroid.
template <class F>
void for_each_cell_node(const Mesh& mesh, std::size_t k, F&& f) {
    const auto poly = mesh.cell_polygon(k);
    const Vec2 c = centroid(poly);
    const auto& rule = triangle_rule(kProjectionOrder);
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[(i + 1) % poly.size()];
        const double area = 0.5 * cross(a - c, b - c);
        for (std::size_t q = 0; q < rule.weights.size(); ++q) {
            const Vec2 p = c + (a - c) * rule.barycentric[q].x + (b - c) * rule.barycentric[q].y;
            f(p.x, p.y, area * rule.weights[q]);
        }
    }
}

}  // namespace

CellField project_initial(const std::function<double(double, double)>& u0, MeshPtr mesh) {
    if (!mesh) throw std::invalid_argument("project_initial: null mesh");
    std::vector<double> values(mesh->num_cells());
    for (std::size_t k = 0; k < values.size(); ++k) {
        double integral = 0.0;
        double area = 0.0;
        for_each_cell_node(*mesh, k, [&](double x, double y, double w) {
            const double v = u0(x, y);
            if (!std::isfinite(v)) {
                throw std::invalid_argument("project_initial: non-finite initial value in cell " + std::to_string(k));
            }
            integral += w * v;
            area += w;
        });
        values[k] = integral / area;
    }
    return CellField(std::move(mesh), std::move(values));
}

double l2_norm_squared(const std::function<double(double, double)>& u0, const Mesh& mesh) {
    double s = 0.0;
    for (std::size_t k = 0; k < mesh.num_cells(); ++k) {
        for_each_cell_node(mesh, k, [&](double x, double y, double w) {
            const double v = u0(x, y);
            s += w * v * v;
        });
    }
    return s;
}

SemiImplicitStepper::SemiImplicitStepper(const TpfaOperator& op, const SchemeConfig& config)
    : op_(&op), config_(config), system_(shifted_system(op, config.dt())) {
    config_.validate();
}

SolveInfo SemiImplicitStepper::step(const std::vector<double>& current, const NoiseModel& model, double dW,
                                    std::vector<double>& next) const {
    const std::size_t n = system_.n;
    if (current.size() != n) throw std::invalid_argument("step: field size does not match the operator");
    if (!std::isfinite(dW)) throw std::invalid_argument("step: non-finite Brownian increment");
    std::vector<double> rhs(n);
    for (std::size_t k = 0; k < n; ++k) rhs[k] = op_->mass[k] * (current[k] + model(current[k]) * dW);
    if (next.size() != n) next = current;
    SolveInfo info = solve_linear_system(system_, rhs, next, config_.tolerance, config_.max_iterations);

    // S 1 = M 1, so shifting by a constant removes the residual's component
    // along the constants and restores discrete mass balance to rounding.
    std::vector<double> Sx;
    system_.multiply(next, Sx);
    double defect = 0.0;
    double total_mass = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        defect += rhs[k] - Sx[k];
        total_mass += op_->mass[k];
    }
    const double shift = defect / total_mass;
    for (auto& v : next) v += shift;
    return info;
}

CellField SemiImplicitStepper::step(const CellField& current, const NoiseModel& model, double dW) const {
    if (current.mesh_ptr() != op_->mesh) throw std::invalid_argument("step: field on a different mesh");
    std::vector<double> next;
    const std::vector<double> cur(current.values().begin(), current.values().end());
    step(cur, model, dW, next);
    return CellField(op_->mesh, std::move(next));
}

CellField step(const TpfaOperator& op, const CellField& u, const NoiseModel& model, double dW,
               const SchemeConfig& config) {
    return SemiImplicitStepper(op, config).step(u, model, dW);
}

SpaceTimeField solve_trajectory(const TpfaOperator& op, const SchemeConfig& config, const NoiseModel& model,
                                const BrownianPath& path, const CellField& u0) {
    config.validate();
    if (path.N != config.N || path.T != config.T) {
        throw std::invalid_argument("solve_trajectory: path grid (N=" + std::to_string(path.N) +
                                    ") does not match the scheme grid (N=" + std::to_string(config.N) + ")");
    }
    if (u0.mesh_ptr() != op.mesh) throw std::invalid_argument("solve_trajectory: initial field on a different mesh");
    const SemiImplicitStepper stepper(op, config);
    std::vector<CellField> snapshots;
    snapshots.reserve(config.N + 1);
    snapshots.push_back(u0);
    std::vector<double> cur(u0.values().begin(), u0.values().end());
    std::vector<double> next;
    for (std::size_t n = 0; n < config.N; ++n) {
        next = cur;
        stepper.step(cur, model, path.increments[n], next);
        snapshots.emplace_back(op.mesh, next);
        std::swap(cur, next);
    }
    return SpaceTimeField(op.mesh, config.T, config.N, std::move(snapshots));
}

SpaceTimeField ito_partial_sums(const NoiseModel& model, const SpaceTimeField& trajectory, const BrownianPath& path,
                                ItoConvention /*convention*/) {
    if (path.N != trajectory.N() || path.T != trajectory.T()) {
        throw std::invalid_argument("ito_partial_sums: path and trajectory grids differ");
    }
    const std::size_t n_cells = trajectory.mesh().num_cells();
    std::vector<CellField> snapshots;
    snapshots.reserve(path.N + 1);
    std::vector<double> acc(n_cells, 0.0);
    snapshots.emplace_back(trajectory.mesh_ptr(), acc);
    for (std::size_t n = 0; n < path.N; ++n) {
        const CellField& u = trajectory[n];
        for (std::size_t k = 0; k < n_cells; ++k) acc[k] += model(u[k]) * path.increments[n];
        snapshots.emplace_back(trajectory.mesh_ptr(), acc);
    }
    return SpaceTimeField(trajectory.mesh_ptr(), trajectory.T(), trajectory.N(), std::move(snapshots));
}

TimeMode reconstruction_for(ItoConvention convention) {
    return convention == ItoConvention::Left ? TimeMode::Left : TimeMode::Affine;
}

void write_matrix_market(std::ostream& os, const CsrMatrix& A) {
    std::size_t nnz = 0;
    for (std::size_t i = 0; i < A.n; ++i) {
        for (std::size_t p = A.row_ptr[i]; p < A.row_ptr[i + 1]; ++p) nnz += A.col[p] <= i;
    }
    const auto old = os.precision(17);
    os << "%%MatrixMarket matrix coordinate real symmetric\n" << A.n << ' ' << A.n << ' ' << nnz << '\n';
    for (std::size_t i = 0; i < A.n; ++i) {
        for (std::size_t p = A.row_ptr[i]; p < A.row_ptr[i + 1]; ++p) {
            if (A.col[p] <= i) os << i + 1 << ' ' << A.col[p] + 1 << ' ' << A.val[p] << '\n';
        }
    }
    os.precision(old);
}

}  // namespace stochfv
