#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "stochfv/mesh.hpp"

namespace stochfv {

/// Piecewise constant function on a mesh: one value per control volume.
class CellField {
public:
    CellField() = default;
    /// Constant field.
    explicit CellField(MeshPtr mesh, double value = 0.0);
    /// Throws std::invalid_argument on a size mismatch or non-finite values.
    CellField(MeshPtr mesh, std::vector<double> values);

    const Mesh& mesh() const { return *mesh_; }
    const MeshPtr& mesh_ptr() const { return mesh_; }

    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t k) const { return values_[k]; }
    double& operator[](std::size_t k) { return values_[k]; }

    std::span<const double> values() const { return values_; }
    std::vector<double>& data() { return values_; }

    bool all_finite() const;

private:
    MeshPtr mesh_;
    std::vector<double> values_;
};

/// Throws std::invalid_argument unless both fields live on the same mesh object.
void require_same_mesh(const CellField& a, const CellField& b, const char* where);

/// Snapshots u^0..u^N on the uniform grid t_n = n T / N.
class SpaceTimeField {
public:
    SpaceTimeField() = default;
    /// `snapshots` must hold N + 1 fields on `mesh`.
    SpaceTimeField(MeshPtr mesh, double T, std::size_t N, std::vector<CellField> snapshots);

    const Mesh& mesh() const { return *mesh_; }
    const MeshPtr& mesh_ptr() const { return mesh_; }
    double T() const { return T_; }
    std::size_t N() const { return N_; }
    double dt() const { return T_ / static_cast<double>(N_); }
    double time(std::size_t n) const { return T_ * static_cast<double>(n) / static_cast<double>(N_); }

    const CellField& operator[](std::size_t n) const { return snapshots_[n]; }
    CellField& operator[](std::size_t n) { return snapshots_[n]; }
    const std::vector<CellField>& snapshots() const { return snapshots_; }

    /// Index n of the interval [t_n, t_{n+1}) containing t, clamped to N - 1 at t = T.
    std::size_t interval(double t) const;

private:
    MeshPtr mesh_;
    double T_ = 0.0;
    std::size_t N_ = 0;
    std::vector<CellField> snapshots_;
};

enum class TimeMode { Left, Right, Affine };

const char* to_string(TimeMode mode);

double l2_norm_squared(const CellField& w);
double l2_norm(const CellField& w);
/// (w, v) = sum_K m_K w_K v_K.
double l2_inner(const CellField& w, const CellField& v);
/// ||w - v||^2 without allocating.
double l2_distance_squared(const CellField& w, const CellField& v);

/// One vector per edge id: 2 (w_L - w_K) / d_{K|L} n_KL on interior edges, zero on boundary edges.
std::vector<Vec2> discrete_gradient(const CellField& w);

/// sum over interior edges of m_{D_sigma} |grad_sigma w|^2.
double gradient_l2_norm_squared(const CellField& w);

double h1_seminorm_squared(const CellField& w);
double h1_seminorm(const CellField& w);

/// LHS minus RHS of the discrete partial integration identity:
///   sum_K sum_{sigma in E_K, interior} tau_sigma (w_K - w_L) v_K
///     - sum_sigma tau_sigma (w_K - w_L)(v_K - v_L).
double discrete_partial_integration_residual(const CellField& w, const CellField& v);

/// Value of the reconstruction at time t in [0, T].
CellField reconstruct(const SpaceTimeField& field, TimeMode mode, double t);

/// Precomputed pair weights I_KL = int_K int_L |x - y|^{-2 - 2 alpha} dy dx for one mesh.
///
/// The area integrals are reduced to boundary integrals (the kernel is a
/// Laplacian in x of |x - y|^{-2 alpha} / (4 alpha^2)):
///   I_KL = -1/(4 alpha^2) sum_{e in dK, f in dL} (n_e . n_f) int_e int_f |x - y|^{-2 alpha},
/// with the edge-pair integrals in closed form for coincident edges, by a
/// Duffy split at shared endpoints and by adaptive Gauss-Legendre otherwise.
class GagliardoSpaceKernel {
public:
    GagliardoSpaceKernel(MeshPtr mesh, double alpha);

    double alpha() const { return alpha_; }
    const Mesh& mesh() const { return *mesh_; }
    /// I_KL for K != L.
    double pair_weight(std::size_t k, std::size_t l) const;
    /// sum over ordered pairs K != L of |w_K - w_L|^2 I_KL.
    double seminorm_squared(std::span<const double> values) const;
    double seminorm_squared(const CellField& w) const;

private:
    MeshPtr mesh_;
    double alpha_;
    std::vector<double> weights_;  // packed upper triangle, K < L
};

/// Integral of |x - y|^{-2 alpha} over the segment pair [a0,a1] x [b0,b1].
/// Exposed for testing.
double segment_pair_integral(const Vec2& a0, const Vec2& a1, const Vec2& b0, const Vec2& b1, double alpha);

/// Squared W^{alpha,2} seminorm of a piecewise constant field, alpha in (0, 1/2).
double gagliardo_space_seminorm(const CellField& w, double alpha);

/// int_a^b int_c^d |t - s|^{-1 - 2 alpha} dt ds for b <= c.
double time_kernel_integral(double a, double b, double c, double d, double alpha);

/// Squared W^{alpha,2}(0, T; L^2) seminorm of the left reconstruction, exact in time.
double gagliardo_time_seminorm(const SpaceTimeField& field, double alpha, TimeMode mode = TimeMode::Left);

/// CSV rows "cell,x,y,value" with 17 significant digits.
void write_csv(std::ostream& os, const CellField& w);
/// CSV rows "step,t,cell,x,y,value".
void write_csv(std::ostream& os, const SpaceTimeField& field);
/// Mesh plus CELL_DATA scalar `name`.
void write_vtk(std::ostream& os, const CellField& w, const std::string& name = "u");

}  // namespace stochfv
