#include "stochfv/field.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>

#include "stochfv/quadrature.hpp"

namespace stochfv {

CellField::CellField(MeshPtr mesh, double value) : mesh_(std::move(mesh)) {
    if (!mesh_) throw std::invalid_argument("CellField: null mesh");
    if (!std::isfinite(value)) throw std::invalid_argument("CellField: non-finite value");
    values_.assign(mesh_->num_cells(), value);
}

CellField::CellField(MeshPtr mesh, std::vector<double> values) : mesh_(std::move(mesh)), values_(std::move(values)) {
    if (!mesh_) throw std::invalid_argument("CellField: null mesh");
    if (values_.size() != mesh_->num_cells()) {
        throw std::invalid_argument("CellField: " + std::to_string(values_.size()) + " values for " +
                                    std::to_string(mesh_->num_cells()) + " cells");
    }
    if (!all_finite()) throw std::invalid_argument("CellField: non-finite value");
}

bool CellField::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

void require_same_mesh(const CellField& a, const CellField& b, const char* where) {
    if (a.mesh_ptr() != b.mesh_ptr()) throw std::invalid_argument(std::string(where) + ": fields live on different meshes");
}

SpaceTimeField::SpaceTimeField(MeshPtr mesh, double T, std::size_t N, std::vector<CellField> snapshots)
    : mesh_(std::move(mesh)), T_(T), N_(N), snapshots_(std::move(snapshots)) {
    if (!mesh_) throw std::invalid_argument("SpaceTimeField: null mesh");
    if (!(T_ > 0.0) || N_ == 0) throw std::invalid_argument("SpaceTimeField: need T > 0 and N >= 1");
    if (snapshots_.size() != N_ + 1) throw std::invalid_argument("SpaceTimeField: expected N + 1 snapshots");
    for (const auto& s : snapshots_) {
        if (s.mesh_ptr() != mesh_) throw std::invalid_argument("SpaceTimeField: snapshot on a different mesh");
    }
}

std::size_t SpaceTimeField::interval(double t) const {
    if (!(t >= 0.0 && t <= T_)) throw std::invalid_argument("time " + std::to_string(t) + " outside [0, T]");
    auto n = static_cast<std::size_t>(std::floor(t / T_ * static_cast<double>(N_)));
    n = std::min(n, N_ - 1);
    // Repair rounding so that t_n <= t < t_{n+1} with the same t_n formula as time().
    while (n > 0 && time(n) > t) --n;
    while (n + 1 < N_ && time(n + 1) <= t) ++n;
    return n;
}

const char* to_string(TimeMode mode) {
    switch (mode) {
        case TimeMode::Left: return "left";
        case TimeMode::Right: return "right";
        case TimeMode::Affine: return "affine";
    }
    return "unknown";
}

double l2_norm_squared(const CellField& w) {
    const auto& cells = w.mesh().cells;
    double s = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) s += cells[k].area * w[k] * w[k];
    return s;
}

double l2_norm(const CellField& w) { return std::sqrt(l2_norm_squared(w)); }

double l2_inner(const CellField& w, const CellField& v) {
    require_same_mesh(w, v, "l2_inner");
    const auto& cells = w.mesh().cells;
    double s = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) s += cells[k].area * w[k] * v[k];
    return s;
}

double l2_distance_squared(const CellField& w, const CellField& v) {
    require_same_mesh(w, v, "l2_distance_squared");
    const auto& cells = w.mesh().cells;
    double s = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
        const double d = w[k] - v[k];
        s += cells[k].area * d * d;
    }
    return s;
}

std::vector<Vec2> discrete_gradient(const CellField& w) {
    const Mesh& mesh = w.mesh();
    std::vector<Vec2> grad(mesh.num_edges());
    for (std::size_t id = 0; id < mesh.interior_edges.size(); ++id) {
        const auto& e = mesh.interior_edges[id];
        grad[id] = e.normal * (2.0 * (w[e.l] - w[e.k]) / e.distance);
    }
    return grad;
}

double gradient_l2_norm_squared(const CellField& w) {
    const Mesh& mesh = w.mesh();
    const auto grad = discrete_gradient(w);
    double s = 0.0;
    for (std::size_t id = 0; id < mesh.interior_edges.size(); ++id) {
        s += mesh.interior_edges[id].diamond_area * dot(grad[id], grad[id]);
    }
    return s;
}

double h1_seminorm_squared(const CellField& w) {
    double s = 0.0;
    for (const auto& e : w.mesh().interior_edges) {
        const double d = w[e.k] - w[e.l];
        s += e.transmissibility() * d * d;
    }
    return s;
}

double h1_seminorm(const CellField& w) { return std::sqrt(h1_seminorm_squared(w)); }

double discrete_partial_integration_residual(const CellField& w, const CellField& v) {
    require_same_mesh(w, v, "discrete_partial_integration_residual");
    const Mesh& mesh = w.mesh();
    // Left side accumulated cell by cell, as written: each cell sees its own edges.
    std::vector<double> flux_out(mesh.num_cells(), 0.0);
    for (const auto& e : mesh.interior_edges) {
        const double tau = e.transmissibility();
        flux_out[e.k] += tau * (w[e.k] - w[e.l]);
        flux_out[e.l] += tau * (w[e.l] - w[e.k]);
    }
    double lhs = 0.0;
    for (std::size_t k = 0; k < mesh.num_cells(); ++k) lhs += flux_out[k] * v[k];
    double rhs = 0.0;
    for (const auto& e : mesh.interior_edges) {
        rhs += e.transmissibility() * (w[e.k] - w[e.l]) * (v[e.k] - v[e.l]);
    }
    return lhs - rhs;
}

CellField reconstruct(const SpaceTimeField& field, TimeMode mode, double t) {
    const std::size_t n = field.interval(t);
    switch (mode) {
        case TimeMode::Left: return field[n];
        case TimeMode::Right: return field[n + 1];
        case TimeMode::Affine: {
            const double theta = (t - field.time(n)) / field.dt();
            if (theta == 0.0) return field[n];
            if (theta == 1.0) return field[n + 1];
            std::vector<double> values(field.mesh().num_cells());
            for (std::size_t k = 0; k < values.size(); ++k) {
                values[k] = (1.0 - theta) * field[n][k] + theta * field[n + 1][k];
            }
            return CellField(field.mesh_ptr(), std::move(values));
        }
    }
    throw std::invalid_argument("reconstruct: unknown mode");
}

namespace {

void require_alpha(double alpha, const char* where) {
    if (!(alpha > 0.0 && alpha < 0.5)) throw std::invalid_argument(std::string(where) + ": alpha must lie in (0, 1/2)");
}

// int_0^1 (1 + k^2 u^2 - 2 k c u)^{-alpha} du
double duffy_line_integral(double k, double c, double alpha) {
    auto f = [&](double u) { return std::pow(std::max(1.0 + k * k * u * u - 2.0 * k * c * u, 0.0), -alpha); };
    return boost::math::quadrature::gauss_kronrod<double, 21>::integrate(f, 0.0, 1.0, 20, 1e-13);
}

double segment_distance(const Vec2& a0, const Vec2& a1, const Vec2& b0, const Vec2& b1) {
    return std::min({point_segment_distance(a0, b0, b1), point_segment_distance(a1, b0, b1),
                     point_segment_distance(b0, a0, a1), point_segment_distance(b1, a0, a1)});
}

double separated_pair_integral(const Vec2& a0, const Vec2& a1, const Vec2& b0, const Vec2& b1, double alpha,
                               int depth) {
    const double la = distance(a0, a1);
    const double lb = distance(b0, b1);
    const double gap = segment_distance(a0, a1, b0, b1);
    if (gap >= std::max(la, lb) || depth >= 40) {
        const auto& g = gauss_legendre(8);
        double s = 0.0;
        for (std::size_t i = 0; i < g.nodes.size(); ++i) {
            const Vec2 x = a0 + (a1 - a0) * g.nodes[i];
            for (std::size_t j = 0; j < g.nodes.size(); ++j) {
                const Vec2 y = b0 + (b1 - b0) * g.nodes[j];
                const Vec2 r = x - y;
                s += g.weights[i] * g.weights[j] * std::pow(dot(r, r), -alpha);
            }
        }
        return s * la * lb;
    }
    if (la >= lb) {
        const Vec2 m = 0.5 * (a0 + a1);
        return separated_pair_integral(a0, m, b0, b1, alpha, depth + 1) +
               separated_pair_integral(m, a1, b0, b1, alpha, depth + 1);
    }
    const Vec2 m = 0.5 * (b0 + b1);
    return separated_pair_integral(a0, a1, b0, m, alpha, depth + 1) +
           separated_pair_integral(a0, a1, m, b1, alpha, depth + 1);
}

}  // namespace

double segment_pair_integral(const Vec2& a0, const Vec2& a1, const Vec2& b0, const Vec2& b1, double alpha) {
    const double la = distance(a0, a1);
    const double lb = distance(b0, b1);
    if (la == 0.0 || lb == 0.0) return 0.0;
    if ((a0 == b0 && a1 == b1) || (a0 == b1 && a1 == b0)) {
        return 2.0 * std::pow(la, 2.0 - 2.0 * alpha) / ((1.0 - 2.0 * alpha) * (2.0 - 2.0 * alpha));
    }
    // Shared endpoint P: x = P + s d1, y = P + t d2, split the rectangle along t = k s.
    Vec2 p, qa, qb;
    bool shared = true;
    if (a0 == b0) {
        p = a0, qa = a1, qb = b1;
    } else if (a0 == b1) {
        p = a0, qa = a1, qb = b0;
    } else if (a1 == b0) {
        p = a1, qa = a0, qb = b1;
    } else if (a1 == b1) {
        p = a1, qa = a0, qb = b0;
    } else {
        shared = false;
    }
    if (shared) {
        const Vec2 d1 = qa - p;
        const Vec2 d2 = qb - p;
        const double c = std::clamp(dot(d1, d2) / (la * lb), -1.0, 1.0);
        const double k = lb / la;
        const double e = 2.0 - 2.0 * alpha;
        return k * std::pow(la, e) / e * duffy_line_integral(k, c, alpha) +
               std::pow(lb, e) / (k * e) * duffy_line_integral(1.0 / k, c, alpha);
    }
    return separated_pair_integral(a0, a1, b0, b1, alpha, 0);
}

GagliardoSpaceKernel::GagliardoSpaceKernel(MeshPtr mesh, double alpha) : mesh_(std::move(mesh)), alpha_(alpha) {
    require_alpha(alpha, "GagliardoSpaceKernel");
    if (!mesh_) throw std::invalid_argument("GagliardoSpaceKernel: null mesh");
    const Mesh& m = *mesh_;
    const std::size_t n = m.num_cells();
    if (n > 4096) throw std::invalid_argument("GagliardoSpaceKernel: mesh too large for the O(n^2) pair table");

    // Global edge ids with a reference orientation v0 -> v1.
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> edge_id;
    std::vector<std::pair<std::size_t, std::size_t>> edge_vertices;
    struct CellEdge {
        std::size_t id;
        double sign;
    };
    std::vector<std::vector<CellEdge>> cell_edges(n);
    for (std::size_t k = 0; k < n; ++k) {
        const auto& loop = m.cells[k].vertices;
        for (std::size_t i = 0; i < loop.size(); ++i) {
            const std::size_t a = loop[i];
            const std::size_t b = loop[(i + 1) % loop.size()];
            auto [it, inserted] = edge_id.emplace(std::make_pair(std::min(a, b), std::max(a, b)), edge_vertices.size());
            if (inserted) edge_vertices.push_back({a, b});
            cell_edges[k].push_back({it->second, edge_vertices[it->second].first == a ? 1.0 : -1.0});
        }
    }
    const std::size_t E = edge_vertices.size();
    std::vector<Vec2> normal(E);
    for (std::size_t e = 0; e < E; ++e) {
        const Vec2 t = m.vertices[edge_vertices[e].second] - m.vertices[edge_vertices[e].first];
        normal[e] = Vec2{t.y, -t.x} * (1.0 / norm(t));
    }

    // Edge-pair integrals are needed only for pairs of edges of distinct cells.
    std::vector<double> J(E * E, std::numeric_limits<double>::quiet_NaN());
    auto edge_integral = [&](std::size_t e, std::size_t f) {
        double& slot = J[std::min(e, f) * E + std::max(e, f)];
        if (std::isnan(slot)) {
            const auto [a0, a1] = edge_vertices[e];
            const auto [b0, b1] = edge_vertices[f];
            slot = segment_pair_integral(m.vertices[a0], m.vertices[a1], m.vertices[b0], m.vertices[b1], alpha_);
        }
        return slot;
    };

    const double scale = -1.0 / (4.0 * alpha_ * alpha_);
    weights_.assign(n * (n - 1) / 2, 0.0);
    std::size_t idx = 0;
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t l = k + 1; l < n; ++l, ++idx) {
            double s = 0.0;
            for (const auto& ek : cell_edges[k]) {
                for (const auto& el : cell_edges[l]) {
                    const double nn = ek.sign * el.sign * dot(normal[ek.id], normal[el.id]);
                    if (nn == 0.0) continue;
                    s += nn * edge_integral(ek.id, el.id);
                }
            }
            weights_[idx] = scale * s;
        }
    }
}

double GagliardoSpaceKernel::pair_weight(std::size_t k, std::size_t l) const {
    if (k == l) throw std::invalid_argument("GagliardoSpaceKernel::pair_weight: K == L");
    if (k > l) std::swap(k, l);
    const std::size_t n = mesh_->num_cells();
    return weights_[k * n - k * (k + 1) / 2 + (l - k - 1)];
}

double GagliardoSpaceKernel::seminorm_squared(std::span<const double> values) const {
    const std::size_t n = mesh_->num_cells();
    if (values.size() != n) throw std::invalid_argument("GagliardoSpaceKernel: value count does not match the mesh");
    double s = 0.0;
    std::size_t idx = 0;
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t l = k + 1; l < n; ++l, ++idx) {
            const double d = values[k] - values[l];
            s += d * d * weights_[idx];
        }
    }
    return 2.0 * s;
}

double GagliardoSpaceKernel::seminorm_squared(const CellField& w) const {
    if (w.mesh_ptr() != mesh_) throw std::invalid_argument("GagliardoSpaceKernel: field on a different mesh");
    return seminorm_squared(w.values());
}

double gagliardo_space_seminorm(const CellField& w, double alpha) {
    return GagliardoSpaceKernel(w.mesh_ptr(), alpha).seminorm_squared(w);
}

double time_kernel_integral(double a, double b, double c, double d, double alpha) {
    require_alpha(alpha, "time_kernel_integral");
    if (!(a <= b && b <= c && c <= d)) throw std::invalid_argument("time_kernel_integral: need a <= b <= c <= d");
    const double e = 1.0 - 2.0 * alpha;
    auto p = [e](double x) { return x > 0.0 ? std::pow(x, e) : 0.0; };
    return (p(c - a) - p(c - b) - p(d - a) + p(d - b)) / (2.0 * alpha * e);
}

double gagliardo_time_seminorm(const SpaceTimeField& field, double alpha, TimeMode mode) {
    require_alpha(alpha, "gagliardo_time_seminorm");
    if (mode == TimeMode::Affine) throw std::invalid_argument("gagliardo_time_seminorm: piecewise constant modes only");
    const std::size_t N = field.N();
    if (N < 2) throw std::invalid_argument("gagliardo_time_seminorm: need N >= 2");
    const std::size_t offset = mode == TimeMode::Left ? 0 : 1;
    const double dt = field.dt();
    std::vector<double> kernel(N);
    for (std::size_t j = 1; j < N; ++j) {
        kernel[j] = time_kernel_integral(0.0, dt, static_cast<double>(j) * dt, static_cast<double>(j + 1) * dt, alpha);
    }
    double s = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
        for (std::size_t m = n + 1; m < N; ++m) {
            s += kernel[m - n] * l2_distance_squared(field[n + offset], field[m + offset]);
        }
    }
    return 2.0 * s;
}

void write_csv(std::ostream& os, const CellField& w) {
    const auto old = os.precision(17);
    os << "cell,x,y,value\n";
    const auto& cells = w.mesh().cells;
    for (std::size_t k = 0; k < w.size(); ++k) {
        os << k << ',' << cells[k].center.x << ',' << cells[k].center.y << ',' << w[k] << '\n';
    }
    os.precision(old);
}

void write_csv(std::ostream& os, const SpaceTimeField& field) {
    const auto old = os.precision(17);
    os << "step,t,cell,x,y,value\n";
    const auto& cells = field.mesh().cells;
    for (std::size_t n = 0; n <= field.N(); ++n) {
        const double t = field.time(n);
        for (std::size_t k = 0; k < cells.size(); ++k) {
            os << n << ',' << t << ',' << k << ',' << cells[k].center.x << ',' << cells[k].center.y << ','
               << field[n][k] << '\n';
        }
    }
    os.precision(old);
}

void write_vtk(std::ostream& os, const CellField& w, const std::string& name) {
    write_vtk(os, w.mesh(), name);
    const auto old = os.precision(17);
    os << "CELL_DATA " << w.size() << "\nSCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (std::size_t k = 0; k < w.size(); ++k) os << w[k] << '\n';
    os.precision(old);
}

}  // namespace stochfv
