#include "stochfv/mesh.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "stochfv/rng.hpp"

namespace stochfv {

std::vector<Vec2> Mesh::cell_polygon(std::size_t k) const {
    std::vector<Vec2> poly;
    poly.reserve(cells[k].vertices.size());
    for (auto v : cells[k].vertices) poly.push_back(vertices[v]);
    return poly;
}

double Mesh::cell_diameter(std::size_t k) const { return diameter(cell_polygon(k)); }

namespace {

double line_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
    const double len = distance(a, b);
    if (len == 0.0) return distance(p, a);
    return std::abs(cross(b - a, p - a)) / len;
}

}  // namespace

Mesh build_from_polygons(std::vector<Vec2> domain, std::vector<Vec2> vertices,
                         std::vector<std::vector<std::size_t>> loops, std::vector<Vec2> centers,
                         std::vector<double> areas) {
    if (loops.size() != centers.size()) {
        throw std::invalid_argument("build_from_polygons: one center per cell required");
    }
    if (!areas.empty() && areas.size() != loops.size()) {
        throw std::invalid_argument("build_from_polygons: one area per cell required");
    }
    if (signed_area(domain) < 0.0) std::reverse(domain.begin(), domain.end());

    Mesh mesh;
    mesh.domain = std::move(domain);
    mesh.vertices = std::move(vertices);
    mesh.domain_area = std::abs(signed_area(mesh.domain));
    mesh.cells.resize(loops.size());

    // (min vertex, max vertex) -> list of (cell, directed v0, directed v1)
    std::map<std::pair<std::size_t, std::size_t>, std::vector<std::array<std::size_t, 3>>> edge_map;

    for (std::size_t k = 0; k < loops.size(); ++k) {
        auto& loop = loops[k];
        for (auto v : loop) {
            if (v >= mesh.vertices.size()) {
                throw std::invalid_argument("build_from_polygons: vertex index out of range in cell " +
                                            std::to_string(k));
            }
        }
        loop.erase(std::unique(loop.begin(), loop.end()), loop.end());
        while (loop.size() > 1 && loop.front() == loop.back()) loop.pop_back();
        if (loop.size() < 3) {
            throw std::invalid_argument("build_from_polygons: cell " + std::to_string(k) +
                                        " has fewer than three distinct vertices");
        }
        Cell& cell = mesh.cells[k];
        cell.vertices = loop;
        auto poly = mesh.cell_polygon(k);
        if (signed_area(poly) < 0.0) {
            std::reverse(cell.vertices.begin(), cell.vertices.end());
            std::reverse(poly.begin(), poly.end());
        }
        cell.center = centers[k];
        cell.area = areas.empty() ? signed_area(poly) : areas[k];

        const std::size_t n = cell.vertices.size();
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t a = cell.vertices[i];
            const std::size_t b = cell.vertices[(i + 1) % n];
            edge_map[{std::min(a, b), std::max(a, b)}].push_back({k, a, b});
        }
    }

    for (const auto& [key, uses] : edge_map) {
        if (uses.size() > 2) {
            throw std::invalid_argument("build_from_polygons: edge (" + std::to_string(key.first) + "," +
                                        std::to_string(key.second) + ") shared by more than two cells");
        }
        if (uses.size() == 2) {
            if (uses[0][0] == uses[1][0]) {
                throw std::invalid_argument("build_from_polygons: cell " + std::to_string(uses[0][0]) +
                                            " uses an edge twice");
            }
            const auto& first = uses[0][0] < uses[1][0] ? uses[0] : uses[1];
            const auto& second = uses[0][0] < uses[1][0] ? uses[1] : uses[0];
            InteriorEdge e;
            e.k = first[0];
            e.l = second[0];
            e.v0 = first[1];
            e.v1 = first[2];
            const Vec2 t = mesh.vertices[e.v1] - mesh.vertices[e.v0];
            e.length = norm(t);
            e.normal = e.length > 0.0 ? Vec2{t.y / e.length, -t.x / e.length} : Vec2{};
            e.distance = distance(mesh.cells[e.k].center, mesh.cells[e.l].center);
            e.diamond_area = 0.5 * e.length * e.distance;
            mesh.interior_edges.push_back(e);
        } else {
            BoundaryEdge e;
            e.k = uses[0][0];
            e.v0 = uses[0][1];
            e.v1 = uses[0][2];
            const Vec2 a = mesh.vertices[e.v0];
            const Vec2 b = mesh.vertices[e.v1];
            e.length = distance(a, b);
            e.diamond_area = 0.5 * e.length * line_distance(mesh.cells[e.k].center, a, b);
            mesh.boundary_edges.push_back(e);
        }
    }

    for (std::size_t k = 0; k < mesh.num_cells(); ++k) {
        mesh.mesh_size = std::max(mesh.mesh_size, mesh.cell_diameter(k));
    }
    mesh.regularity = mesh_regularity(mesh);
    return mesh;
}

Mesh build_uniform_rect(std::size_t nx, std::size_t ny, const Rectangle& domain) {
    if (nx == 0 || ny == 0) throw std::invalid_argument("build_uniform_rect: nx and ny must be positive");
    if (!(domain.width() > 0.0) || !(domain.height() > 0.0)) {
        throw std::invalid_argument("build_uniform_rect: degenerate rectangle");
    }
    const double hx = domain.width() / static_cast<double>(nx);
    const double hy = domain.height() / static_cast<double>(ny);
    auto xcoord = [&](std::size_t i) { return i == nx ? domain.x1 : domain.x0 + hx * static_cast<double>(i); };
    auto ycoord = [&](std::size_t j) { return j == ny ? domain.y1 : domain.y0 + hy * static_cast<double>(j); };

    std::vector<Vec2> vertices;
    vertices.reserve((nx + 1) * (ny + 1));
    for (std::size_t j = 0; j <= ny; ++j) {
        for (std::size_t i = 0; i <= nx; ++i) vertices.push_back({xcoord(i), ycoord(j)});
    }
    auto vid = [&](std::size_t i, std::size_t j) { return j * (nx + 1) + i; };

    std::vector<std::vector<std::size_t>> loops;
    std::vector<Vec2> centers;
    std::vector<double> areas;
    loops.reserve(nx * ny);
    for (std::size_t j = 0; j < ny; ++j) {
        for (std::size_t i = 0; i < nx; ++i) {
            loops.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)});
            const double x0 = xcoord(i), x1 = xcoord(i + 1), y0 = ycoord(j), y1 = ycoord(j + 1);
            centers.push_back({0.5 * (x0 + x1), 0.5 * (y0 + y1)});
            areas.push_back((x1 - x0) * (y1 - y0));
        }
    }
    return build_from_polygons(domain.polygon(), std::move(vertices), std::move(loops), std::move(centers),
                               std::move(areas));
}

namespace {

// Label of the edge leaving each vertex: a site index (>= 0) for a bisector
// facet or -1 - e for domain edge e.
struct LabeledPolygon {
    std::vector<Vec2> points;
    std::vector<long> labels;
};

LabeledPolygon clip_labeled(const LabeledPolygon& poly, const Vec2& normal, double offset, long label) {
    LabeledPolygon out;
    const std::size_t n = poly.points.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& p = poly.points[i];
        const Vec2& q = poly.points[(i + 1) % n];
        const double sp = dot(normal, p) - offset;
        const double sq = dot(normal, q) - offset;
        const long edge_label = poly.labels[i];
        if (sp < 0.0) {
            out.points.push_back(p);
            out.labels.push_back(edge_label);
            if (sq > 0.0) {
                out.points.push_back(p + (q - p) * (sp / (sp - sq)));
                out.labels.push_back(label);
            }
        } else if (sp == 0.0) {
            out.points.push_back(p);
            out.labels.push_back(sq > 0.0 ? label : edge_label);
        } else if (sq < 0.0) {
            out.points.push_back(p + (q - p) * (sp / (sp - sq)));
            out.labels.push_back(edge_label);
        }
    }
    return out;
}

struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::size_t find(std::size_t i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

}  // namespace

Mesh build_voronoi(const std::vector<Vec2>& sites, const std::vector<Vec2>& domain_in) {
    if (sites.empty()) throw std::invalid_argument("build_voronoi: at least one site required");
    std::vector<Vec2> domain = domain_in;
    if (domain.size() < 3 || !is_convex(domain)) throw std::invalid_argument("build_voronoi: domain must be a convex polygon");
    if (signed_area(domain) < 0.0) std::reverse(domain.begin(), domain.end());

    const double scale = diameter(domain);
    for (std::size_t i = 0; i < sites.size(); ++i) {
        if (!convex_contains(domain, sites[i], 0.0) || point_boundary_distance(sites[i], domain) <= 1e-14 * scale) {
            throw std::invalid_argument("build_voronoi: site " + std::to_string(i) + " is not strictly inside the domain");
        }
    }
    {
        std::vector<std::size_t> order(sites.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return std::tie(sites[a].x, sites[a].y) < std::tie(sites[b].x, sites[b].y);
        });
        for (std::size_t i = 1; i < order.size(); ++i) {
            if (sites[order[i]] == sites[order[i - 1]]) {
                throw std::invalid_argument("build_voronoi: duplicate sites " + std::to_string(order[i - 1]) +
                                            " and " + std::to_string(order[i]));
            }
        }
    }

    const std::size_t n = sites.size();
    std::vector<LabeledPolygon> raw(n);
    for (std::size_t i = 0; i < n; ++i) {
        LabeledPolygon poly{domain, {}};
        for (std::size_t e = 0; e < domain.size(); ++e) poly.labels.push_back(-1 - static_cast<long>(e));
        for (std::size_t j = 0; j < n && !poly.points.empty(); ++j) {
            if (j == i) continue;
            const Vec2 normal = sites[j] - sites[i];
            const double offset = 0.5 * (dot(sites[j], sites[j]) - dot(sites[i], sites[i]));
            poly = clip_labeled(poly, normal, offset, static_cast<long>(j));
        }
        raw[i] = std::move(poly);
    }

    double h = 0.0;
    for (const auto& poly : raw) h = std::max(h, diameter(poly.points));
    const double tol = 1e-12 * h;

    // A Voronoi vertex is identified by the three generators meeting there.
    std::map<std::array<long, 3>, std::size_t> key_to_vertex;
    std::vector<Vec2> positions;
    std::vector<std::vector<std::size_t>> raw_loops(n);
    std::set<std::pair<std::size_t, std::size_t>> raw_pairs;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& poly = raw[i];
        const std::size_t m = poly.points.size();
        for (std::size_t v = 0; v < m; ++v) {
            std::array<long, 3> key{static_cast<long>(i), poly.labels[(v + m - 1) % m], poly.labels[v]};
            std::sort(key.begin(), key.end());
            auto [it, inserted] = key_to_vertex.emplace(key, positions.size());
            if (inserted) positions.push_back(poly.points[v]);
            raw_loops[i].push_back(it->second);
            if (poly.labels[v] >= 0) {
                const auto j = static_cast<std::size_t>(poly.labels[v]);
                raw_pairs.insert({std::min(i, j), std::max(i, j)});
            }
        }
    }

    // Collapse vertices closer than tol: degenerate (near co-circular) facets.
    UnionFind uf(positions.size());
    std::vector<std::size_t> by_x(positions.size());
    std::iota(by_x.begin(), by_x.end(), 0);
    std::sort(by_x.begin(), by_x.end(), [&](std::size_t a, std::size_t b) { return positions[a].x < positions[b].x; });
    for (std::size_t a = 0; a < by_x.size(); ++a) {
        for (std::size_t b = a + 1; b < by_x.size() && positions[by_x[b]].x - positions[by_x[a]].x <= tol; ++b) {
            if (distance(positions[by_x[a]], positions[by_x[b]]) <= tol) uf.unite(by_x[a], by_x[b]);
        }
    }
    std::vector<std::size_t> compact(positions.size(), std::numeric_limits<std::size_t>::max());
    std::vector<Vec2> vertices;
    for (std::size_t v = 0; v < positions.size(); ++v) {
        const std::size_t root = uf.find(v);
        if (compact[root] == std::numeric_limits<std::size_t>::max()) {
            compact[root] = vertices.size();
            vertices.push_back(positions[root]);
        }
        compact[v] = compact[root];
    }
    for (auto& loop : raw_loops) {
        for (auto& v : loop) v = compact[v];
    }

    Mesh mesh = build_from_polygons(domain, std::move(vertices), std::move(raw_loops), sites);
    std::size_t kept = 0;
    for (const auto& e : mesh.interior_edges) kept += raw_pairs.count({e.k, e.l});
    mesh.dropped_facets = raw_pairs.size() - kept;
    return mesh;
}

std::vector<Vec2> jittered_lattice(std::size_t nx, std::size_t ny, const Rectangle& domain, double jitter,
                                   std::uint64_t seed) {
    if (nx == 0 || ny == 0) throw std::invalid_argument("jittered_lattice: nx and ny must be positive");
    if (jitter < 0.0 || jitter >= 0.5) throw std::invalid_argument("jittered_lattice: jitter must lie in [0, 0.5)");
    const double hx = domain.width() / static_cast<double>(nx);
    const double hy = domain.height() / static_cast<double>(ny);
    std::vector<Vec2> sites;
    sites.reserve(nx * ny);
    std::uint64_t index = 0;
    for (std::size_t j = 0; j < ny; ++j) {
        for (std::size_t i = 0; i < nx; ++i) {
            const double dx = (2.0 * uniform01(seed, 1, index) - 1.0) * jitter;
            const double dy = (2.0 * uniform01(seed, 2, index) - 1.0) * jitter;
            ++index;
            sites.push_back({domain.x0 + hx * (static_cast<double>(i) + 0.5 + dx),
                             domain.y0 + hy * (static_cast<double>(j) + 0.5 + dy)});
        }
    }
    return sites;
}

double mesh_regularity(const Mesh& mesh) {
    std::vector<std::size_t> valence(mesh.vertices.size(), 0);
    auto count = [&](std::size_t v0, std::size_t v1) {
        ++valence[v0];
        ++valence[v1];
    };
    for (const auto& e : mesh.interior_edges) count(e.v0, e.v1);
    for (const auto& e : mesh.boundary_edges) count(e.v0, e.v1);
    double result = 0.0;
    for (auto v : valence) result = std::max(result, static_cast<double>(v));

    std::vector<double> diam(mesh.num_cells());
    for (std::size_t k = 0; k < mesh.num_cells(); ++k) diam[k] = mesh.cell_diameter(k);
    auto ratio = [&](std::size_t k, std::size_t v0, std::size_t v1) {
        const double d = point_segment_distance(mesh.cells[k].center, mesh.vertices[v0], mesh.vertices[v1]);
        return d > 0.0 ? diam[k] / d : std::numeric_limits<double>::infinity();
    };
    for (const auto& e : mesh.interior_edges) {
        result = std::max({result, ratio(e.k, e.v0, e.v1), ratio(e.l, e.v0, e.v1)});
    }
    for (const auto& e : mesh.boundary_edges) result = std::max(result, ratio(e.k, e.v0, e.v1));
    return result;
}

const char* to_string(Violation::Kind kind) {
    switch (kind) {
        case Violation::Kind::AreaSum: return "area_sum";
        case Violation::Kind::CellArea: return "cell_area";
        case Violation::Kind::CenterOutside: return "center_outside";
        case Violation::Kind::DegenerateEdge: return "degenerate_edge";
        case Violation::Kind::Orthogonality: return "orthogonality";
        case Violation::Kind::DiamondArea: return "diamond_area";
        case Violation::Kind::DiamondTiling: return "diamond_tiling";
        case Violation::Kind::BoundaryEdgeOffDomain: return "boundary_edge_off_domain";
        case Violation::Kind::NonFinite: return "non_finite";
    }
    return "unknown";
}

std::vector<Violation> validate_admissibility(const Mesh& mesh) {
    std::vector<Violation> report;
    auto add = [&](Violation::Kind kind, std::size_t id, double residual, std::string message) {
        report.push_back({kind, id, residual, std::move(message)});
    };

    const double h = mesh.mesh_size;
    const double geom_tol = 1e-9 * h;

    if (mesh.num_cells() == 0) {
        add(Violation::Kind::AreaSum, 0, mesh.domain_area, "mesh has no cells");
        return report;
    }

    for (const auto& v : mesh.vertices) {
        if (!std::isfinite(v.x) || !std::isfinite(v.y)) {
            add(Violation::Kind::NonFinite, 0, 0.0, "non-finite vertex coordinate");
            return report;
        }
    }

    double area_sum = 0.0;
    for (std::size_t k = 0; k < mesh.num_cells(); ++k) {
        const Cell& cell = mesh.cells[k];
        if (!std::isfinite(cell.area) || !std::isfinite(cell.center.x) || !std::isfinite(cell.center.y)) {
            add(Violation::Kind::NonFinite, k, 0.0, "cell " + std::to_string(k) + " has non-finite data");
            continue;
        }
        area_sum += cell.area;
        const auto poly = mesh.cell_polygon(k);
        const double geometric = signed_area(poly);
        const double area_residual = std::abs(cell.area - geometric);
        if (!(cell.area > 0.0) || area_residual > 1e-10 * std::abs(geometric)) {
            add(Violation::Kind::CellArea, k, area_residual,
                "cell " + std::to_string(k) + " stored area differs from its polygon area");
        }
        if (!convex_contains(poly, cell.center, geom_tol)) {
            add(Violation::Kind::CenterOutside, k, point_boundary_distance(cell.center, poly),
                "center of cell " + std::to_string(k) + " lies outside the cell");
        }
    }
    const double area_defect = std::abs(area_sum - mesh.domain_area);
    if (area_defect > 1e-10 * mesh.domain_area) {
        add(Violation::Kind::AreaSum, 0, area_defect / mesh.domain_area,
            "cell areas do not sum to the domain area");
    }

    double diamond_sum = 0.0;
    for (std::size_t id = 0; id < mesh.interior_edges.size(); ++id) {
        const InteriorEdge& e = mesh.interior_edges[id];
        if (e.k == e.l || !(e.length > 0.0) || !(e.distance > 0.0)) {
            add(Violation::Kind::DegenerateEdge, id, 0.0, "interior edge " + std::to_string(id) + " is degenerate");
            continue;
        }
        const Vec2 offset = mesh.cells[e.l].center - mesh.cells[e.k].center;
        const double ortho = norm(offset - e.normal * e.distance);
        if (!(ortho <= geom_tol)) {
            add(Violation::Kind::Orthogonality, id, ortho,
                "edge " + std::to_string(id) + " (cells " + std::to_string(e.k) + "|" + std::to_string(e.l) +
                    "): center line not orthogonal to the edge");
        }
        const double diamond_residual = std::abs(e.diamond_area - 0.5 * e.length * e.distance);
        if (diamond_residual > 1e-12 * e.diamond_area) {
            add(Violation::Kind::DiamondArea, id, diamond_residual,
                "edge " + std::to_string(id) + ": diamond area differs from m_sigma d / 2");
        }
        diamond_sum += e.diamond_area;
    }
    const std::size_t n_int = mesh.interior_edges.size();
    for (std::size_t b = 0; b < mesh.boundary_edges.size(); ++b) {
        const BoundaryEdge& e = mesh.boundary_edges[b];
        diamond_sum += e.diamond_area;
        const Vec2 a = mesh.vertices[e.v0];
        const Vec2 c = mesh.vertices[e.v1];
        const double off = std::max({point_boundary_distance(a, mesh.domain), point_boundary_distance(c, mesh.domain),
                                     point_boundary_distance(0.5 * (a + c), mesh.domain)});
        if (!(off <= geom_tol)) {
            add(Violation::Kind::BoundaryEdgeOffDomain, n_int + b, off,
                "boundary edge " + std::to_string(n_int + b) + " does not lie on the domain boundary");
        }
    }
    const double tiling_defect = std::abs(diamond_sum - mesh.domain_area);
    if (tiling_defect > 1e-10 * mesh.domain_area) {
        add(Violation::Kind::DiamondTiling, 0, tiling_defect / mesh.domain_area,
            "diamonds do not tile the domain");
    }
    return report;
}

void write_summary(std::ostream& os, const Mesh& mesh) {
    const auto old = os.precision(17);
    os << "cells " << mesh.num_cells() << '\n'
       << "interior_edges " << mesh.num_interior_edges() << '\n'
       << "boundary_edges " << mesh.boundary_edges.size() << '\n'
       << "vertices " << mesh.vertices.size() << '\n'
       << "h " << mesh.mesh_size << '\n'
       << "regularity " << mesh.regularity << '\n'
       << "domain_area " << mesh.domain_area << '\n'
       << "dropped_facets " << mesh.dropped_facets << '\n';
    os.precision(old);
}

void write_vtk(std::ostream& os, const Mesh& mesh, const std::string& title) {
    const auto old = os.precision(17);
    os << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    os << "POINTS " << mesh.vertices.size() << " double\n";
    for (const auto& v : mesh.vertices) os << v.x << ' ' << v.y << " 0\n";
    std::size_t total = 0;
    for (const auto& c : mesh.cells) total += c.vertices.size() + 1;
    os << "CELLS " << mesh.num_cells() << ' ' << total << '\n';
    for (const auto& c : mesh.cells) {
        os << c.vertices.size();
        for (auto v : c.vertices) os << ' ' << v;
        os << '\n';
    }
    os << "CELL_TYPES " << mesh.num_cells() << '\n';
    for (std::size_t k = 0; k < mesh.num_cells(); ++k) os << "7\n";  // VTK_POLYGON
    os.precision(old);
}

void write_mesh_file(std::ostream& os, const Mesh& mesh) {
    const auto old = os.precision(17);
    os << "stochfv-mesh 1\n";
    os << "domain " << mesh.domain.size() << '\n';
    for (const auto& p : mesh.domain) os << p.x << ' ' << p.y << '\n';
    os << "vertices " << mesh.vertices.size() << '\n';
    for (const auto& p : mesh.vertices) os << p.x << ' ' << p.y << '\n';
    os << "cells " << mesh.num_cells() << '\n';
    for (const auto& c : mesh.cells) {
        os << c.center.x << ' ' << c.center.y << ' ' << c.area << ' ' << c.vertices.size();
        for (auto v : c.vertices) os << ' ' << v;
        os << '\n';
    }
    os.precision(old);
}

Mesh read_mesh_file(std::istream& is) {
    auto fail = [](const std::string& what) { throw std::runtime_error("read_mesh_file: " + what); };
    std::string tag;
    int version = 0;
    if (!(is >> tag >> version) || tag != "stochfv-mesh" || version != 1) fail("missing 'stochfv-mesh 1' header");

    auto read_points = [&](const char* section) {
        std::string name;
        std::size_t count = 0;
        if (!(is >> name >> count) || name != section) fail(std::string("expected section '") + section + "'");
        std::vector<Vec2> pts(count);
        for (auto& p : pts) {
            if (!(is >> p.x >> p.y)) fail(std::string("truncated section '") + section + "'");
        }
        return pts;
    };
    auto domain = read_points("domain");
    auto vertices = read_points("vertices");

    std::string name;
    std::size_t count = 0;
    if (!(is >> name >> count) || name != "cells") fail("expected section 'cells'");
    std::vector<Vec2> centers(count);
    std::vector<double> areas(count);
    std::vector<std::vector<std::size_t>> loops(count);
    for (std::size_t k = 0; k < count; ++k) {
        std::size_t nv = 0;
        if (!(is >> centers[k].x >> centers[k].y >> areas[k] >> nv)) fail("truncated cell " + std::to_string(k));
        loops[k].resize(nv);
        for (auto& v : loops[k]) {
            if (!(is >> v)) fail("truncated cell " + std::to_string(k));
        }
    }
    return build_from_polygons(std::move(domain), std::move(vertices), std::move(loops), std::move(centers),
                               std::move(areas));
}

}  // namespace stochfv
