#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "stochfv/geometry.hpp"

namespace stochfv {

/// A control volume: convex polygon (counter-clockwise vertex loop) with its center x_K.
struct Cell {
    Vec2 center;
    double area = 0.0;
    std::vector<std::size_t> vertices;
};

/// Edge sigma = K|L between two control volumes. The normal is the unit outward
/// normal of K on this edge, taken from the edge geometry.
struct InteriorEdge {
    std::size_t k = 0;
    std::size_t l = 0;
    std::size_t v0 = 0;
    std::size_t v1 = 0;
    double length = 0.0;
    double distance = 0.0;  // |x_L - x_K|
    Vec2 normal;
    double diamond_area = 0.0;

    /// Transmissibility m_sigma / d_{K|L}.
    double transmissibility() const { return length / distance; }
};

/// Edge on the domain boundary. Its "diamond" is the triangle spanned by x_K
/// and the edge; this is bookkeeping only, the scheme never uses it.
struct BoundaryEdge {
    std::size_t k = 0;
    std::size_t v0 = 0;
    std::size_t v1 = 0;
    double length = 0.0;
    double diamond_area = 0.0;
};

/// Admissible finite-volume mesh of a polygonal domain.
///
/// Edge ids are global: interior edges take ids [0, num_interior_edges()),
/// boundary edges follow. Meshes are shared read-only through MeshPtr; the
/// fields stay public so tests and loaders can build deliberately broken meshes.
struct Mesh {
    std::vector<Vec2> domain;  // counter-clockwise boundary polygon
    std::vector<Vec2> vertices;
    std::vector<Cell> cells;
    std::vector<InteriorEdge> interior_edges;
    std::vector<BoundaryEdge> boundary_edges;
    double mesh_size = 0.0;
    double regularity = 0.0;
    double domain_area = 0.0;
    /// Voronoi facets shorter than 1e-12 h that were collapsed during construction.
    std::size_t dropped_facets = 0;

    std::size_t num_cells() const { return cells.size(); }
    std::size_t num_interior_edges() const { return interior_edges.size(); }
    std::size_t num_edges() const { return interior_edges.size() + boundary_edges.size(); }

    std::vector<Vec2> cell_polygon(std::size_t k) const;
    double cell_diameter(std::size_t k) const;
};

using MeshPtr = std::shared_ptr<const Mesh>;

/// Builds the edge structure from cell vertex loops. Loops are reoriented
/// counter-clockwise and consecutive duplicate vertices removed. When `areas`
/// is empty the polygon areas are used; otherwise the given values are stored
/// verbatim (the validator compares them against the geometry).
/// Throws std::invalid_argument on non-manifold input (an edge shared by more
/// than two cells) or malformed loops.
Mesh build_from_polygons(std::vector<Vec2> domain, std::vector<Vec2> vertices,
                         std::vector<std::vector<std::size_t>> loops, std::vector<Vec2> centers,
                         std::vector<double> areas = {});

struct Rectangle {
    double x0 = 0.0;
    double y0 = 0.0;
    double x1 = 1.0;
    double y1 = 1.0;

    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    std::vector<Vec2> polygon() const { return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}; }
};

/// nx-by-ny grid of equal rectangles with centers at the centroids. Cell (i, j)
/// has index j * nx + i.
Mesh build_uniform_rect(std::size_t nx, std::size_t ny, const Rectangle& domain);

/// Voronoi diagram of the sites clipped to a convex domain, with x_K the site of K.
Mesh build_voronoi(const std::vector<Vec2>& sites, const std::vector<Vec2>& domain);

/// Sites on an nx-by-ny lattice, each displaced uniformly by up to
/// `jitter` times the lattice spacing (jitter < 0.5 keeps them apart).
std::vector<Vec2> jittered_lattice(std::size_t nx, std::size_t ny, const Rectangle& domain,
                                   double jitter, std::uint64_t seed);

/// max(N, max over K and sigma in E_K of diam(K) / d(x_K, sigma)), with N the
/// largest number of edges meeting at a vertex.
double mesh_regularity(const Mesh& mesh);

struct Violation {
    enum class Kind {
        AreaSum,
        CellArea,
        CenterOutside,
        DegenerateEdge,
        Orthogonality,
        DiamondArea,
        DiamondTiling,
        BoundaryEdgeOffDomain,
        NonFinite,
    };
    Kind kind;
    std::size_t id;  // cell or edge id, 0 for global checks
    double residual;
    std::string message;
};

const char* to_string(Violation::Kind kind);

/// Empty result means the mesh is admissible.
std::vector<Violation> validate_admissibility(const Mesh& mesh);

/// Plain-text summary: counts, h, reg.
void write_summary(std::ostream& os, const Mesh& mesh);

/// Legacy-VTK ASCII unstructured grid with polygon cells.
void write_vtk(std::ostream& os, const Mesh& mesh, const std::string& title = "stochfv mesh");

/// Text mesh format ("stochfv-mesh 1"): domain polygon, vertices, and per cell
/// the center, area and vertex loop. Round-trips every stored quantity.
void write_mesh_file(std::ostream& os, const Mesh& mesh);
Mesh read_mesh_file(std::istream& is);

}  // namespace stochfv
