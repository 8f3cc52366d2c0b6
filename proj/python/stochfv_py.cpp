#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <sstream>

#include "stochfv/analysis.hpp"
#include "stochfv/commands.hpp"
#include "stochfv/solver.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace stochfv;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) { return py::array_t<double>(v.size(), v.data()); }

py::array_t<double> centers(const Mesh& m) {
    py::array_t<double> out({m.num_cells(), std::size_t{2}});
    auto a = out.mutable_unchecked<2>();
    for (std::size_t k = 0; k < m.num_cells(); ++k) {
        a(k, 0) = m.cells[k].center.x;
        a(k, 1) = m.cells[k].center.y;
    }
    return out;
}

CellField field_from(const MeshPtr& mesh, py::array_t<double, py::array::c_style | py::array::forcecast> values) {
    if (values.ndim() != 1) throw std::invalid_argument("expected a one-dimensional array of cell values");
    return CellField(mesh, std::vector<double>(values.data(), values.data() + values.size()));
}

// Trajectory as an (N + 1, cells) array.
py::array_t<double> trajectory_array(const SpaceTimeField& u) {
    const std::size_t cells = u.mesh().num_cells();
    py::array_t<double> out({u.N() + 1, cells});
    auto a = out.mutable_unchecked<2>();
    for (std::size_t n = 0; n <= u.N(); ++n)
        for (std::size_t k = 0; k < cells; ++k) a(n, k) = u[n][k];
    return out;
}

}  // namespace

PYBIND11_MODULE(_stochfv, m) {
    m.doc() = "Finite-volume solver for the stochastic heat equation with multiplicative noise";

    py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

    py::class_<Rectangle>(m, "Rectangle")
        .def(py::init([](double x0, double y0, double x1, double y1) { return Rectangle{x0, y0, x1, y1}; }), "x0"_a = 0.0,
             "y0"_a = 0.0, "x1"_a = 1.0, "y1"_a = 1.0)
        .def_readwrite("x0", &Rectangle::x0)
        .def_readwrite("y0", &Rectangle::y0)
        .def_readwrite("x1", &Rectangle::x1)
        .def_readwrite("y1", &Rectangle::y1);

    py::class_<Mesh, std::shared_ptr<Mesh>>(m, "Mesh")
        .def_property_readonly("num_cells", &Mesh::num_cells)
        .def_property_readonly("num_interior_edges", &Mesh::num_interior_edges)
        .def_property_readonly("num_boundary_edges", [](const Mesh& self) { return self.boundary_edges.size(); })
        .def_property_readonly("h", [](const Mesh& self) { return self.mesh_size; })
        .def_property_readonly("regularity", [](const Mesh& self) { return self.regularity; })
        .def_property_readonly("areas",
                               [](const Mesh& self) {
                                   std::vector<double> a;
                                   for (const auto& c : self.cells) a.push_back(c.area);
                                   return to_array(a);
                               })
        .def_property_readonly("centers", &centers)
        .def("violations",
             [](const Mesh& self) {
                 std::vector<std::string> out;
                 for (const auto& v : validate_admissibility(self)) out.push_back(std::string(to_string(v.kind)) + ": " + v.message);
                 return out;
             })
        .def("summary", [](const Mesh& self) {
            std::ostringstream os;
            write_summary(os, self);
            return os.str();
        });

    m.def("uniform_mesh",
          [](std::size_t nx, std::size_t ny, const Rectangle& r) { return std::make_shared<Mesh>(build_uniform_rect(nx, ny, r)); },
          "nx"_a, "ny"_a, "domain"_a = Rectangle{});
    m.def(
        "voronoi_mesh",
        [](std::size_t nx, std::size_t ny, double jitter, std::uint64_t seed, const Rectangle& r) {
            return std::make_shared<Mesh>(build_voronoi(jittered_lattice(nx, ny, r, jitter, seed), r.polygon()));
        },
        "nx"_a, "ny"_a, "jitter"_a = 0.3, "seed"_a = 1, "domain"_a = Rectangle{});

    py::class_<NoiseModel>(m, "NoiseModel")
        .def_static("zero", &NoiseModel::zero)
        .def_static("additive", &NoiseModel::additive, "sigma0"_a)
        .def_static("linear", &NoiseModel::linear, "lam"_a)
        .def_static("sine", &NoiseModel::sine, "sigma0"_a, "omega"_a)
        .def("__call__", &NoiseModel::operator())
        .def_property_readonly("L", &NoiseModel::lipschitz_L)
        .def_property_readonly("C_L", &NoiseModel::growth_CL)
        .def("__repr__", &NoiseModel::describe);

    py::class_<BrownianPath>(m, "BrownianPath")
        .def_readonly("seed", &BrownianPath::seed)
        .def_readonly("N", &BrownianPath::N)
        .def_readonly("T", &BrownianPath::T)
        .def_property_readonly("increments", [](const BrownianPath& p) { return to_array(p.increments); })
        .def("W", &BrownianPath::W, "n"_a)
        .def("coarsen", &coarsen_path, "factor"_a);
    m.def("sample_path", &sample_path, "seed"_a, "N"_a, "T"_a);
    m.def("realization_path", &realization_path, "master_seed"_a, "r"_a, "N"_a, "T"_a);

    m.def(
        "project",
        [](std::shared_ptr<Mesh> mesh, const std::function<double(double, double)>& f) {
            const CellField u = project_initial(f, mesh);
            return to_array(std::vector<double>(u.values().begin(), u.values().end()));
        },
        "mesh"_a, "f"_a, "Cell means of f(x, y).");

    m.def(
        "solve",
        [](std::shared_ptr<Mesh> mesh, py::array_t<double, py::array::c_style | py::array::forcecast> u0,
           const NoiseModel& noise, const BrownianPath& path, double tolerance) {
            const TpfaOperator op = assemble(mesh);
            SchemeConfig c;
            c.T = path.T;
            c.N = path.N;
            c.tolerance = tolerance;
            return trajectory_array(solve_trajectory(op, c, noise, path, field_from(mesh, u0)));
        },
        "mesh"_a, "u0"_a, "noise"_a, "path"_a, "tolerance"_a = 1e-10,
        "Semi-implicit trajectory; returns an array of shape (N + 1, cells).");

    m.def(
        "l2_norm_squared",
        [](std::shared_ptr<Mesh> mesh, py::array_t<double, py::array::c_style | py::array::forcecast> u) {
            return l2_norm_squared(field_from(mesh, u));
        },
        "mesh"_a, "u"_a);
    m.def(
        "h1_seminorm_squared",
        [](std::shared_ptr<Mesh> mesh, py::array_t<double, py::array::c_style | py::array::forcecast> u) {
            return h1_seminorm_squared(field_from(mesh, u));
        },
        "mesh"_a, "u"_a);

    m.def(
        "run_command",
        [](const std::string& command, const std::string& config, std::optional<std::string> out, bool vtk) {
            CommandOptions o;
            o.out = std::move(out);
            o.vtk = vtk;
            std::ostringstream os, err;
            const int code = run_command(command, config, o, os, err);
            return py::make_tuple(code, os.str(), err.str());
        },
        "command"_a, "config"_a, "out"_a = py::none(), "vtk"_a = false,
        "Runs a CLI command; returns (exit_code, stdout, stderr).");
}
