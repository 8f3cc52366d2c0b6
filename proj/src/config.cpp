#include "stochfv/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "stochfv/solver.hpp"

namespace stochfv {

namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& allowed_keys() {
    static const std::map<std::string, std::set<std::string>> keys{
        {"domain", {"x0", "y0", "x1", "y1"}},
        {"mesh", {"family", "nx", "ny", "jitter", "seed", "file"}},
        {"time", {"T", "N", "tolerance"}},
        {"noise", {"kind", "sigma0", "lambda", "omega"}},
        {"initial", {"kind", "value", "kx", "ky", "gamma", "terms", "file"}},
        {"run", {"seed", "samples", "parallel", "output", "vtk"}},
        {"ensemble", {"alpha", "taus", "eta", "perturbation", "levels"}},
        {"converge", {"levels", "p", "reference"}},
        {"verify", {"fault", "samples"}},
    };
    return keys;
}

template <class T>
T parse_value(const std::string& key, const std::string& text) {
    std::istringstream is(text);
    T value{};
    if constexpr (std::is_same_v<T, bool>) {
        std::string word;
        is >> word;
        if (word == "true" || word == "1" || word == "yes") return true;
        if (word == "false" || word == "0" || word == "no") return false;
        throw ConfigError("config key '" + key + "': expected a boolean, got '" + text + "'");
    } else {
        if constexpr (std::is_unsigned_v<T>) {
            if (text.find('-') != std::string::npos) {
                throw ConfigError("config key '" + key + "': expected a non-negative integer, got '" + text + "'");
            }
        }
        if (!(is >> value)) throw ConfigError("config key '" + key + "': cannot parse '" + text + "'");
        std::string rest;
        if (is >> rest) throw ConfigError("config key '" + key + "': trailing text in '" + text + "'");
        if constexpr (std::is_floating_point_v<T>) {
            if (!std::isfinite(value)) throw ConfigError("config key '" + key + "': value must be finite");
        }
        return value;
    }
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
    std::istringstream is(text);
    std::vector<double> out;
    std::string tok;
    while (is >> tok) out.push_back(parse_value<double>(key, tok));
    if (out.empty()) throw ConfigError("config key '" + key + "': empty list");
    return out;
}

template <class T>
void read(const pt::ptree& tree, const std::string& key, T& target) {
    if (auto v = tree.get_optional<std::string>(pt::ptree::path_type(key, '.'))) target = parse_value<T>(key, *v);
}

template <class T>
void read(const pt::ptree& tree, const std::string& key, std::optional<T>& target) {
    if (auto v = tree.get_optional<std::string>(pt::ptree::path_type(key, '.'))) target = parse_value<T>(key, *v);
}

}  // namespace

std::vector<LevelSpec> parse_levels(const std::string& text) {
    std::istringstream is(text);
    std::vector<LevelSpec> levels;
    std::string tok;
    while (is >> tok) {
        LevelSpec s;
        char x = 0, colon = 0;
        std::istringstream ts(tok);
        long long nx = 0, ny = 0, N = 0;
        if (!(ts >> nx >> x >> ny >> colon >> N) || x != 'x' || colon != ':' || nx <= 0 || ny <= 0 || N <= 0) {
            throw ConfigError("level '" + tok + "' is not of the form NXxNY:N with positive counts");
        }
        std::string rest;
        if (ts >> rest) throw ConfigError("level '" + tok + "' has trailing text");
        s.nx = static_cast<std::size_t>(nx);
        s.ny = static_cast<std::size_t>(ny);
        s.N = static_cast<std::size_t>(N);
        levels.push_back(s);
    }
    if (levels.empty()) throw ConfigError("empty level list");
    return levels;
}

double ExperimentConfig::require_T() const {
    if (!T) throw ConfigError("missing config key 'time.T'");
    if (!(*T > 0.0)) throw ConfigError("time.T must be positive");
    return *T;
}

std::size_t ExperimentConfig::require_N() const {
    if (!N) throw ConfigError("missing config key 'time.N'");
    if (*N == 0) throw ConfigError("time.N must be positive");
    return *N;
}

std::size_t ExperimentConfig::require_nx() const {
    if (mesh.nx == 0) throw ConfigError("missing or zero config key 'mesh.nx'");
    return mesh.nx;
}

std::size_t ExperimentConfig::require_ny() const {
    if (mesh.ny == 0) throw ConfigError("missing or zero config key 'mesh.ny'");
    return mesh.ny;
}

ExperimentConfig parse_config_string(const std::string& text, const std::string& base_dir) {
    pt::ptree tree;
    try {
        std::istringstream is(text);
        pt::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config syntax error: ") + e.what());
    }
    const auto& allowed = allowed_keys();
    for (const auto& [section, body] : tree) {
        if (body.empty()) throw ConfigError("config key '" + section + "' outside any section");
        const auto it = allowed.find(section);
        if (it == allowed.end()) throw ConfigError("unknown config section [" + section + "]");
        for (const auto& [key, value] : body) {
            if (!it->second.count(key)) throw ConfigError("unknown config key '" + section + "." + key + "'");
        }
    }

    ExperimentConfig c;
    c.base_dir = base_dir;
    read(tree, "domain.x0", c.domain.x0);
    read(tree, "domain.y0", c.domain.y0);
    read(tree, "domain.x1", c.domain.x1);
    read(tree, "domain.y1", c.domain.y1);
    if (!(c.domain.width() > 0.0 && c.domain.height() > 0.0)) throw ConfigError("domain has non-positive side length");

    read(tree, "mesh.family", c.mesh.family);
    read(tree, "mesh.nx", c.mesh.nx);
    read(tree, "mesh.ny", c.mesh.ny);
    read(tree, "mesh.jitter", c.mesh.jitter);
    read(tree, "mesh.seed", c.mesh.seed);
    read(tree, "mesh.file", c.mesh.file);
    if (c.mesh.family != "uniform" && c.mesh.family != "voronoi" && c.mesh.family != "file") {
        throw ConfigError("mesh.family must be uniform, voronoi or file");
    }

    read(tree, "time.T", c.T);
    read(tree, "time.N", c.N);
    read(tree, "time.tolerance", c.tolerance);
    if (!(c.tolerance > 0.0 && c.tolerance <= 1e-4)) throw ConfigError("time.tolerance must lie in (0, 1e-4]");

    std::string kind = "zero";
    read(tree, "noise.kind", kind);
    try {
        c.noise.kind = parse_noise_kind(kind);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    read(tree, "noise.sigma0", c.noise.sigma0);
    read(tree, "noise.lambda", c.noise.lambda);
    read(tree, "noise.omega", c.noise.omega);

    read(tree, "initial.kind", c.initial.kind);
    read(tree, "initial.value", c.initial.value);
    read(tree, "initial.kx", c.initial.kx);
    read(tree, "initial.ky", c.initial.ky);
    read(tree, "initial.gamma", c.initial.gamma);
    read(tree, "initial.terms", c.initial.terms);
    read(tree, "initial.file", c.initial.file);
    const std::set<std::string> initial_kinds{"constant", "cosine", "weierstrass", "csv"};
    if (!initial_kinds.count(c.initial.kind)) throw ConfigError("initial.kind must be constant, cosine, weierstrass or csv");
    if (c.initial.kind == "csv" && c.initial.file.empty()) throw ConfigError("missing config key 'initial.file'");

    read(tree, "run.seed", c.seed);
    read(tree, "run.samples", c.samples);
    read(tree, "run.parallel", c.parallel);
    read(tree, "run.output", c.output);
    read(tree, "run.vtk", c.vtk);

    read(tree, "ensemble.alpha", c.alpha);
    if (auto v = tree.get_optional<std::string>("ensemble.taus")) c.tau_fractions = parse_list("ensemble.taus", *v);
    if (auto v = tree.get_optional<std::string>("ensemble.eta")) {
        const auto e = parse_list("ensemble.eta", *v);
        if (e.size() != 2) throw ConfigError("ensemble.eta needs two numbers");
        c.eta = Vec2{e[0], e[1]};
    }
    read(tree, "ensemble.perturbation", c.perturbation);
    if (auto v = tree.get_optional<std::string>("ensemble.levels")) c.ensemble_levels = parse_levels(*v);

    if (auto v = tree.get_optional<std::string>("converge.levels")) c.levels = parse_levels(*v);
    if (auto v = tree.get_optional<std::string>("converge.p")) c.p_values = parse_list("converge.p", *v);
    read(tree, "converge.reference", c.reference);
    if (c.reference != "coupled" && c.reference != "exact") throw ConfigError("converge.reference must be coupled or exact");

    read(tree, "verify.fault", c.fault);
    read(tree, "verify.samples", c.verify_fields);
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    const auto parent = std::filesystem::path(path).parent_path();
    return parse_config_string(buffer.str(), parent.empty() ? "." : parent.string());
}

namespace {

std::string resolve(const ExperimentConfig& c, const std::string& file) {
    const std::filesystem::path p(file);
    return p.is_absolute() ? file : (std::filesystem::path(c.base_dir) / p).string();
}

}  // namespace

MeshPtr build_mesh(const ExperimentConfig& c) {
    if (c.mesh.family == "uniform") {
        return std::make_shared<const Mesh>(build_uniform_rect(c.require_nx(), c.require_ny(), c.domain));
    }
    if (c.mesh.family == "voronoi") {
        const auto sites = jittered_lattice(c.require_nx(), c.require_ny(), c.domain, c.mesh.jitter, c.mesh.seed);
        return std::make_shared<const Mesh>(build_voronoi(sites, c.domain.polygon()));
    }
    if (c.mesh.file.empty()) throw ConfigError("missing config key 'mesh.file'");
    std::ifstream in(resolve(c, c.mesh.file));
    if (!in) throw ConfigError("cannot open mesh file '" + c.mesh.file + "'");
    try {
        return std::make_shared<const Mesh>(read_mesh_file(in));
    } catch (const std::invalid_argument&) {
        throw;
    } catch (const std::runtime_error& e) {
        throw ConfigError(std::string("mesh file: ") + e.what());
    }
}

InitialCondition initial_condition(const ExperimentConfig& c) {
    const InitialSpec s = c.initial;
    const Rectangle d = c.domain;
    const double ax = s.kx * std::numbers::pi / d.width();
    const double ay = s.ky * std::numbers::pi / d.height();
    if (s.kind == "constant") return [v = s.value](double, double) { return v; };
    if (s.kind == "cosine") {
        return [=](double x, double y) { return s.value * std::cos(ax * (x - d.x0)) * std::cos(ay * (y - d.y0)); };
    }
    if (s.kind == "weierstrass") {
        if (s.terms < 1) throw ConfigError("initial.terms must be positive");
        return [=](double x, double) {
            double v = 0.0;
            for (int j = 0; j < s.terms; ++j) {
                const double f = std::ldexp(1.0, j);
                v += std::pow(f, -s.gamma) * std::cos(f * std::numbers::pi * (x - d.x0) / d.width());
            }
            return s.value * v;
        };
    }
    throw ConfigError("initial condition '" + s.kind + "' is not an analytic field");
}

CellField initial_field(const ExperimentConfig& c, const MeshPtr& mesh) {
    // Cell means of a constant are exact; quadrature would round them.
    if (c.initial.kind == "constant") return CellField(mesh, c.initial.value);
    if (c.initial.kind != "csv") return project_initial(initial_condition(c), mesh);
    std::ifstream in(resolve(c, c.initial.file));
    if (!in) throw ConfigError("cannot open initial field file '" + c.initial.file + "'");
    std::string line;
    if (!std::getline(in, line) || line != "cell,x,y,value") throw ConfigError("initial field CSV needs header 'cell,x,y,value'");
    std::vector<double> values(mesh->num_cells(), std::nan(""));
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell, x, y, value;
        if (!std::getline(ls, cell, ',') || !std::getline(ls, x, ',') || !std::getline(ls, y, ',') ||
            !std::getline(ls, value)) {
            throw ConfigError("malformed initial field row '" + line + "'");
        }
        const auto k = parse_value<std::size_t>("initial.file", cell);
        if (k >= values.size()) throw ConfigError("initial field row for unknown cell " + cell);
        values[k] = parse_value<double>("initial.file", value);
    }
    for (double v : values) {
        if (std::isnan(v)) throw ConfigError("initial field CSV does not cover every cell");
    }
    return CellField(mesh, std::move(values));
}

double initial_l2_norm_squared(const ExperimentConfig& c, const MeshPtr& mesh) {
    if (c.initial.kind == "csv") return l2_norm_squared(initial_field(c, mesh));
    return l2_norm_squared(initial_condition(c), *mesh);
}

}  // namespace stochfv
