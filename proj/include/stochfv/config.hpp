#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "stochfv/analysis.hpp"
#include "stochfv/mesh.hpp"
#include "stochfv/noise.hpp"

namespace stochfv {

/// Bad or incomplete configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct MeshSpec {
    std::string family = "uniform";  // uniform | voronoi | file
    std::size_t nx = 0;
    std::size_t ny = 0;
    double jitter = 0.3;
    std::uint64_t seed = 1;
    std::string file;
};

struct InitialSpec {
    std::string kind = "cosine";  // constant | cosine | weierstrass | csv
    double value = 1.0;           // constant value, or amplitude of the others
    int kx = 1;
    int ky = 1;
    double gamma = 0.25;
    int terms = 6;
    std::string file;
};

/// Parsed INI experiment file. Sections: domain, mesh, time, noise, initial,
/// run, ensemble, converge, verify. Unknown sections or keys are rejected.
struct ExperimentConfig {
    Rectangle domain;
    MeshSpec mesh;
    std::optional<double> T;
    std::optional<std::size_t> N;
    double tolerance = 1e-10;
    NoiseModel noise;
    InitialSpec initial;

    std::uint64_t seed = 0;
    std::size_t samples = 100;
    unsigned parallel = 1;
    std::string output = ".";
    bool vtk = false;

    // ensemble
    double alpha = 0.25;
    std::vector<double> tau_fractions{1.0 / 64, 1.0 / 32, 1.0 / 16, 1.0 / 8};
    std::optional<Vec2> eta;
    double perturbation = 0.1;
    std::vector<LevelSpec> ensemble_levels;

    // converge
    std::vector<LevelSpec> levels;
    std::vector<double> p_values{1.0, 1.9};
    std::string reference = "coupled";  // coupled | exact

    // verify
    std::string fault = "none";
    std::size_t verify_fields = 100;

    /// Base directory of the config file, used to resolve relative paths.
    std::string base_dir = ".";

    double require_T() const;
    std::size_t require_N() const;
    std::size_t require_nx() const;
    std::size_t require_ny() const;
};

ExperimentConfig parse_config_string(const std::string& text, const std::string& base_dir = ".");
ExperimentConfig load_config(const std::string& path);

/// "8x8:16 16x16:64" -> levels; throws ConfigError on syntax errors.
std::vector<LevelSpec> parse_levels(const std::string& text);

/// Builds the configured mesh; throws ConfigError on missing keys.
MeshPtr build_mesh(const ExperimentConfig& config);

/// The configured initial condition as a function (not available for csv).
InitialCondition initial_condition(const ExperimentConfig& config);

/// Projected initial field (reads the CSV for kind = csv).
CellField initial_field(const ExperimentConfig& config, const MeshPtr& mesh);

/// Continuous ||u0||^2 (for csv: the discrete norm of the field).
double initial_l2_norm_squared(const ExperimentConfig& config, const MeshPtr& mesh);

}  // namespace stochfv
