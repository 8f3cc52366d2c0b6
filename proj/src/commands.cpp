#include "stochfv/commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "stochfv/verify.hpp"

namespace stochfv {

namespace fs = std::filesystem;

namespace {

std::ofstream open_output(const std::string& dir, const std::string& name) {
    std::ofstream os(fs::path(dir) / name);
    if (!os) throw std::runtime_error("cannot write " + (fs::path(dir) / name).string());
    os.precision(17);
    return os;
}

unsigned threads_for(const ExperimentConfig& c, const CommandOptions& o) {
    const unsigned k = o.parallel.value_or(c.parallel);
    if (k == 0) throw ConfigError("parallelism must be at least 1");
    return k;
}

SchemeConfig scheme_for(const ExperimentConfig& c) {
    SchemeConfig s;
    s.T = c.require_T();
    s.N = c.require_N();
    s.tolerance = c.tolerance;
    return s;
}

// Builds the mesh and prints the violation list; empty result means inadmissible.
MeshPtr admissible_mesh(const ExperimentConfig& c, std::ostream& out) {
    const MeshPtr mesh = build_mesh(c);
    if (mesh->num_cells() == 0) throw ConfigError("mesh has no cells");
    const auto violations = validate_admissibility(*mesh);
    if (violations.empty()) return mesh;
    out << "mesh is not admissible (" << violations.size() << " violations)\n";
    for (const auto& v : violations) {
        out << "  " << to_string(v.kind) << " id=" << v.id << " residual=" << v.residual << ": " << v.message << '\n';
    }
    return nullptr;
}

void write_report(const std::string& dir, const CheckReport& report, std::ostream& text) {
    auto os = open_output(dir, report.name + ".csv");
    report.write_csv(os);
    report.write_text(text);
}

}  // namespace

std::string output_directory(const ExperimentConfig& c, const CommandOptions& o) {
    fs::path dir;
    if (o.out) {
        dir = *o.out;
    } else if (const char* env = std::getenv("STOCHFV_OUT"); env && *env) {
        dir = env;
    } else {
        dir = fs::path(c.output);
        if (dir.is_relative()) dir = fs::path(c.base_dir) / dir;
    }
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw ConfigError("cannot create output directory '" + dir.string() + "'");
    return dir.string();
}

int cmd_mesh_info(const ExperimentConfig& c, const CommandOptions& o, std::ostream& out) {
    const MeshPtr mesh = build_mesh(c);
    if (mesh->num_cells() == 0) throw ConfigError("mesh has no cells");
    write_summary(out, *mesh);
    const auto violations = validate_admissibility(*mesh);
    if (o.vtk) {
        auto os = open_output(output_directory(c, o), "mesh.vtk");
        write_vtk(os, *mesh);
    }
    if (violations.empty()) {
        out << "admissible: yes\n";
        return kExitPass;
    }
    out << "admissible: no (" << violations.size() << " violations)\n";
    for (const auto& v : violations) {
        out << "  " << to_string(v.kind) << " id=" << v.id << " residual=" << v.residual << ": " << v.message << '\n';
    }
    return kExitCheckFailed;
}

int cmd_run(const ExperimentConfig& c, const CommandOptions& o, std::ostream& out) {
    const SchemeConfig scheme = scheme_for(c);
    const MeshPtr mesh = admissible_mesh(c, out);
    if (!mesh) return kExitCheckFailed;
    const CellField u0 = initial_field(c, mesh);
    const std::string dir = output_directory(c, o);
    const TpfaOperator op = assemble(mesh);
    const BrownianPath path = realization_path(c.seed, 0, scheme.N, scheme.T);
    const SpaceTimeField u = solve_trajectory(op, scheme, c.noise, path, u0);

    {
        auto os = open_output(dir, "trajectory.csv");
        write_csv(os, u);
    }
    {
        auto os = open_output(dir, "path.csv");
        write_path_csv(os, path);
    }
    {
        auto os = open_output(dir, "norms.csv");
        os << "step,t,W,l2_sq,h1_sq,mass\n";
        for (std::size_t n = 0; n <= u.N(); ++n) {
            double mass = 0.0;
            for (std::size_t k = 0; k < mesh->num_cells(); ++k) mass += op.mass[k] * u[n][k];
            os << n << ',' << u.time(n) << ',' << path.W(n) << ',' << l2_norm_squared(u[n]) << ','
               << h1_seminorm_squared(u[n]) << ',' << mass << '\n';
        }
    }
    if (o.vtk || c.vtk) {
        for (std::size_t n = 0; n <= u.N(); ++n) {
            char name[32];
            std::snprintf(name, sizeof name, "u_%05zu.vtk", n);
            auto os = open_output(dir, name);
            write_vtk(os, u[n]);
        }
    }
    out << "run: " << mesh->num_cells() << " cells, N=" << u.N() << ", T=" << u.T() << ", noise " << c.noise.describe()
        << '\n'
        << "  ||u^N||^2 = " << l2_norm_squared(u[u.N()]) << '\n'
        << "  output in " << dir << '\n';
    return kExitPass;
}

int cmd_ensemble(const ExperimentConfig& c, const CommandOptions& o, std::ostream& out) {
    const SchemeConfig scheme = scheme_for(c);
    const unsigned threads = threads_for(c, o);
    const MeshPtr mesh = admissible_mesh(c, out);
    if (!mesh) return kExitCheckFailed;
    const CellField u0 = initial_field(c, mesh);
    const double u0_l2_sq = initial_l2_norm_squared(c, mesh);
    const std::string dir = output_directory(c, o);
    const TpfaOperator op = assemble(mesh);
    const std::size_t M = c.samples;

    std::ostringstream text;
    text.precision(17);
    bool all = true;
    auto record = [&](const CheckReport& r) {
        write_report(dir, r, text);
        all = all && r.passed;
    };

    const EnsembleStats stats = run_ensemble(op, scheme, c.noise, u0, M, c.seed, threads);
    {
        auto os = open_output(dir, "ensemble_stats.csv");
        os << "step,t,l2_sq,l2_sq_se,h1_energy,h1_energy_se,increments_sq,increments_sq_se,energy_lhs,energy_lhs_se\n";
        for (std::size_t n = 0; n <= stats.N; ++n) {
            os << n << ',' << stats.dt() * static_cast<double>(n) << ',' << stats.l2_sq[n].mean << ','
               << stats.l2_sq[n].se << ',' << stats.h1_energy[n].mean << ',' << stats.h1_energy[n].se << ','
               << stats.increments_sq[n].mean << ',' << stats.increments_sq[n].se << ',' << stats.energy_lhs[n].mean
               << ',' << stats.energy_lhs[n].se << '\n';
        }
    }
    record(energy_estimate_check(stats, c.noise, u0_l2_sq));

    const Vec2 eta = c.eta.value_or(Vec2{0.5 * mesh->mesh_size, 0.25 * mesh->mesh_size});
    const SpaceTimeField first = solve_trajectory(op, scheme, c.noise, realization_path(c.seed, 0, scheme.N, scheme.T), u0);
    record(space_translate_check(first, eta));

    TimeTranslateOptions tt;
    for (double f : c.tau_fractions) tt.taus.push_back(f * scheme.T);
    record(time_translate_check(op, scheme, c.noise, u0, M, tt, c.seed, threads));

    const CellField delta = random_field(mesh, c.seed, 7);
    CellField u0b = u0;
    for (std::size_t k = 0; k < u0b.size(); ++k) u0b[k] += c.perturbation * delta[k];
    record(pathwise_uniqueness_check(op, scheme, c.noise, u0, u0b, M, c.seed, threads));
    if (c.noise.kind != NoiseModel::Kind::Sine) {
        // Linearity is a property of the scheme; keep CG error out of the small differences.
        SchemeConfig tight = scheme;
        tight.tolerance = std::min(scheme.tolerance, 1e-13);
        record(difference_scaling_check(op, tight, c.noise, u0, delta, c.perturbation, 2.0 * c.perturbation, M,
                                        c.seed, 1e-10, threads));
    }

    if (!c.ensemble_levels.empty()) {
        require_nested(c.ensemble_levels);
        const InitialCondition f = initial_condition(c);
        std::vector<EnsembleStats> per_level;
        for (const auto& s : c.ensemble_levels) {
            const auto m = std::make_shared<const Mesh>(build_uniform_rect(s.nx, s.ny, c.domain));
            const TpfaOperator lop = assemble(m);
            SchemeConfig ls = scheme;
            ls.N = s.N;
            per_level.push_back(run_ensemble(lop, ls, c.noise, project_initial(f, m), M, c.seed, threads));
        }
        record(max_bound_check(per_level, 0.1));
        record(lr_gap_check(per_level, c.noise, u0_l2_sq));
        record(gagliardo_bound_check(c.ensemble_levels, c.domain, scheme.T, c.noise, f, c.alpha, M, c.seed, threads,
                                     0.1));
    }

    {
        auto os = open_output(dir, "ensemble_report.txt");
        os << text.str();
    }
    out << "ensemble: M=" << M << ", " << mesh->num_cells() << " cells, N=" << scheme.N << ", noise "
        << c.noise.describe() << '\n'
        << text.str();
    return all ? kExitPass : kExitCheckFailed;
}

int cmd_converge(const ExperimentConfig& c, const CommandOptions& o, std::ostream& out) {
    const double T = c.require_T();
    if (c.levels.empty()) throw ConfigError("missing config key 'converge.levels'");
    require_nested(c.levels);
    const std::string dir = output_directory(c, o);
    ConvergenceReport report;
    if (c.reference == "exact") {
        if (c.noise.kind != NoiseModel::Kind::Zero) throw ConfigError("converge.reference = exact needs noise.kind = zero");
        if (c.initial.kind != "cosine" || c.initial.value != 1.0) {
            throw ConfigError("converge.reference = exact needs initial.kind = cosine with value = 1");
        }
        report = heat_mode_study(c.levels, c.domain, T, c.initial.kx, c.initial.ky);
    } else {
        report = convergence_study(c.levels, c.domain, T, c.noise, initial_condition(c), c.p_values, c.samples, c.seed,
                                   threads_for(c, o));
    }
    {
        auto os = open_output(dir, "convergence.csv");
        report.write_csv(os);
    }
    std::ostringstream text;
    report.write_text(text);
    {
        auto os = open_output(dir, "convergence.txt");
        os << text.str();
    }
    out << "converge (" << c.reference << " reference)\n" << text.str();
    return report.monotone ? kExitPass : kExitCheckFailed;
}

int cmd_verify(const ExperimentConfig& c, const CommandOptions& o, std::ostream& out) {
    const SchemeConfig scheme = scheme_for(c);
    VerifyFault fault;
    try {
        fault = parse_verify_fault(c.fault);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    const MeshPtr mesh = admissible_mesh(c, out);
    if (!mesh) return kExitCheckFailed;
    const std::string dir = output_directory(c, o);
    const TpfaOperator op = assemble(mesh);
    const CellField u0 = initial_field(c, mesh);
    const std::size_t count = c.verify_fields;

    std::ostringstream text;
    bool all = true;
    auto record = [&](const CheckReport& r) {
        write_report(dir, r, text);
        all = all && r.passed;
    };
    record(gradient_identity_check(mesh, count, c.seed, 1e-12, fault));
    record(partial_integration_check(mesh, count, c.seed, 1e-12, fault));
    record(mass_balance_check(op, scheme, c.noise, u0, realization_path(c.seed, 0, scheme.N, scheme.T), 1e-10, fault));
    record(operator_spd_check(op, scheme.dt(), fault));
    record(dense_oracle_check(op, scheme.dt(), count, c.seed, 1e-8, 1e-12, fault));
    {
        auto os = open_output(dir, "verify_report.txt");
        os << text.str();
    }
    out << "verify: " << mesh->num_cells() << " cells, fault " << to_string(fault) << '\n' << text.str();
    return all ? kExitPass : kExitCheckFailed;
}

int run_command(const std::string& command, const std::string& config_path, const CommandOptions& options,
                std::ostream& out, std::ostream& err) {
    try {
        const ExperimentConfig config = load_config(config_path);
        if (command == "mesh-info") return cmd_mesh_info(config, options, out);
        if (command == "run") return cmd_run(config, options, out);
        if (command == "ensemble") return cmd_ensemble(config, options, out);
        if (command == "converge") return cmd_converge(config, options, out);
        if (command == "verify") return cmd_verify(config, options, out);
        err << "unknown command '" << command << "'\n";
        return kExitConfigError;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const std::invalid_argument& e) {
        err << "invalid input: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const SolverError& e) {
        err << "solver failure: " << e.what() << " (residual " << e.residual() << ")\n";
        return kExitCheckFailed;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitCheckFailed;
    }
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Finite-volume solver and verification suite for the stochastic heat equation"};
    app.require_subcommand(1);
    std::string config_path;
    CommandOptions options;
    std::string out_dir;
    unsigned parallel = 0;
    const char* names[][2] = {
        {"mesh-info", "Build the mesh and report h, reg and admissibility"},
        {"run", "Single trajectory with CSV (and optional VTK) output"},
        {"ensemble", "Monte Carlo ensemble with the stability checks"},
        {"converge", "Refinement study against a coupled or exact reference"},
        {"verify", "Discrete identities, mass balance, SPD and dense-oracle checks"},
    };
    for (const auto& [name, help] : names) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "Experiment file (INI)")->required();
        sub->add_option("--out", out_dir, "Output directory");
        sub->add_flag("--vtk", options.vtk, "Also write legacy-VTK files");
        sub->add_option("--parallel", parallel, "Worker threads")->check(CLI::PositiveNumber);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitPass;
    } catch (const CLI::ParseError& e) {
        err << e.what() << '\n';
        return kExitConfigError;
    }
    if (!out_dir.empty()) options.out = out_dir;
    if (parallel > 0) options.parallel = parallel;
    const std::string command = app.get_subcommands().front()->get_name();
    return run_command(command, config_path, options, out, err);
}

}  // namespace stochfv
