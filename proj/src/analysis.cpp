#include "stochfv/analysis.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>

#include "stochfv/rng.hpp"

namespace stochfv {

Estimate estimate(const std::vector<double>& samples) {
    const std::size_t M = samples.size();
    if (M < 2) throw std::invalid_argument("estimate: need at least two samples");
    if (std::all_of(samples.begin(), samples.end(), [&](double x) { return x == samples.front(); })) {
        return {samples.front(), 0.0};
    }
    const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(M);
    double ss = 0.0;
    for (double x : samples) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / static_cast<double>(M - 1) / static_cast<double>(M))};
}

namespace {

std::string format_number(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

double joint_se(const Estimate& a, const Estimate& b) { return std::sqrt(a.se * a.se + b.se * b.se); }

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

std::vector<Estimate> estimates_by_index(const std::vector<std::vector<double>>& per_sample, std::size_t count) {
    std::vector<Estimate> out(count);
    std::vector<double> column(per_sample.size());
    for (std::size_t i = 0; i < count; ++i) {
        for (std::size_t r = 0; r < per_sample.size(); ++r) column[r] = per_sample[r][i];
        out[i] = estimate(column);
    }
    return out;
}

}  // namespace

void CheckReport::write_csv(std::ostream& os) const {
    for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
    os << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_number(row[i]);
        os << '\n';
    }
}

void CheckReport::write_text(std::ostream& os) const {
    os << (passed ? "PASS " : "FAIL ") << name << ": " << summary << '\n';
    for (const auto& [key, value] : metrics) os << "  " << key << " = " << format_number(value) << '\n';
}

BrownianPath realization_path(std::uint64_t master_seed, std::size_t r, std::size_t N, double T) {
    return sample_path(derive_seed(master_seed, r), N, T);
}

EnsembleStats run_ensemble(const TpfaOperator& op, const SchemeConfig& config, const NoiseModel& model,
                           const CellField& u0, std::size_t M, std::uint64_t master_seed, unsigned threads) {
    if (M < 2) throw std::invalid_argument("run_ensemble: need M >= 2");
    config.validate();
    const std::size_t N = config.N;
    const double dt = config.dt();
    struct Sample {
        std::vector<double> l2, h1, inc, lhs;
        double max = 0.0;
    };
    const SemiImplicitStepper stepper(op, config);
    auto samples = map_realizations(M, threads, [&](std::size_t r) {
        const BrownianPath path = realization_path(master_seed, r, N, config.T);
        Sample s;
        s.l2.resize(N + 1);
        s.h1.assign(N + 1, 0.0);
        s.inc.assign(N + 1, 0.0);
        s.lhs.resize(N + 1);
        CellField cur = u0;
        CellField next = u0;
        s.l2[0] = l2_norm_squared(cur);
        s.max = s.l2[0];
        s.lhs[0] = s.l2[0];
        for (std::size_t n = 0; n < N; ++n) {
            const std::vector<double> current(cur.values().begin(), cur.values().end());
            stepper.step(current, model, path.increments[n], next.data());
            s.l2[n + 1] = l2_norm_squared(next);
            s.h1[n + 1] = s.h1[n] + dt * h1_seminorm_squared(next);
            s.inc[n + 1] = s.inc[n] + l2_distance_squared(next, cur);
            s.lhs[n + 1] = s.l2[n + 1] + s.inc[n + 1] + 2.0 * s.h1[n + 1];
            s.max = std::max(s.max, s.l2[n + 1]);
            std::swap(cur, next);
        }
        if (!std::isfinite(s.max)) throw std::runtime_error("non-finite solution");
        return s;
    });

    EnsembleStats stats;
    stats.M = M;
    stats.N = N;
    stats.T = config.T;
    stats.domain_area = op.mesh->domain_area;
    stats.initial_l2_sq = l2_norm_squared(u0);
    auto collect = [&](auto member) {
        std::vector<std::vector<double>> v(M);
        for (std::size_t r = 0; r < M; ++r) v[r] = samples[r].*member;
        return estimates_by_index(v, N + 1);
    };
    stats.l2_sq = collect(&Sample::l2);
    stats.h1_energy = collect(&Sample::h1);
    stats.increments_sq = collect(&Sample::inc);
    stats.energy_lhs = collect(&Sample::lhs);
    std::vector<double> maxes(M), gaps(M);
    for (std::size_t r = 0; r < M; ++r) {
        maxes[r] = samples[r].max;
        gaps[r] = dt * samples[r].inc[N];
    }
    stats.max_l2_sq = estimate(maxes);
    stats.lr_gap = estimate(gaps);
    return stats;
}

double energy_constant_C1(const NoiseModel& model, double T, double domain_area, double u0_l2_sq,
                          double uh0_l2_sq) {
    const double CL = model.growth_CL();
    const double upsilon = ((1.0 + 2.0 * CL * T) * uh0_l2_sq + 2.0 * CL * domain_area * T) * std::exp(2.0 * CL * T);
    return u0_l2_sq + 2.0 * CL * T * (upsilon + domain_area);
}

CheckReport energy_estimate_check(const EnsembleStats& stats, const NoiseModel& model, double u0_l2_sq) {
    CheckReport report;
    report.name = "energy_estimate";
    const double C1 = energy_constant_C1(model, stats.T, stats.domain_area, u0_l2_sq, stats.initial_l2_sq);
    report.columns = {"n", "lhs", "se", "C1"};
    report.passed = std::isfinite(C1);
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t n = 0; n <= stats.N; ++n) {
        const auto& e = stats.energy_lhs[n];
        report.rows.push_back({static_cast<double>(n), e.mean, e.se, C1});
        const double lower = e.mean - 2.0 * e.se;
        if (!(std::isfinite(e.mean) && lower <= C1)) report.passed = false;
        worst = std::max(worst, lower / C1);
    }
    report.metrics["C1"] = C1;
    report.metrics["max_lhs_minus_2se_over_C1"] = worst;
    report.summary = "max (LHS_n - 2 SE) / C1 = " + format_number(worst);
    return report;
}

CheckReport max_bound_check(const std::vector<EnsembleStats>& levels, double relative_slack) {
    CheckReport report;
    report.name = "max_bound";
    report.columns = {"level", "N", "M", "mean", "se"};
    if (levels.empty()) throw std::invalid_argument("max_bound_check: no levels");
    report.passed = true;
    Estimate running_max = levels.front().max_l2_sq;
    double worst_excess = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < levels.size(); ++i) {
        const auto& e = levels[i].max_l2_sq;
        report.rows.push_back({static_cast<double>(i), static_cast<double>(levels[i].N), static_cast<double>(levels[i].M), e.mean,
                               e.se});
        if (!std::isfinite(e.mean)) report.passed = false;
        if (i > 0) {
            const double allowed = running_max.mean + 4.0 * joint_se(running_max, e) + relative_slack * running_max.mean;
            worst_excess = std::max(worst_excess, e.mean - allowed);
            if (e.mean > allowed) report.passed = false;
            if (e.mean > running_max.mean) running_max = e;
        }
    }
    report.metrics["worst_excess"] = levels.size() > 1 ? worst_excess : 0.0;
    report.summary = "E max_n ||u^n||^2 over " + std::to_string(levels.size()) + " levels, worst excess " +
                     format_number(report.metrics["worst_excess"]);
    return report;
}

namespace {

struct Overlap {
    std::size_t k, l;
    double area;
};

// Pairs (K, L) with |K intersect (L - eta)| > 0.
std::vector<Overlap> shifted_overlaps(const Mesh& mesh, const Vec2& eta) {
    const std::size_t n = mesh.num_cells();
    std::vector<std::vector<Vec2>> polys(n);
    std::vector<std::array<double, 4>> box(n);  // xmin, xmax, ymin, ymax
    for (std::size_t k = 0; k < n; ++k) {
        polys[k] = mesh.cell_polygon(k);
        box[k] = {std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
                  std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
        for (const auto& p : polys[k]) {
            box[k][0] = std::min(box[k][0], p.x);
            box[k][1] = std::max(box[k][1], p.x);
            box[k][2] = std::min(box[k][2], p.y);
            box[k][3] = std::max(box[k][3], p.y);
        }
    }
    std::vector<Overlap> out;
    std::vector<Vec2> shifted;
    for (std::size_t l = 0; l < n; ++l) {
        shifted.clear();
        for (const auto& p : polys[l]) shifted.push_back(p - eta);
        const double sx0 = box[l][0] - eta.x, sx1 = box[l][1] - eta.x;
        const double sy0 = box[l][2] - eta.y, sy1 = box[l][3] - eta.y;
        for (std::size_t k = 0; k < n; ++k) {
            if (box[k][1] <= sx0 || box[k][0] >= sx1 || box[k][3] <= sy0 || box[k][2] >= sy1) continue;
            const auto inter = convex_intersection(polys[k], shifted);
            if (inter.size() < 3) continue;
            const double a = signed_area(inter);
            if (a > 0.0) out.push_back({k, l, a});
        }
    }
    return out;
}

double translate_lhs(const CellField& w, const std::vector<Overlap>& overlaps) {
    double cross_term = 0.0;
    for (const auto& o : overlaps) cross_term += w[o.k] * w[o.l] * o.area;
    return std::max(0.0, 2.0 * l2_norm_squared(w) - 2.0 * cross_term);
}

}  // namespace

double space_translate_lhs(const CellField& w, const Vec2& eta) {
    return translate_lhs(w, shifted_overlaps(w.mesh(), eta));
}

CheckReport space_translate_check(const SpaceTimeField& trajectory, const Vec2& eta) {
    const double len = norm(eta);
    if (!(len > 0.0)) throw std::invalid_argument("space_translate_check: |eta| must be positive");
    const auto overlaps = shifted_overlaps(trajectory.mesh(), eta);
    CheckReport report;
    report.name = "space_translate";
    report.columns = {"n", "t", "lhs", "bound", "ratio"};
    report.passed = true;
    double max_ratio = 0.0;
    for (std::size_t n = 0; n <= trajectory.N(); ++n) {
        const CellField& u = trajectory[n];
        const double lhs = translate_lhs(u, overlaps);
        const double bound = len * (h1_seminorm_squared(u) + l2_norm_squared(u));
        const double ratio = bound > 0.0 ? lhs / bound : (lhs == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
        report.rows.push_back({static_cast<double>(n), trajectory.time(n), lhs, bound, ratio});
        if (!std::isfinite(ratio)) report.passed = false;
        max_ratio = std::max(max_ratio, ratio);
    }
    report.metrics["max_ratio"] = max_ratio;
    report.summary = "max ratio " + format_number(max_ratio) + " for |eta| = " + format_number(len);
    return report;
}

double time_translate_integral(const SpaceTimeField& u, const SpaceTimeField& ito, TimeMode mode, double tau) {
    if (u.N() != ito.N() || u.T() != ito.T() || u.mesh_ptr() != ito.mesh_ptr()) {
        throw std::invalid_argument("time_translate_integral: grids differ");
    }
    if (mode == TimeMode::Right) throw std::invalid_argument("time_translate_integral: Left or Affine only");
    const double T = u.T();
    if (!(tau > 0.0 && tau < T)) throw std::invalid_argument("time_translate_integral: tau must lie in (0, T)");
    const std::size_t N = u.N();
    const double end = T - tau;
    std::vector<double> breaks{0.0, end};
    for (std::size_t n = 0; n <= N; ++n) {
        const double t = u.time(n);
        if (t > 0.0 && t < end) breaks.push_back(t);
        if (t - tau > 0.0 && t - tau < end) breaks.push_back(t - tau);
    }
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

    const auto& cells = u.mesh().cells;
    const double dt = u.dt();
    // phi on interval n at time t (t in the closure of [t_n, t_{n+1}]).
    auto phi = [&](std::size_t n, double t, std::size_t k) {
        double m = ito[n][k];
        if (mode == TimeMode::Affine) m += (t - u.time(n)) / dt * (ito[n + 1][k] - ito[n][k]);
        return u[n][k] - m;
    };
    auto integrand = [&](std::size_t n0, std::size_t n1, double t) {
        double s = 0.0;
        for (std::size_t k = 0; k < cells.size(); ++k) {
            const double d = phi(n1, t + tau, k) - phi(n0, t, k);
            s += cells[k].area * d * d;
        }
        return s;
    };
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        const double a = breaks[i];
        const double b = breaks[i + 1];
        const double mid = 0.5 * (a + b);
        const std::size_t n0 = u.interval(mid);
        const std::size_t n1 = u.interval(mid + tau);
        if (mode == TimeMode::Left) {
            total += (b - a) * integrand(n0, n1, mid);
        } else {
            total += (b - a) / 6.0 * (integrand(n0, n1, a) + 4.0 * integrand(n0, n1, mid) + integrand(n0, n1, b));
        }
    }
    return total;
}

CheckReport time_translate_check(const TpfaOperator& op, const SchemeConfig& config, const NoiseModel& model,
                                 const CellField& u0, std::size_t M, const TimeTranslateOptions& options,
                                 std::uint64_t master_seed, unsigned threads) {
    if (options.taus.size() < 2) throw std::invalid_argument("time_translate_check: need at least two tau values");
    for (double tau : options.taus) {
        if (!(tau > 0.0 && tau < config.T)) throw std::invalid_argument("time_translate_check: tau outside (0, T)");
    }
    const std::size_t n_tau = options.taus.size();
    auto samples = map_realizations(M, threads, [&](std::size_t r) {
        const BrownianPath path = realization_path(master_seed, r, config.N, config.T);
        const SpaceTimeField u = solve_trajectory(op, config, model, path, u0);
        const SpaceTimeField ito = ito_partial_sums(model, u, path);
        std::vector<double> v(2 * n_tau);
        for (std::size_t i = 0; i < n_tau; ++i) {
            v[i] = time_translate_integral(u, ito, reconstruction_for(ItoConvention::Left), options.taus[i]);
            v[n_tau + i] = time_translate_integral(u, ito, reconstruction_for(ItoConvention::Running), options.taus[i]);
        }
        return v;
    });
    const auto est = estimates_by_index(samples, 2 * n_tau);

    CheckReport report;
    report.name = "time_translate";
    report.columns = {"tau", "left_mean", "left_se", "left_ratio", "running_mean", "running_se", "running_ratio"};
    std::vector<double> log_tau(n_tau);
    for (std::size_t i = 0; i < n_tau; ++i) {
        const double tau = options.taus[i];
        log_tau[i] = std::log(tau);
        report.rows.push_back({tau, est[i].mean, est[i].se, est[i].mean / tau, est[n_tau + i].mean, est[n_tau + i].se,
                               est[n_tau + i].mean / tau});
    }
    report.passed = true;
    std::ostringstream summary;
    // Translates at roundoff level relative to T ||u0||^2 count as zero.
    const double floor = 1e-24 * config.T * std::max(l2_norm_squared(u0), 1.0);
    for (int c = 0; c < 2; ++c) {
        const char* label = c == 0 ? "left" : "running";
        std::vector<double> log_mean(n_tau), ratio(n_tau);
        bool zero = true;
        for (std::size_t i = 0; i < n_tau; ++i) {
            const double m = est[c * n_tau + i].mean;
            zero = zero && std::abs(m) <= floor;
            log_mean[i] = std::log(m);
            ratio[i] = m / options.taus[i];
        }
        if (zero) {
            // Stationary trajectory: the translate vanishes identically.
            report.metrics[std::string(label) + "_slope"] = 0.0;
            report.metrics[std::string(label) + "_spread"] = 1.0;
            summary << label << ": identically zero; ";
            continue;
        }
        const double slope = least_squares_slope(log_tau, log_mean);
        const auto [lo, hi] = std::minmax_element(ratio.begin(), ratio.end());
        const double spread = *hi / *lo;
        report.metrics[std::string(label) + "_slope"] = slope;
        report.metrics[std::string(label) + "_spread"] = spread;
        const bool ok = std::isfinite(slope) && slope >= options.slope_min && slope <= options.slope_max &&
                        spread < options.max_spread;
        report.passed = report.passed && ok;
        summary << label << ": slope " << format_number(slope) << ", ratio spread " << format_number(spread) << "; ";
    }
    report.summary = summary.str();
    return report;
}

void require_nested(const std::vector<LevelSpec>& levels) {
    if (levels.empty()) throw std::invalid_argument("no refinement levels given");
    for (std::size_t i = 0; i < levels.size(); ++i) {
        const auto& b = levels[i];
        if (b.nx == 0 || b.ny == 0 || b.N == 0) throw std::invalid_argument("level " + std::to_string(i) + " has a zero count");
        if (i == 0) continue;
        const auto& a = levels[i - 1];
        if (b.nx % a.nx != 0 || b.ny % a.ny != 0 || b.N % a.N != 0) {
            throw std::invalid_argument("levels " + std::to_string(i - 1) + " and " + std::to_string(i) +
                                        " are not nested (integer refinement factors required)");
        }
    }
}

namespace {

struct Level {
    LevelSpec spec;
    MeshPtr mesh;
    TpfaOperator op;
    SchemeConfig config;
    CellField u0;
};

std::vector<Level> build_levels(const std::vector<LevelSpec>& specs, const Rectangle& domain, double T,
                                const InitialCondition& u0) {
    std::vector<Level> out;
    for (const auto& s : specs) {
        Level level;
        level.spec = s;
        level.mesh = std::make_shared<const Mesh>(build_uniform_rect(s.nx, s.ny, domain));
        level.op = assemble(level.mesh);
        level.config.T = T;
        level.config.N = s.N;
        level.config.validate();
        level.u0 = project_initial(u0, level.mesh);
        out.push_back(std::move(level));
    }
    return out;
}

double level_h(const LevelSpec& s, const Rectangle& domain) {
    return std::hypot(domain.width() / static_cast<double>(s.nx), domain.height() / static_cast<double>(s.ny));
}

}  // namespace

CheckReport gagliardo_bound_check(const std::vector<LevelSpec>& specs, const Rectangle& domain, double T,
                                  const NoiseModel& model, const InitialCondition& u0, double alpha, std::size_t M,
                                  std::uint64_t master_seed, unsigned threads, double relative_slack) {
    require_nested(specs);
    const auto levels = build_levels(specs, domain, T, u0);
    const std::size_t N_fine = specs.back().N;
    CheckReport report;
    report.name = "gagliardo_bound";
    report.columns = {"level", "nx", "ny", "N", "space_mean", "space_se", "time_mean", "time_se"};
    report.passed = true;
    std::array<Estimate, 2> running{};
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < levels.size(); ++i) {
        const Level& level = levels[i];
        const GagliardoSpaceKernel kernel(level.mesh, alpha);
        auto samples = map_realizations(M, threads, [&](std::size_t r) {
            const BrownianPath fine = realization_path(master_seed, r, N_fine, T);
            const BrownianPath path = coarsen_path(fine, N_fine / level.spec.N);
            const SpaceTimeField u = solve_trajectory(level.op, level.config, model, path, level.u0);
            double space = 0.0;
            for (std::size_t n = 0; n < u.N(); ++n) space += kernel.seminorm_squared(u[n]);
            space *= u.dt();
            const double time = u.N() >= 2 ? gagliardo_time_seminorm(u, alpha) : 0.0;
            return std::vector<double>{space, time};
        });
        const auto est = estimates_by_index(samples, 2);
        report.rows.push_back({static_cast<double>(i), static_cast<double>(level.spec.nx),
                               static_cast<double>(level.spec.ny), static_cast<double>(level.spec.N), est[0].mean,
                               est[0].se, est[1].mean, est[1].se});
        for (int c = 0; c < 2; ++c) {
            if (!std::isfinite(est[c].mean)) report.passed = false;
            if (i == 0) {
                running[c] = est[c];
                continue;
            }
            const double allowed = running[c].mean + 4.0 * joint_se(running[c], est[c]) + relative_slack * running[c].mean;
            if (est[c].mean > allowed) report.passed = false;
            if (running[c].mean > 0.0) worst = std::max(worst, (est[c].mean - allowed) / running[c].mean);
            if (est[c].mean > running[c].mean) running[c] = est[c];
        }
    }
    report.metrics["worst_relative_excess"] = levels.size() > 1 ? worst : 0.0;
    report.summary = "space and time seminorm estimates over " + std::to_string(levels.size()) +
                     " levels, worst relative excess " + format_number(report.metrics["worst_relative_excess"]);
    return report;
}

CheckReport pathwise_uniqueness_check(const TpfaOperator& op, const SchemeConfig& config, const NoiseModel& model,
                                      const CellField& u0_a, const CellField& u0_b, std::size_t M,
                                      std::uint64_t master_seed, unsigned threads) {
    const bool identical = std::equal(u0_a.values().begin(), u0_a.values().end(), u0_b.values().begin(),
                                      u0_b.values().end());
    struct Sample {
        std::vector<double> diff;
        bool bitwise_equal = true;
    };
    auto samples = map_realizations(M, threads, [&](std::size_t r) {
        const BrownianPath path = realization_path(master_seed, r, config.N, config.T);
        const SpaceTimeField a = solve_trajectory(op, config, model, path, u0_a);
        const SpaceTimeField b = solve_trajectory(op, config, model, path, u0_b);
        Sample s;
        s.diff.resize(config.N + 1);
        for (std::size_t n = 0; n <= config.N; ++n) {
            s.diff[n] = l2_distance_squared(a[n], b[n]);
            s.bitwise_equal = s.bitwise_equal && std::equal(a[n].values().begin(), a[n].values().end(),
                                                            b[n].values().begin(), b[n].values().end());
        }
        return s;
    });
    std::vector<std::vector<double>> diffs(M);
    bool all_equal = true;
    for (std::size_t r = 0; r < M; ++r) {
        diffs[r] = samples[r].diff;
        all_equal = all_equal && samples[r].bitwise_equal;
    }
    const auto est = estimates_by_index(diffs, config.N + 1);
    const double envelope = std::exp((1.0 + model.growth_CL()) * config.T);
    const double initial = l2_distance_squared(u0_a, u0_b);
    const double bound = envelope * initial;

    CheckReport report;
    report.name = "pathwise_uniqueness";
    report.columns = {"n", "mean", "se", "bound"};
    report.passed = true;
    double worst = 0.0;
    for (std::size_t n = 0; n <= config.N; ++n) {
        report.rows.push_back({static_cast<double>(n), est[n].mean, est[n].se, bound});
        if (!(est[n].mean - 2.0 * est[n].se <= bound)) report.passed = false;
        if (bound > 0.0) worst = std::max(worst, (est[n].mean - 2.0 * est[n].se) / bound);
    }
    if (identical && !all_equal) report.passed = false;
    report.metrics["envelope"] = envelope;
    report.metrics["max_ratio_to_bound"] = worst;
    report.metrics["identical_initial_data"] = identical ? 1.0 : 0.0;
    report.metrics["bitwise_equal"] = all_equal ? 1.0 : 0.0;
    report.summary = identical ? std::string(all_equal ? "identical data gave bitwise equal trajectories"
                                                       : "identical data gave different trajectories")
                               : "max (E diff - 2 SE) / bound = " + format_number(worst);
    return report;
}

CheckReport difference_scaling_check(const TpfaOperator& op, const SchemeConfig& config, const NoiseModel& model,
                                     const CellField& u0, const CellField& delta, double eps_a, double eps_b,
                                     std::size_t M, std::uint64_t master_seed, double rel_tol, unsigned threads) {
    if (eps_a == 0.0 || eps_b == 0.0) throw std::invalid_argument("difference_scaling_check: eps must be nonzero");
    require_same_mesh(u0, delta, "difference_scaling_check");
    auto shifted = [&](double eps) {
        std::vector<double> v(u0.size());
        for (std::size_t k = 0; k < v.size(); ++k) v[k] = u0[k] + eps * delta[k];
        return CellField(u0.mesh_ptr(), std::move(v));
    };
    const CellField ua0 = shifted(eps_a);
    const CellField ub0 = shifted(eps_b);
    const double expected = std::abs(eps_b / eps_a);
    auto deviations = map_realizations(M, threads, [&](std::size_t r) {
        const BrownianPath path = realization_path(master_seed, r, config.N, config.T);
        const SpaceTimeField base = solve_trajectory(op, config, model, path, u0);
        const SpaceTimeField a = solve_trajectory(op, config, model, path, ua0);
        const SpaceTimeField b = solve_trajectory(op, config, model, path, ub0);
        std::vector<double> dev(config.N + 1, 0.0);
        for (std::size_t n = 0; n <= config.N; ++n) {
            const double da = std::sqrt(l2_distance_squared(a[n], base[n]));
            const double db = std::sqrt(l2_distance_squared(b[n], base[n]));
            dev[n] = da == 0.0 ? (db == 0.0 ? 0.0 : std::numeric_limits<double>::infinity())
                               : std::abs(db / da - expected) / expected;
        }
        return dev;
    });
    CheckReport report;
    report.name = "difference_scaling";
    report.columns = {"n", "max_relative_deviation"};
    double worst = 0.0;
    for (std::size_t n = 0; n <= config.N; ++n) {
        double m = 0.0;
        for (const auto& d : deviations) m = std::max(m, d[n]);
        report.rows.push_back({static_cast<double>(n), m});
        worst = std::max(worst, m);
    }
    report.passed = worst <= rel_tol;
    report.metrics["max_relative_deviation"] = worst;
    report.metrics["expected_ratio"] = expected;
    report.summary = "difference norms scale by " + format_number(expected) + " with max relative deviation " +
                     format_number(worst);
    return report;
}

namespace {

// Fine cell -> coarse cell for nested uniform grids.
std::vector<std::size_t> injection_map(const LevelSpec& coarse, const LevelSpec& fine) {
    const std::size_t rx = fine.nx / coarse.nx;
    const std::size_t ry = fine.ny / coarse.ny;
    std::vector<std::size_t> map(fine.nx * fine.ny);
    for (std::size_t j = 0; j < fine.ny; ++j) {
        for (std::size_t i = 0; i < fine.nx; ++i) map[j * fine.nx + i] = (j / ry) * coarse.nx + (i / rx);
    }
    return map;
}

// Squared L^2(0,T;L^2) distances (left, right) between an injected coarse trajectory and the fine one.
std::array<double, 2> coupled_error_squared(const SpaceTimeField& coarse, const SpaceTimeField& fine,
                                            const std::vector<std::size_t>& map) {
    const std::size_t rt = fine.N() / coarse.N();
    const auto& cells = fine.mesh().cells;
    std::array<double, 2> e{0.0, 0.0};
    for (std::size_t n = 0; n < fine.N(); ++n) {
        const std::size_t nc = n / rt;
        double left = 0.0, right = 0.0;
        for (std::size_t k = 0; k < cells.size(); ++k) {
            const double dl = coarse[nc][map[k]] - fine[n][k];
            const double dr = coarse[nc + 1][map[k]] - fine[n + 1][k];
            left += cells[k].area * dl * dl;
            right += cells[k].area * dr * dr;
        }
        e[0] += fine.dt() * left;
        e[1] += fine.dt() * right;
    }
    return e;
}

void finish_report(ConvergenceReport& report, const Rectangle& domain) {
    const std::size_t np = report.p_values.size();
    report.monotone = true;
    report.orders.clear();
    for (std::size_t i = 0; i + 1 < report.levels.size(); ++i) {
        const auto& a = report.levels[i];
        const auto& b = report.levels[i + 1];
        const double h_ratio = level_h(a.spec, domain) / level_h(b.spec, domain);
        const double ratio = h_ratio != 1.0 ? h_ratio : a.dt / b.dt;
        std::vector<std::array<double, 2>> orders(np);
        for (std::size_t p = 0; p < np; ++p) {
            for (int m = 0; m < 2; ++m) {
                const double ea = a.errors[p][m].mean;
                const double eb = b.errors[p][m].mean;
                orders[p][m] = (ea > 0.0 && eb > 0.0 && ratio != 1.0) ? std::log(ea / eb) / std::log(ratio)
                                                                      : std::numeric_limits<double>::quiet_NaN();
                if (eb > ea) report.monotone = false;
            }
        }
        report.orders.push_back(orders);
    }
}

}  // namespace

void ConvergenceReport::write_csv(std::ostream& os) const {
    os << "level,nx,ny,N,h,dt,p,mode,error,se,order\n";
    for (std::size_t i = 0; i < levels.size(); ++i) {
        const auto& L = levels[i];
        for (std::size_t p = 0; p < p_values.size(); ++p) {
            for (int m = 0; m < 2; ++m) {
                const double order = i > 0 ? orders[i - 1][p][m] : std::numeric_limits<double>::quiet_NaN();
                os << i << ',' << L.spec.nx << ',' << L.spec.ny << ',' << L.spec.N << ',' << format_number(L.h) << ','
                   << format_number(L.dt) << ',' << format_number(p_values[p]) << ',' << (m == 0 ? "left" : "right")
                   << ',' << format_number(L.errors[p][m].mean) << ',' << format_number(L.errors[p][m].se) << ','
                   << format_number(order) << '\n';
            }
        }
    }
}

void ConvergenceReport::write_text(std::ostream& os) const {
    os << "levels " << levels.size() << (monotone ? ", errors non-increasing" : ", errors NOT monotone") << '\n';
    for (std::size_t i = 0; i < levels.size(); ++i) {
        const auto& L = levels[i];
        os << "  " << L.spec.nx << "x" << L.spec.ny << " N=" << L.spec.N;
        for (std::size_t p = 0; p < p_values.size(); ++p) {
            os << "  p=" << p_values[p] << " left " << format_number(L.errors[p][0].mean) << " right "
               << format_number(L.errors[p][1].mean);
            if (i > 0) os << " (orders " << orders[i - 1][p][0] << ", " << orders[i - 1][p][1] << ")";
        }
        os << '\n';
    }
}

ConvergenceReport convergence_study(const std::vector<LevelSpec>& specs, const Rectangle& domain, double T,
                                    const NoiseModel& model, const InitialCondition& u0,
                                    const std::vector<double>& p_values, std::size_t M, std::uint64_t master_seed,
                                    unsigned threads) {
    require_nested(specs);
    if (specs.size() < 2) throw std::invalid_argument("convergence_study: need at least two levels");
    if (p_values.empty()) throw std::invalid_argument("convergence_study: no p values");
    for (double p : p_values) {
        if (!(p >= 1.0 && p < 2.0)) throw std::invalid_argument("convergence_study: p must lie in [1, 2)");
    }
    const auto levels = build_levels(specs, domain, T, u0);
    const Level& ref = levels.back();
    const std::size_t n_coarse = levels.size() - 1;
    std::vector<std::vector<std::size_t>> maps;
    for (std::size_t i = 0; i < n_coarse; ++i) maps.push_back(injection_map(levels[i].spec, ref.spec));

    auto samples = map_realizations(M, threads, [&](std::size_t r) {
        const BrownianPath fine = realization_path(master_seed, r, ref.spec.N, T);
        const SpaceTimeField u_ref = solve_trajectory(ref.op, ref.config, model, fine, ref.u0);
        std::vector<double> e(2 * n_coarse);
        for (std::size_t i = 0; i < n_coarse; ++i) {
            const Level& L = levels[i];
            const BrownianPath path = coarsen_path(fine, ref.spec.N / L.spec.N);
            const SpaceTimeField u = solve_trajectory(L.op, L.config, model, path, L.u0);
            const auto sq = coupled_error_squared(u, u_ref, maps[i]);
            e[2 * i] = std::sqrt(sq[0]);
            e[2 * i + 1] = std::sqrt(sq[1]);
        }
        return e;
    });

    ConvergenceReport report;
    report.p_values = p_values;
    for (std::size_t i = 0; i < n_coarse; ++i) {
        ConvergenceLevel out;
        out.spec = levels[i].spec;
        out.h = level_h(out.spec, domain);
        out.dt = T / static_cast<double>(out.spec.N);
        for (double p : p_values) {
            std::array<Estimate, 2> pe;
            for (int m = 0; m < 2; ++m) {
                std::vector<double> powered(M);
                for (std::size_t r = 0; r < M; ++r) powered[r] = std::pow(samples[r][2 * i + m], p);
                const Estimate e = estimate(powered);
                // (E e^p)^{1/p}, standard error by the delta method.
                const double value = std::pow(e.mean, 1.0 / p);
                pe[m] = {value, e.mean > 0.0 ? value / (p * e.mean) * e.se : 0.0};
            }
            out.errors.push_back(pe);
        }
        report.levels.push_back(std::move(out));
    }
    finish_report(report, domain);
    return report;
}

double heat_mode_error_squared(const SpaceTimeField& field, TimeMode mode, const Rectangle& domain, int kx, int ky) {
    if (mode == TimeMode::Affine) throw std::invalid_argument("heat_mode_error_squared: Left or Right only");
    const Mesh& mesh = field.mesh();
    const double W = domain.width(), H = domain.height();
    const double ax = kx * std::numbers::pi / W, ay = ky * std::numbers::pi / H;
    const double lambda = ax * ax + ay * ay;
    // int cos(a (s - s0)) and int cos^2(a (s - s0)) over [s1, s2].
    auto i1 = [](double a, double s0, double s1, double s2) {
        return a == 0.0 ? s2 - s1 : (std::sin(a * (s2 - s0)) - std::sin(a * (s1 - s0))) / a;
    };
    auto i2 = [](double a, double s0, double s1, double s2) {
        return a == 0.0 ? s2 - s1 : 0.5 * (s2 - s1) + (std::sin(2.0 * a * (s2 - s0)) - std::sin(2.0 * a * (s1 - s0))) / (4.0 * a);
    };
    const std::size_t n_cells = mesh.num_cells();
    std::vector<double> c1(n_cells), c2(n_cells);
    for (std::size_t k = 0; k < n_cells; ++k) {
        const auto poly = mesh.cell_polygon(k);
        double x0 = poly[0].x, x1 = poly[0].x, y0 = poly[0].y, y1 = poly[0].y;
        for (const auto& p : poly) {
            x0 = std::min(x0, p.x), x1 = std::max(x1, p.x), y0 = std::min(y0, p.y), y1 = std::max(y1, p.y);
        }
        if (std::abs((x1 - x0) * (y1 - y0) - mesh.cells[k].area) > 1e-12 * mesh.cells[k].area) {
            throw std::invalid_argument("heat_mode_error_squared: needs axis-aligned rectangular cells");
        }
        c1[k] = i1(ax, domain.x0, x0, x1) * i1(ay, domain.y0, y0, y1);
        c2[k] = i2(ax, domain.x0, x0, x1) * i2(ay, domain.y0, y0, y1);
    }
    const std::size_t offset = mode == TimeMode::Left ? 0 : 1;
    double total = 0.0;
    for (std::size_t n = 0; n < field.N(); ++n) {
        const double t0 = field.time(n), t1 = field.time(n + 1);
        const double e1 = lambda == 0.0 ? t1 - t0 : (std::exp(-lambda * t0) - std::exp(-lambda * t1)) / lambda;
        const double e2 =
            lambda == 0.0 ? t1 - t0 : (std::exp(-2.0 * lambda * t0) - std::exp(-2.0 * lambda * t1)) / (2.0 * lambda);
        const CellField& u = field[n + offset];
        for (std::size_t k = 0; k < n_cells; ++k) {
            const double c = u[k];
            total += c * c * mesh.cells[k].area * (t1 - t0) - 2.0 * c * c1[k] * e1 + c2[k] * e2;
        }
    }
    return std::max(total, 0.0);
}

ConvergenceReport heat_mode_study(const std::vector<LevelSpec>& specs, const Rectangle& domain, double T, int kx,
                                  int ky) {
    if (specs.empty()) throw std::invalid_argument("heat_mode_study: no levels");
    for (const auto& s : specs) {
        if (s.nx == 0 || s.ny == 0 || s.N == 0) throw std::invalid_argument("heat_mode_study: zero count in a level");
    }
    const double ax = kx * std::numbers::pi / domain.width(), ay = ky * std::numbers::pi / domain.height();
    const InitialCondition u0 = [&](double x, double y) {
        return std::cos(ax * (x - domain.x0)) * std::cos(ay * (y - domain.y0));
    };
    const auto levels = build_levels(specs, domain, T, u0);
    ConvergenceReport report;
    report.p_values = {2.0};
    for (const Level& L : levels) {
        BrownianPath path{0, L.spec.N, T, std::vector<double>(L.spec.N, 0.0)};
        const SpaceTimeField u = solve_trajectory(L.op, L.config, NoiseModel::zero(), path, L.u0);
        ConvergenceLevel out;
        out.spec = L.spec;
        out.h = level_h(L.spec, domain);
        out.dt = L.config.dt();
        out.errors.push_back({Estimate{std::sqrt(heat_mode_error_squared(u, TimeMode::Left, domain, kx, ky)), 0.0},
                              Estimate{std::sqrt(heat_mode_error_squared(u, TimeMode::Right, domain, kx, ky)), 0.0}});
        report.levels.push_back(std::move(out));
    }
    finish_report(report, domain);
    return report;
}

CheckReport lr_gap_check(const std::vector<EnsembleStats>& levels, const NoiseModel& model, double u0_l2_sq) {
    CheckReport report;
    report.name = "left_right_gap";
    report.columns = {"level", "dt", "gap_mean", "gap_se", "C1_dt"};
    report.passed = !levels.empty();
    double worst = 0.0;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        const auto& s = levels[i];
        const double C1 = energy_constant_C1(model, s.T, s.domain_area, u0_l2_sq, s.initial_l2_sq);
        const double bound = C1 * s.dt();
        report.rows.push_back({static_cast<double>(i), s.dt(), s.lr_gap.mean, s.lr_gap.se, bound});
        if (!(s.lr_gap.mean - 2.0 * s.lr_gap.se <= bound)) report.passed = false;
        worst = std::max(worst, (s.lr_gap.mean - 2.0 * s.lr_gap.se) / bound);
    }
    report.metrics["max_ratio_to_bound"] = worst;
    report.summary = "max (gap - 2 SE) / (C1 dt) = " + format_number(worst);
    return report;
}

}  // namespace stochfv
