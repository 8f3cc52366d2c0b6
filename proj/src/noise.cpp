#include "stochfv/noise.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "stochfv/rng.hpp"

namespace stochfv {

double NoiseModel::operator()(double u) const {
    switch (kind) {
        case Kind::Zero: return 0.0;
        case Kind::Additive: return sigma0;
        case Kind::Linear: return lambda * u;
        case Kind::Sine: return sigma0 * std::sin(omega * u);
    }
    return 0.0;
}

double NoiseModel::lipschitz_L() const {
    switch (kind) {
        case Kind::Zero:
        case Kind::Additive: return 0.0;
        case Kind::Linear: return std::abs(lambda);
        case Kind::Sine: return std::abs(sigma0 * omega);
    }
    return 0.0;
}

double NoiseModel::growth_CL() const {
    const double L = lipschitz_L();
    const double g0 = (*this)(0.0);
    return 2.0 * std::max(L * L, g0 * g0);
}

std::string NoiseModel::describe() const {
    std::ostringstream os;
    os.precision(17);
    os << to_string(kind);
    switch (kind) {
        case Kind::Zero: break;
        case Kind::Additive: os << "(sigma0=" << sigma0 << ")"; break;
        case Kind::Linear: os << "(lambda=" << lambda << ")"; break;
        case Kind::Sine: os << "(sigma0=" << sigma0 << ", omega=" << omega << ")"; break;
    }
    return os.str();
}

const char* to_string(NoiseModel::Kind kind) {
    switch (kind) {
        case NoiseModel::Kind::Zero: return "zero";
        case NoiseModel::Kind::Additive: return "additive";
        case NoiseModel::Kind::Linear: return "linear";
        case NoiseModel::Kind::Sine: return "sine";
    }
    return "unknown";
}

NoiseModel::Kind parse_noise_kind(const std::string& name) {
    if (name == "zero") return NoiseModel::Kind::Zero;
    if (name == "additive") return NoiseModel::Kind::Additive;
    if (name == "linear") return NoiseModel::Kind::Linear;
    if (name == "sine") return NoiseModel::Kind::Sine;
    throw std::invalid_argument("unknown noise kind '" + name + "'");
}

CellField eval_g(const NoiseModel& model, const CellField& u) {
    std::vector<double> values(u.size());
    for (std::size_t k = 0; k < u.size(); ++k) values[k] = model(u[k]);
    return CellField(u.mesh_ptr(), std::move(values));
}

double BrownianPath::W(std::size_t n) const {
    if (n > N) throw std::out_of_range("BrownianPath::W: index beyond N");
    double w = 0.0;
    for (std::size_t i = 0; i < n; ++i) w += increments[i];
    return w;
}

namespace {
constexpr std::uint64_t kIncrementStream = 0;
}

BrownianPath sample_path(std::uint64_t seed, std::size_t N, double T) {
    if (N == 0) throw std::invalid_argument("sample_path: N must be positive");
    if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("sample_path: T must be positive");
    BrownianPath path{seed, N, T, std::vector<double>(N)};
    const double sqrt_dt = std::sqrt(path.dt());
    // Box-Muller normals are bounded by 8.6, so |increment| < 16 sqrt(T) <= 2^(e+4).
    const int e = static_cast<int>(std::ceil(std::log2(std::sqrt(T))));
    const double quantum = std::ldexp(1.0, e - 40);
    for (std::size_t n = 0; n < N; ++n) {
        const double z = standard_normal(seed, kIncrementStream, n);
        path.increments[n] = std::nearbyint(sqrt_dt * z / quantum) * quantum;
    }
    return path;
}

BrownianPath coarsen_path(const BrownianPath& path, std::size_t factor) {
    if (factor == 0 || path.N % factor != 0) {
        throw std::invalid_argument("coarsen_path: factor " + std::to_string(factor) + " does not divide N = " +
                                    std::to_string(path.N));
    }
    BrownianPath out{path.seed, path.N / factor, path.T, std::vector<double>(path.N / factor, 0.0)};
    for (std::size_t n = 0; n < out.N; ++n) {
        double s = 0.0;
        for (std::size_t i = 0; i < factor; ++i) s += path.increments[n * factor + i];
        out.increments[n] = s;
    }
    return out;
}

void write_path_csv(std::ostream& os, const BrownianPath& path) {
    const auto old = os.precision(17);
    os << "# brownian_path seed=" << path.seed << " N=" << path.N << " T=" << path.T << '\n';
    os << "step,increment\n";
    for (std::size_t n = 0; n < path.N; ++n) os << n + 1 << ',' << path.increments[n] << '\n';
    os.precision(old);
}

BrownianPath read_path_csv(std::istream& is) {
    auto fail = [](const std::string& what) { throw std::runtime_error("read_path_csv: " + what); };
    std::string line;
    if (!std::getline(is, line) || line.rfind("# brownian_path", 0) != 0) fail("missing '# brownian_path' line");
    BrownianPath path;
    {
        std::istringstream hs(line.substr(15));
        std::string tok;
        bool has_seed = false, has_N = false, has_T = false;
        while (hs >> tok) {
            const auto eq = tok.find('=');
            if (eq == std::string::npos) fail("malformed header token '" + tok + "'");
            const std::string key = tok.substr(0, eq);
            const std::string val = tok.substr(eq + 1);
            if (key == "seed") path.seed = std::stoull(val), has_seed = true;
            else if (key == "N") path.N = std::stoull(val), has_N = true;
            else if (key == "T") path.T = std::stod(val), has_T = true;
            else fail("unknown header key '" + key + "'");
        }
        if (!has_seed || !has_N || !has_T) fail("header needs seed, N and T");
    }
    if (path.N == 0 || !(path.T > 0.0)) fail("header needs N >= 1 and T > 0");
    if (!std::getline(is, line) || line != "step,increment") fail("missing 'step,increment' header");
    path.increments.assign(path.N, 0.0);
    std::vector<bool> seen(path.N, false);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) fail("malformed row '" + line + "'");
        const std::size_t step = std::stoull(line.substr(0, comma));
        if (step == 0 || step > path.N || seen[step - 1]) fail("bad step index in row '" + line + "'");
        path.increments[step - 1] = std::stod(line.substr(comma + 1));
        seen[step - 1] = true;
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) fail("missing increments");
    return path;
}

}  // namespace stochfv
