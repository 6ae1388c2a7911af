#include "longrun/simulate.hpp"

#include "longrun/error.hpp"
#include "longrun/parallel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <string>

namespace longrun {

std::string_view to_string(SchemeKind kind) {
    switch (kind) {
        case SchemeKind::ExactGaussian: return "ExactGaussian";
        case SchemeKind::ExactCIR: return "ExactCIR";
        case SchemeKind::ReciprocalCIR: return "ReciprocalCIR";
        case SchemeKind::LogEuler: return "LogEuler";
        case SchemeKind::ImplicitSqrt: return "ImplicitSqrt";
        case SchemeKind::ReciprocalImplicit: return "ReciprocalImplicit";
    }
    return "unknown";
}

std::optional<SchemeKind> parse_scheme(std::string_view name) {
    for (SchemeKind k : {SchemeKind::ExactGaussian, SchemeKind::ExactCIR, SchemeKind::ReciprocalCIR,
                         SchemeKind::LogEuler, SchemeKind::ImplicitSqrt,
                         SchemeKind::ReciprocalImplicit}) {
        if (name == to_string(k)) return k;
    }
    return std::nullopt;
}

SchemeKind exact_scheme(Family family) {
    switch (family) {
        case Family::CIR: return SchemeKind::ExactCIR;
        case Family::ThreeHalves: return SchemeKind::ReciprocalCIR;
        case Family::QuadraticDrift: return SchemeKind::LogEuler;
        default: return SchemeKind::ExactGaussian;
    }
}

SchemeKind brownian_scheme(Family family) {
    switch (family) {
        case Family::CIR: return SchemeKind::ImplicitSqrt;
        case Family::ThreeHalves: return SchemeKind::ReciprocalImplicit;
        case Family::QuadraticDrift: return SchemeKind::LogEuler;
        default: return SchemeKind::ExactGaussian;
    }
}

bool brownian_driven(SchemeKind kind) {
    return kind != SchemeKind::ExactCIR && kind != SchemeKind::ReciprocalCIR;
}

bool scheme_compatible(SchemeKind kind, Family family) {
    switch (kind) {
        case SchemeKind::ExactGaussian: return family == Family::OU;
        case SchemeKind::ExactCIR:
        case SchemeKind::ImplicitSqrt: return family == Family::CIR;
        case SchemeKind::ReciprocalCIR:
        case SchemeKind::ReciprocalImplicit: return family == Family::ThreeHalves;
        case SchemeKind::LogEuler: return family == Family::QuadraticDrift;
    }
    return false;
}

SimScheme make_scheme(SchemeKind kind, double T, double steps_per_unit) {
    if (!(T > 0.0) || !(steps_per_unit > 0.0)) {
        throw InvalidInput("make_scheme: T and steps_per_unit must be positive");
    }
    SimScheme s;
    s.kind = kind;
    s.T = T;
    s.n_steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(steps_per_unit * T - 1e-9)));
    return s;
}

void PathBuffer::resize(const SimScheme& scheme) {
    x.resize(scheme.n_steps + 1);
    if (brownian_driven(scheme.kind)) {
        db.resize(scheme.n_steps);
    } else {
        db.clear();
    }
    if (scheme.kind == SchemeKind::ExactGaussian) {
        aux.resize(scheme.n_steps);
    } else {
        aux.clear();
    }
}

double trapezoid_killing(const KillingRate& killing, std::span<const double> x, double dt,
                         std::size_t steps) {
    if (steps == 0) return 0.0;
    double acc = 0.5 * (killing(x[0]) + killing(x[steps]));
    for (std::size_t i = 1; i < steps; ++i) acc += killing(x[i]);
    return acc * dt;
}

namespace {

// Noncentral χ² transition of dV = (β − κV)dt + σ√V dW over one step:
// V' = c·χ'²_d(λ) with c = σ²(1 − e^{−κΔ})/(4κ), d = 4β/σ², λ = Ve^{−κΔ}/c.
// For d > 1, χ'²_d(λ) = (Z + √λ)² + χ²_{d−1}; otherwise a Poisson mixture
// of central χ² laws.
class CirTransition {
public:
    CirTransition(double level, double speed, double sigma, double dt) {
        const double s2 = sigma * sigma;
        c_ = s2 * (-std::expm1(-speed * dt)) / (4.0 * speed);
        d_ = 4.0 * level / s2;
        decay_ = std::exp(-speed * dt);
        if (d_ > 1.0) gamma_ = std::gamma_distribution<double>(0.5 * (d_ - 1.0), 1.0);
    }

    double operator()(double v, Xoshiro256& eng) {
        const double nc = v * decay_ / c_;
        if (d_ > 1.0) {
            const double z = normal_(eng) + std::sqrt(nc);
            return c_ * (z * z + 2.0 * gamma_(eng));
        }
        double shape = 0.5 * d_;
        if (nc > 0.0) {
            std::poisson_distribution<long> pois(0.5 * nc);
            shape += static_cast<double>(pois(eng));
        }
        std::gamma_distribution<double> gam(shape, 1.0);
        return c_ * 2.0 * gam(eng);
    }

private:
    double c_ = 0.0;
    double d_ = 0.0;
    double decay_ = 0.0;
    std::normal_distribution<double> normal_;
    std::gamma_distribution<double> gamma_;
};

// Drift-implicit Euler on Z = √V for the same CIR, driven by dW.
double cir_implicit_step(double v, double level, double speed, double sigma, double dt,
                         double dw) {
    const double s2 = sigma * sigma;
    const double w = std::sqrt(v) + 0.5 * sigma * dw;
    const double lead = 1.0 + 0.5 * speed * dt;
    const double c0 = (4.0 * level - s2) * dt / 8.0;
    const double z = (w + std::sqrt(w * w + 4.0 * lead * c0)) / (2.0 * lead);
    return z * z;
}

bool state_ok(Family family, double x) {
    if (!std::isfinite(x)) return false;
    return !positive_state(family) || x > 0.0;
}

}  // namespace

PathSimulator::PathSimulator(const Diffusion& diffusion, const KillingRate& killing,
                             const SimScheme& scheme, double xi)
    : diffusion_(diffusion), killing_(killing), scheme_(scheme), xi_(xi) {
    if (!scheme_compatible(scheme.kind, diffusion.family)) {
        throw InvalidInput("scheme " + std::string(to_string(scheme.kind)) +
                           " does not apply to family " + std::string(to_string(diffusion.family)));
    }
    if (scheme.n_steps < 1 || !(scheme.T > 0.0)) {
        throw InvalidInput("SimScheme needs n_steps >= 1 and T > 0");
    }
    if (positive_state(diffusion.family) && !(xi > 0.0)) {
        throw InvalidInput("initial state must be positive for this family");
    }
    const double dt = scheme.dt();
    sqrt_dt_ = std::sqrt(dt);
    if (scheme.kind == SchemeKind::ExactGaussian) {
        const double k = diffusion.speed;
        decay_ = std::exp(-k * dt);
        const double one_m = -std::expm1(-k * dt);
        shift_ = diffusion.level / k * one_m;
        const double cov = one_m / k;
        const double var = -std::expm1(-2.0 * k * dt) / (2.0 * k);
        cov_over_dt_ = cov / dt;
        resid_sd_ = std::sqrt(std::max(0.0, var - cov * cov / dt));
    }
}

void PathSimulator::draw_noise(Xoshiro256& eng, PathBuffer& buf) const {
    if (!brownian_driven(scheme_.kind)) {
        throw InvalidInput("draw_noise: scheme " + std::string(to_string(scheme_.kind)) +
                           " is not Brownian-driven");
    }
    buf.resize(scheme_);
    std::normal_distribution<double> normal;
    const std::size_t n = scheme_.n_steps;
    if (scheme_.kind == SchemeKind::ExactGaussian) {
        for (std::size_t i = 0; i < n; ++i) {
            buf.db[i] = sqrt_dt_ * normal(eng);
            buf.aux[i] = normal(eng);
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) buf.db[i] = sqrt_dt_ * normal(eng);
    }
}

void PathSimulator::advance(PathBuffer& buf) const {
    const std::size_t n = scheme_.n_steps;
    const double dt = scheme_.dt();
    const double sigma = diffusion_.sigma;
    const double level = diffusion_.level;
    const double speed = diffusion_.speed;
    auto& x = buf.x;
    x.resize(n + 1);
    x[0] = xi_;
    switch (scheme_.kind) {
        case SchemeKind::ExactGaussian:
            for (std::size_t i = 0; i < n; ++i) {
                const double noise = cov_over_dt_ * buf.db[i] + resid_sd_ * buf.aux[i];
                x[i + 1] = x[i] * decay_ + shift_ + sigma * noise;
            }
            break;
        case SchemeKind::ImplicitSqrt:
            for (std::size_t i = 0; i < n; ++i) {
                x[i + 1] = cir_implicit_step(x[i], level, speed, sigma, dt, buf.db[i]);
            }
            break;
        case SchemeKind::ReciprocalImplicit: {
            // V = 1/X: dV = ((κ + σ²) − βV)dt − σ√V dB
            const double v_level = speed + sigma * sigma;
            double v = 1.0 / xi_;
            for (std::size_t i = 0; i < n; ++i) {
                v = cir_implicit_step(v, v_level, level, sigma, dt, -buf.db[i]);
                x[i + 1] = 1.0 / v;
            }
            break;
        }
        case SchemeKind::LogEuler: {
            const double half_s2 = 0.5 * sigma * sigma;
            double lx = std::log(xi_);
            for (std::size_t i = 0; i < n; ++i) {
                const double xv = x[i];
                lx += (level / xv - speed * xv - half_s2) * dt + sigma * buf.db[i];
                x[i + 1] = std::exp(lx);
            }
            break;
        }
        case SchemeKind::ExactCIR:
        case SchemeKind::ReciprocalCIR:
            throw InvalidInput("advance: scheme " + std::string(to_string(scheme_.kind)) +
                               " draws its own randomness; use simulate()");
    }
    finish(buf);
}

void PathSimulator::simulate(Xoshiro256& eng, PathBuffer& buf) const {
    if (brownian_driven(scheme_.kind)) {
        draw_noise(eng, buf);
        advance(buf);
        return;
    }
    buf.resize(scheme_);
    const std::size_t n = scheme_.n_steps;
    const double dt = scheme_.dt();
    const double sigma = diffusion_.sigma;
    auto& x = buf.x;
    x[0] = xi_;
    if (scheme_.kind == SchemeKind::ExactCIR) {
        CirTransition step(diffusion_.level, diffusion_.speed, sigma, dt);
        for (std::size_t i = 0; i < n; ++i) x[i + 1] = step(x[i], eng);
    } else {
        CirTransition step(diffusion_.speed + sigma * sigma, diffusion_.level, sigma, dt);
        double v = 1.0 / xi_;
        for (std::size_t i = 0; i < n; ++i) {
            v = step(v, eng);
            x[i + 1] = 1.0 / v;
        }
    }
    finish(buf);
}

void PathSimulator::simulate(const RngPolicy& rng, std::uint64_t path, PathBuffer& buf) const {
    Xoshiro256 eng = rng.engine(path);
    simulate(eng, buf);
}

void PathSimulator::finish(PathBuffer& buf) const {
    buf.flagged = false;
    for (double v : buf.x) {
        if (!state_ok(diffusion_.family, v)) {
            buf.flagged = true;
            break;
        }
    }
    buf.killing = buf.flagged ? std::numeric_limits<double>::quiet_NaN()
                              : trapezoid_killing(killing_, buf.x, scheme_.dt(), scheme_.n_steps);
}

std::span<const double> PathEnsemble::path(std::size_t i) const {
    return std::span<const double>(states).subspan(i * (n_steps + 1), n_steps + 1);
}

std::span<const double> PathEnsemble::increments(std::size_t i) const {
    if (brownian_increments.empty()) return {};
    return std::span<const double>(brownian_increments).subspan(i * n_steps, n_steps);
}

std::span<const double> PathEnsemble::y(std::size_t i) const {
    if (first_variation.empty()) return {};
    return std::span<const double>(first_variation).subspan(i * (n_steps + 1), n_steps + 1);
}

void check_flagged(std::size_t n_flagged, std::size_t n_paths) {
    if (n_paths > 0 && static_cast<double>(n_flagged) > 1e-3 * static_cast<double>(n_paths)) {
        throw NumericalError(std::to_string(n_flagged) + " of " + std::to_string(n_paths) +
                             " paths left the state space (limit 0.1%)");
    }
}

PathEnsemble sample_paths(const PathSimulator& sim, std::size_t n_paths, const RngPolicy& rng,
                          Measure measure) {
    const SimScheme& sc = sim.scheme();
    PathEnsemble ens;
    ens.measure = measure;
    ens.scheme = sc.kind;
    ens.family = sim.diffusion().family;
    ens.T = sc.T;
    ens.xi = sim.xi();
    ens.n_paths = n_paths;
    ens.n_steps = sc.n_steps;
    ens.seed = rng.seed;
    const std::size_t n = sc.n_steps;
    ens.times.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i) ens.times[i] = sc.T * static_cast<double>(i) / static_cast<double>(n);
    ens.states.resize(n_paths * (n + 1));
    if (brownian_driven(sc.kind)) ens.brownian_increments.resize(n_paths * n);
    ens.integrated_killing.resize(n_paths);
    ens.flagged.resize(n_paths);

    parallel_blocks(n_paths, [&](std::size_t lo, std::size_t hi) {
        PathBuffer buf;
        for (std::size_t p = lo; p < hi; ++p) {
            sim.simulate(rng, p, buf);
            std::copy(buf.x.begin(), buf.x.end(), ens.states.begin() + static_cast<std::ptrdiff_t>(p * (n + 1)));
            if (!buf.db.empty()) {
                std::copy(buf.db.begin(), buf.db.end(),
                          ens.brownian_increments.begin() + static_cast<std::ptrdiff_t>(p * n));
            }
            ens.integrated_killing[p] = buf.killing;
            ens.flagged[p] = buf.flagged ? 1 : 0;
        }
    });
    ens.n_flagged = static_cast<std::size_t>(std::count(ens.flagged.begin(), ens.flagged.end(), 1));
    check_flagged(ens.n_flagged, n_paths);
    return ens;
}

void first_variation_generic(const Diffusion& d, std::span<const double> x,
                             std::span<const double> db, double dt, std::vector<double>& y) {
    const std::size_t n = x.size() - 1;
    if (db.size() != n) throw InvalidInput("first_variation_generic: needs Brownian increments");
    y.resize(n + 1);
    y[0] = 1.0;
    const auto drift_part = [&](double v) {
        const double sp = d.vol_dx(v);
        return d.drift_dx(v) - 0.5 * sp * sp;
    };
    double log_y = 0.0;
    double prev = drift_part(x[0]);
    for (std::size_t i = 0; i < n; ++i) {
        const double next = drift_part(x[i + 1]);
        log_y += 0.5 * (prev + next) * dt + d.vol_dx(x[i]) * db[i];
        prev = next;
        y[i + 1] = std::exp(log_y);
    }
}

void first_variation_pathwise(const Diffusion& d, std::span<const double> x, double dt,
                              std::vector<double>& y) {
    const std::size_t n = x.size() - 1;
    y.resize(n + 1);
    y[0] = 1.0;
    const double xi = x[0];
    const double s2 = d.sigma * d.sigma;
    const double beta = d.level;
    const double kappa = d.speed;
    switch (d.family) {
        case Family::OU:
            for (std::size_t i = 1; i <= n; ++i) y[i] = std::exp(-kappa * dt * static_cast<double>(i));
            return;
        case Family::CIR: {
            const double c = 0.5 * beta - s2 / 8.0;
            const auto g = [&](double v) { return -0.5 * kappa - c / v; };
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                acc += 0.5 * (g(x[i]) + g(x[i + 1])) * dt;
                y[i + 1] = std::sqrt(x[i + 1] / xi) * std::exp(acc);
            }
            return;
        }
        case Family::ThreeHalves: {
            const double c = 0.5 * kappa + 3.0 * s2 / 8.0;
            double int_x = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                int_x += 0.5 * (x[i] + x[i + 1]) * dt;
                const double t = dt * static_cast<double>(i + 1);
                y[i + 1] = std::exp(1.5 * std::log(x[i + 1] / xi) - 0.5 * beta * t - c * int_x);
            }
            return;
        }
        case Family::QuadraticDrift: {
            const auto g = [&](double v) { return beta / v + kappa * v; };
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                acc += 0.5 * (g(x[i]) + g(x[i + 1])) * dt;
                y[i + 1] = (x[i + 1] / xi) * std::exp(-acc);
            }
            return;
        }
        case Family::BlackScholes:
            std::fill(y.begin(), y.end(), 1.0);
            return;
    }
}

double quadratic_drift_malliavin_y(const Diffusion& d, std::span<const double> x,
                                   std::span<const double> db, double dt) {
    const std::size_t n = x.size() - 1;
    double int_x = 0.0;
    double b_T = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        int_x += 0.5 * (x[i] + x[i + 1]) * dt;
        b_T += db[i];
    }
    const double T = dt * static_cast<double>(n);
    return std::exp(-2.0 * d.speed * int_x - 0.5 * d.sigma * d.sigma * T + d.sigma * b_T);
}

void first_variation(PathEnsemble& ens, const Diffusion& d, bool pathwise) {
    const bool generic = !pathwise && !ens.brownian_increments.empty();
    const std::size_t n = ens.n_steps;
    ens.first_variation.assign(ens.n_paths * (n + 1), 0.0);
    const double dt = ens.dt();
    parallel_blocks(ens.n_paths, [&](std::size_t lo, std::size_t hi) {
        std::vector<double> y;
        for (std::size_t p = lo; p < hi; ++p) {
            if (ens.flagged[p]) {
                std::fill_n(ens.first_variation.begin() + static_cast<std::ptrdiff_t>(p * (n + 1)), n + 1,
                            std::numeric_limits<double>::quiet_NaN());
                continue;
            }
            if (generic) {
                first_variation_generic(d, ens.path(p), ens.increments(p), dt, y);
            } else {
                first_variation_pathwise(d, ens.path(p), dt, y);
            }
            std::copy(y.begin(), y.end(), ens.first_variation.begin() + static_cast<std::ptrdiff_t>(p * (n + 1)));
        }
    });
}

double likelihood_ratio_path(std::span<const double> x, std::span<const double> db,
                             const Diffusion& d, const ScalarField& bbar) {
    double acc = 0.0;
    for (std::size_t i = 0; i < db.size(); ++i) acc += bbar(x[i]) / d.vol(x[i]) * db[i];
    return acc;
}

double malliavin_path(std::span<const double> x, std::span<const double> y, double dt,
                      const ScalarField& h_deriv, const ScalarField& kbar) {
    const std::size_t n = x.size() - 1;
    constexpr double tiny = 1e-290;
    double acc = 0.0;
    double prev = kbar(x[0]) / y[0];
    for (std::size_t i = 0; i < n; ++i) {
        if (!(std::abs(y[i + 1]) >= tiny)) return std::numeric_limits<double>::quiet_NaN();
        const double next = kbar(x[i + 1]) / y[i + 1];
        acc += 0.5 * (prev + next) * dt;
        prev = next;
    }
    return h_deriv(x[n]) * y[n] * acc;
}

std::vector<double> likelihood_ratio_weight(const PathEnsemble& ens, const Diffusion& d,
                                            const ScalarField& bbar) {
    if (ens.brownian_increments.empty()) {
        throw InvalidInput("likelihood_ratio_weight: ensemble has no Brownian increments");
    }
    std::vector<double> w(ens.n_paths);
    parallel_blocks(ens.n_paths, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t p = lo; p < hi; ++p) {
            w[p] = ens.flagged[p] ? std::numeric_limits<double>::quiet_NaN()
                                  : likelihood_ratio_path(ens.path(p), ens.increments(p), d, bbar);
        }
    });
    return w;
}

std::vector<double> malliavin_weight_estimate(const PathEnsemble& ens, const ScalarField& h_deriv,
                                              const ScalarField& kbar) {
    if (ens.first_variation.empty()) {
        throw InvalidInput("malliavin_weight_estimate: first variation not filled");
    }
    std::vector<double> w(ens.n_paths);
    const double dt = ens.dt();
    parallel_blocks(ens.n_paths, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t p = lo; p < hi; ++p) {
            w[p] = ens.flagged[p] ? std::numeric_limits<double>::quiet_NaN()
                                  : malliavin_path(ens.path(p), ens.y(p), dt, h_deriv, kbar);
        }
    });
    return w;
}

McEstimate martingale_check(const Eigenpair& eig, const PathEnsemble& ens) {
    std::vector<double> v;
    v.reserve(ens.n_paths);
    const double base = eig.log_phi(ens.xi) - eig.lambda * ens.T;
    for (std::size_t p = 0; p < ens.n_paths; ++p) {
        if (ens.flagged[p]) continue;
        const double xT = ens.path(p).back();
        v.push_back(std::exp(eig.log_phi(xT) - base - ens.integrated_killing[p]));
    }
    return summarize(v, ens.seed, ens.measure);
}

namespace {

constexpr char kMagic[4] = {'L', 'R', 'P', 'E'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& os, T v) {
    static_assert(std::endian::native == std::endian::little, "dump format is little-endian");
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw InvalidInput("read_ensemble: truncated stream");
    return v;
}

void put_array(std::ostream& os, const std::vector<double>& a) {
    put<std::uint64_t>(os, a.size());
    os.write(reinterpret_cast<const char*>(a.data()), static_cast<std::streamsize>(a.size() * sizeof(double)));
}

std::vector<double> get_array(std::istream& is) {
    const auto n = get<std::uint64_t>(is);
    std::vector<double> a(n);
    is.read(reinterpret_cast<char*>(a.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (!is) throw InvalidInput("read_ensemble: truncated array");
    return a;
}

}  // namespace

void write_ensemble(const PathEnsemble& ens, std::ostream& os) {
    os.write(kMagic, 4);
    put(os, kVersion);
    put<std::uint64_t>(os, ens.seed);
    put<std::uint64_t>(os, ens.n_paths);
    put<std::uint64_t>(os, ens.n_steps);
    put(os, ens.T);
    put(os, ens.xi);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(ens.measure));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(ens.scheme));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(ens.family));
    put_array(os, ens.states);
    put_array(os, ens.brownian_increments);
    put_array(os, ens.integrated_killing);
}

PathEnsemble read_ensemble(std::istream& is) {
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0) throw InvalidInput("read_ensemble: bad magic");
    if (get<std::uint32_t>(is) != kVersion) throw InvalidInput("read_ensemble: unsupported version");
    PathEnsemble ens;
    ens.seed = get<std::uint64_t>(is);
    ens.n_paths = get<std::uint64_t>(is);
    ens.n_steps = get<std::uint64_t>(is);
    ens.T = get<double>(is);
    ens.xi = get<double>(is);
    ens.measure = static_cast<Measure>(get<std::uint32_t>(is));
    ens.scheme = static_cast<SchemeKind>(get<std::uint32_t>(is));
    ens.family = static_cast<Family>(get<std::uint32_t>(is));
    ens.states = get_array(is);
    ens.brownian_increments = get_array(is);
    ens.integrated_killing = get_array(is);
    if (ens.states.size() != ens.n_paths * (ens.n_steps + 1)) {
        throw InvalidInput("read_ensemble: state array size mismatch");
    }
    ens.times.resize(ens.n_steps + 1);
    for (std::size_t i = 0; i <= ens.n_steps; ++i) {
        ens.times[i] = ens.T * static_cast<double>(i) / static_cast<double>(ens.n_steps);
    }
    ens.flagged.assign(ens.n_paths, 0);
    for (std::size_t p = 0; p < ens.n_paths; ++p) {
        if (std::isnan(ens.integrated_killing[p])) {
            ens.flagged[p] = 1;
            ++ens.n_flagged;
        }
    }
    return ens;
}

}  // namespace longrun
