#include "longrun/models.hpp"

#include "longrun/eigen.hpp"
#include "longrun/error.hpp"

#include <cmath>
#include <sstream>

namespace longrun {

std::string_view to_string(Family family) {
    switch (family) {
        case Family::BlackScholes: return "BlackScholes";
        case Family::OU: return "OU";
        case Family::CIR: return "CIR";
        case Family::ThreeHalves: return "ThreeHalves";
        case Family::QuadraticDrift: return "QuadraticDrift";
    }
    return "unknown";
}

std::optional<Family> parse_family(std::string_view name) {
    for (Family f : {Family::BlackScholes, Family::OU, Family::CIR, Family::ThreeHalves,
                     Family::QuadraticDrift}) {
        if (name == to_string(f)) return f;
    }
    if (name == "BS") return Family::BlackScholes;
    if (name == "3/2" || name == "ThreeHalf") return Family::ThreeHalves;
    if (name == "Quadratic") return Family::QuadraticDrift;
    return std::nullopt;
}

std::string ValidationReport::joined() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < violations.size(); ++i) {
        if (i) os << "; ";
        os << violations[i];
    }
    return os.str();
}

namespace {

void check(ValidationReport& rep, bool ok, const char* what) {
    if (!ok) rep.violations.emplace_back(std::string(what) + " violated");
}

void check_finite(ValidationReport& rep, double v, const char* name) {
    if (!std::isfinite(v)) rep.violations.emplace_back(std::string(name) + " is not finite");
}

}  // namespace

ValidationReport validate_market(const MarketParams& mkt) {
    ValidationReport rep;
    check_finite(rep, mkt.r, "r");
    check_finite(rep, mkt.omega, "omega");
    check_finite(rep, mkt.xi, "xi");
    check_finite(rep, mkt.nu, "nu");
    check_finite(rep, mkt.rho_bar, "rho_bar");
    check_finite(rep, mkt.rho_sq, "rho_sq");
    // Comparisons with NaN are false, so every check below also reports NaN.
    check(rep, mkt.nu < 0.0, "ν < 0");
    check(rep, mkt.omega > 0.0, "ω > 0");
    check(rep, mkt.rho_sq >= 0.0 && mkt.rho_sq <= 1.0, "ρ'ρ ∈ [0,1]");
    check(rep, mkt.rho_bar * mkt.rho_bar <= mkt.rho_sq, "ρ̄² ≤ ρ'ρ");
    return rep;
}

ValidationReport validate_model(const ModelSpec& spec, const MarketParams& mkt) {
    ValidationReport rep = validate_market(mkt);
    check_finite(rep, spec.b, "b");
    check_finite(rep, spec.k, "k");
    check_finite(rep, spec.sigma, "sigma");
    check_finite(rep, spec.mu, "mu");
    check(rep, spec.sigma != 0.0 && !std::isnan(spec.sigma), "σ ≠ 0");
    const double s2 = spec.sigma * spec.sigma;
    switch (spec.family) {
        case Family::BlackScholes:
            check(rep, spec.sigma > 0.0, "σ > 0");
            break;
        case Family::OU:
            check(rep, spec.k > 0.0, "k > 0");
            check(rep, spec.sigma > 0.0, "σ > 0");
            break;
        case Family::CIR:
            check(rep, spec.k > 0.0, "k > 0");
            check(rep, spec.sigma > 0.0, "σ > 0");
            check(rep, mkt.xi > 0.0, "ξ > 0");
            check(rep, spec.b > 0.5 * s2, "b > σ²/2");
            break;
        case Family::ThreeHalves:
            check(rep, spec.b > 0.0, "b > 0");
            check(rep, spec.k > 0.0, "k > 0");
            check(rep, spec.sigma > 0.0, "σ > 0");
            check(rep, mkt.xi > 0.0, "ξ > 0");
            break;
        case Family::QuadraticDrift:
            check(rep, spec.b > 0.0, "b > 0");
            check(rep, spec.k > 0.0, "k > 0");
            check(rep, mkt.xi > 0.0, "ξ > 0");
            break;
    }
    return rep;
}

void require_valid(const ModelSpec& spec, const MarketParams& mkt) {
    const auto rep = validate_model(spec, mkt);
    if (!rep.ok()) throw InvalidInput(rep.joined());
}

double Diffusion::drift(double x) const {
    switch (family) {
        case Family::OU:
        case Family::CIR: return level - speed * x;
        case Family::ThreeHalves: return (level - speed * x) * x;
        case Family::QuadraticDrift: return level - speed * x * x;
        case Family::BlackScholes: return 0.0;
    }
    return 0.0;
}

double Diffusion::vol(double x) const {
    switch (family) {
        case Family::OU: return sigma;
        case Family::CIR: return sigma * std::sqrt(x);
        case Family::ThreeHalves: return sigma * x * std::sqrt(x);
        case Family::QuadraticDrift: return sigma * x;
        case Family::BlackScholes: return 0.0;
    }
    return 0.0;
}

double Diffusion::drift_dx(double x) const {
    switch (family) {
        case Family::OU:
        case Family::CIR: return -speed;
        case Family::ThreeHalves: return level - 2.0 * speed * x;
        case Family::QuadraticDrift: return -2.0 * speed * x;
        case Family::BlackScholes: return 0.0;
    }
    return 0.0;
}

double Diffusion::vol_dx(double x) const {
    switch (family) {
        case Family::OU: return 0.0;
        case Family::CIR: return 0.5 * sigma / std::sqrt(x);
        case Family::ThreeHalves: return 1.5 * sigma * std::sqrt(x);
        case Family::QuadraticDrift: return sigma;
        case Family::BlackScholes: return 0.0;
    }
    return 0.0;
}

double risk_adjusted_speed(const ModelSpec& spec, const MarketParams& mkt) {
    return spec.k - mkt.nu * spec.sigma * mkt.rho_bar / (1.0 - mkt.nu);
}

double killing_coefficient(const MarketParams& mkt) {
    const double nu = mkt.nu;
    const double one_m = 1.0 - nu;
    return -nu * (one_m + nu * mkt.rho_sq) / (2.0 * one_m * one_m);
}

PricingDynamics derive_pricing_dynamics(const ModelSpec& spec, const MarketParams& mkt) {
    PricingDynamics dyn;
    dyn.family = spec.family;
    const double s2 = spec.sigma * spec.sigma;

    if (spec.family == Family::BlackScholes) {
        const double excess = spec.mu - mkt.r;
        dyn.a = spec.k;
        dyn.q = -mkt.nu / (2.0 * (1.0 - mkt.nu));
        dyn.killing = {KillingRate::Shape::Constant, dyn.q * excess * excess / s2};
        dyn.diffusion = {Family::BlackScholes, 0.0, 0.0, spec.sigma};
        return dyn;
    }

    dyn.a = risk_adjusted_speed(spec, mkt);
    dyn.q = killing_coefficient(mkt);
    dyn.diffusion = {spec.family, spec.b, dyn.a, spec.sigma};

    const double a = dyn.a;
    const double q = dyn.q;
    switch (spec.family) {
        case Family::OU:
        case Family::QuadraticDrift:
        case Family::CIR: {
            const double bound = -a * a / (2.0 * s2);
            if (!(q > bound)) {
                throw DomainError("q > -a^2/(2 sigma^2) violated (q = " + std::to_string(q) +
                                  ", bound = " + std::to_string(bound) + ")");
            }
            break;
        }
        case Family::ThreeHalves: {
            const double shifted = a + 0.5 * s2;
            const double bound = -shifted * shifted / (2.0 * s2) + s2 / 8.0;
            if (!(a > -0.5 * s2)) {
                throw DomainError("a > -sigma^2/2 violated (a = " + std::to_string(a) + ")");
            }
            if (!(q > bound)) {
                throw DomainError("q > -(a + sigma^2/2)^2/(2 sigma^2) + sigma^2/8 violated (q = " +
                                  std::to_string(q) + ", bound = " + std::to_string(bound) + ")");
            }
            break;
        }
        case Family::BlackScholes: break;
    }
    const bool quadratic = spec.family == Family::OU || spec.family == Family::QuadraticDrift;
    dyn.killing = {quadratic ? KillingRate::Shape::Quadratic : KillingRate::Shape::Linear, q};
    return dyn;
}

HatDynamics hat_dynamics(const ModelSpec& spec, const Eigenpair& eig) {
    HatDynamics hat;
    hat.family = spec.family;
    hat.alpha = eig.alpha;
    hat.delta = eig.delta;
    switch (spec.family) {
        case Family::OU:
            hat.diffusion = {Family::OU, eig.delta, eig.alpha, spec.sigma};
            break;
        case Family::CIR:
        case Family::ThreeHalves:
        case Family::QuadraticDrift:
            hat.diffusion = {spec.family, spec.b, eig.alpha, spec.sigma};
            break;
        case Family::BlackScholes:
            hat.diffusion = {Family::BlackScholes, 0.0, 0.0, spec.sigma};
            break;
    }
    return hat;
}

}  // namespace longrun
