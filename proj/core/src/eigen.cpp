#include "longrun/eigen.hpp"

#include "longrun/error.hpp"
#include "longrun/specialfn.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace longrun {

double Eigenpair::log_phi(double x) const {
    switch (family) {
        case Family::OU: return -0.5 * eta * x * x - ell * x;
        case Family::CIR:
        case Family::QuadraticDrift: return -eta * x;
        case Family::ThreeHalves: return -eta * std::log(x);
        case Family::BlackScholes: return 0.0;
    }
    return 0.0;
}

double Eigenpair::phi(double x) const { return std::exp(log_phi(x)); }

double Eigenpair::dphi(double x) const {
    switch (family) {
        case Family::OU: return -(eta * x + ell) * phi(x);
        case Family::CIR:
        case Family::QuadraticDrift: return -eta * phi(x);
        case Family::ThreeHalves: return -eta * std::exp(-(eta + 1.0) * std::log(x));
        case Family::BlackScholes: return 0.0;
    }
    return 0.0;
}

double Eigenpair::d2phi(double x) const {
    switch (family) {
        case Family::OU: {
            const double g = eta * x + ell;
            return (g * g - eta) * phi(x);
        }
        case Family::CIR:
        case Family::QuadraticDrift: return eta * eta * phi(x);
        case Family::ThreeHalves: return eta * (eta + 1.0) * std::exp(-(eta + 2.0) * std::log(x));
        case Family::BlackScholes: return 0.0;
    }
    return 0.0;
}

double Eigenpair::inv_phi(double x) const { return std::exp(-log_phi(x)); }

double Eigenpair::dinv_phi(double x) const {
    switch (family) {
        case Family::OU: return (eta * x + ell) * inv_phi(x);
        case Family::CIR:
        case Family::QuadraticDrift: return eta * inv_phi(x);
        case Family::ThreeHalves: return eta * std::exp((eta - 1.0) * std::log(x));
        case Family::BlackScholes: return 0.0;
    }
    return 0.0;
}

Eigenpair eigenpair(const ModelSpec& spec, const PricingDynamics& dyn) {
    Eigenpair eig;
    eig.family = spec.family;
    const double a = dyn.a;
    const double q = dyn.q;
    const double b = spec.b;
    const double s2 = spec.sigma * spec.sigma;

    switch (spec.family) {
        case Family::BlackScholes:
            eig.lambda = dyn.killing.coeff;
            return eig;
        case Family::OU:
        case Family::CIR:
        case Family::QuadraticDrift: {
            const double disc = a * a + 2.0 * q * s2;
            if (!(disc > 0.0)) {
                throw DomainError("q > -a^2/(2 sigma^2) violated: negative discriminant");
            }
            eig.alpha = std::sqrt(disc);
            eig.eta = (eig.alpha - a) / s2;
            if (spec.family == Family::OU) {
                eig.ell = b * eig.eta / eig.alpha;
                eig.lambda = -0.5 * s2 * eig.ell * eig.ell + b * eig.ell + 0.5 * (eig.alpha - a);
                eig.delta = a * b / eig.alpha;
            } else {
                eig.lambda = b * eig.eta;
                eig.delta = b;
            }
            return eig;
        }
        case Family::ThreeHalves: {
            const double shifted = a + 0.5 * s2;
            const double disc = shifted * shifted + 2.0 * q * s2;
            if (!(disc > 0.0)) {
                throw DomainError(
                    "q > -(a + sigma^2/2)^2/(2 sigma^2) + sigma^2/8 violated: negative discriminant");
            }
            eig.eta = (std::sqrt(disc) - shifted) / s2;
            eig.alpha = a + s2 * eig.eta;
            eig.lambda = b * eig.eta;
            eig.delta = b;
            return eig;
        }
    }
    return eig;
}

Eigenpair eigenpair(const ModelSpec& spec, const MarketParams& mkt) {
    require_valid(spec, mkt);
    return eigenpair(spec, derive_pricing_dynamics(spec, mkt));
}

double generator_residual(const ModelSpec& spec, const PricingDynamics& dyn, const Eigenpair& eig,
                          const std::vector<double>& grid) {
    constexpr double eps = 1e-300;
    double worst = 0.0;
    for (double x : grid) {
        double lphi = 0.0;
        if (spec.family == Family::BlackScholes) {
            lphi = -dyn.killing.coeff;
        } else {
            const double s = dyn.diffusion.vol(x);
            lphi = 0.5 * s * s * eig.d2phi(x) + dyn.diffusion.drift(x) * eig.dphi(x) -
                   dyn.killing(x) * eig.phi(x);
        }
        const double p = eig.phi(x);
        const double rel = std::abs(lphi + eig.lambda * p) / (std::abs(eig.lambda) * p + eps);
        worst = std::max(worst, std::isnan(rel) ? std::numeric_limits<double>::infinity() : rel);
    }
    return worst;
}

EigenNuDerivatives eigen_nu_derivatives(const ModelSpec& spec, const MarketParams& mkt) {
    const PricingDynamics dyn = derive_pricing_dynamics(spec, mkt);
    const Eigenpair eig = eigenpair(spec, dyn);
    const double nu = mkt.nu;
    const double one_m = 1.0 - nu;
    const double s2 = spec.sigma * spec.sigma;
    const double b = spec.b;

    EigenNuDerivatives d;
    if (spec.family == Family::BlackScholes) {
        const double m = (spec.mu - mkt.r) / spec.sigma;
        d.dq = -1.0 / (2.0 * one_m * one_m);
        d.dlambda = d.dq * m * m;
        return d;
    }

    d.da = -spec.sigma * mkt.rho_bar / (one_m * one_m);
    d.dq = -(one_m + 2.0 * mkt.rho_sq * nu) / (2.0 * one_m * one_m * one_m);
    const double a = dyn.a;

    switch (spec.family) {
        case Family::OU:
        case Family::CIR:
        case Family::QuadraticDrift: {
            d.dalpha = (a * d.da + s2 * d.dq) / eig.alpha;
            d.deta = (d.dalpha - d.da) / s2;
            if (spec.family == Family::OU) {
                const double al = eig.alpha;
                d.dell = b * (d.deta * al - eig.eta * d.dalpha) / (al * al);
                d.dlambda = (b - s2 * eig.ell) * d.dell + 0.5 * (d.dalpha - d.da);
                d.ddelta = b * (d.da * al - a * d.dalpha) / (al * al);
            } else {
                d.dlambda = b * d.deta;
            }
            break;
        }
        case Family::ThreeHalves: {
            const double shifted = a + 0.5 * s2;
            const double D = std::sqrt(shifted * shifted + 2.0 * dyn.q * s2);
            const double dD = (shifted * d.da + s2 * d.dq) / D;
            d.deta = (dD - d.da) / s2;
            d.dalpha = dD;
            d.dlambda = b * d.deta;
            break;
        }
        case Family::BlackScholes: break;
    }
    return d;
}

double lambda_sensitivity(const ModelSpec& spec, const MarketParams& mkt) {
    require_valid(spec, mkt);
    return eigen_nu_derivatives(spec, mkt).dlambda;
}

double hat_drift_nu_derivative(Family family, const EigenNuDerivatives& d, double x) {
    switch (family) {
        case Family::OU: return d.ddelta - d.dalpha * x;
        case Family::CIR: return -d.dalpha * x;
        case Family::ThreeHalves:
        case Family::QuadraticDrift: return -d.dalpha * x * x;
        case Family::BlackScholes: return 0.0;
    }
    return 0.0;
}

HSDecomposition hs_assemble(const Eigenpair& eig, double xi, double T, double remainder) {
    if (!(remainder > 0.0)) {
        throw InvalidInput("hs_assemble: remainder must be positive, got " + std::to_string(remainder));
    }
    HSDecomposition hs;
    hs.T = T;
    hs.lambda = eig.lambda;
    hs.remainder = remainder;
    const double lphi = eig.log_phi(xi);
    hs.phi_at_xi = std::exp(lphi);
    hs.log_p_T = lphi - eig.lambda * T + std::log(remainder);
    hs.p_T = std::exp(hs.log_p_T);
    return hs;
}

double remainder_closed_form(Family family, const Eigenpair& eig, const HatDynamics& hat, double xi,
                             double T) {
    const double sigma = hat.diffusion.sigma;
    const double s2 = sigma * sigma;
    switch (family) {
        case Family::BlackScholes: return 1.0;
        case Family::OU: {
            const double al = eig.alpha;
            const double decay = std::exp(-al * T);
            const double m = xi * decay + (eig.delta / al) * (-std::expm1(-al * T));
            const double var = s2 / (2.0 * al) * (-std::expm1(-2.0 * al * T));
            if (!(eig.eta < 2.0 * al / s2)) {
                throw DomainError("OU remainder: eta < 2 alpha / sigma^2 violated");
            }
            return specialfn::gaussian_quad_exp_moment(eig.eta, eig.ell, m, var);
        }
        case Family::CIR:
            return specialfn::cir_mgf(eig.eta, T, hat.diffusion.level, eig.alpha, sigma, xi);
        case Family::ThreeHalves:
            if (T == 0.0) return eig.inv_phi(xi);
            return specialfn::three_half_moment(eig.eta, T, hat.diffusion.level, eig.alpha, sigma, xi);
        case Family::QuadraticDrift:
            throw DomainError(
                "QuadraticDrift remainder has no finite-T closed form; use Monte Carlo "
                "(estimate_remainder) or remainder_limit");
    }
    return 1.0;
}

namespace {

// ∫ exp(g(u)) du with g(u) = −u − B e^{−u} − A e^{u}, returned as a log.
// The integrand is centred on its mode and scaled by the curvature there.
template <unsigned N>
double log_laplace_integral(double A, double B) {
    const double y = 2.0 * B / (1.0 + std::sqrt(1.0 + 4.0 * A * B));  // e^{u*}
    const double u0 = std::log(y);
    const auto g = [&](double u) { return -u - B * std::exp(-u) - A * std::exp(u); };
    const double g0 = g(u0);
    const double width = 1.0 / std::sqrt(B / y + A * y);
    const auto h = [&](double t) {
        const double v = g(u0 + width * t) - g0;
        return v < -745.0 ? 0.0 : std::exp(v);
    };
    using boost::math::quadrature::gauss_kronrod;
    const double inf = std::numeric_limits<double>::infinity();
    const double I = gauss_kronrod<double, N>::integrate(h, -inf, inf, 20, 1e-14);
    return g0 + std::log(width) + std::log(I);
}

double log_laplace_integral(double A, double B, unsigned nodes) {
    switch (nodes) {
        case 15: return log_laplace_integral<15>(A, B);
        case 21: return log_laplace_integral<21>(A, B);
        case 31: return log_laplace_integral<31>(A, B);
        case 41: return log_laplace_integral<41>(A, B);
        case 51: return log_laplace_integral<51>(A, B);
        case 61: return log_laplace_integral<61>(A, B);
        default:
            throw InvalidInput("quadrature nodes must be one of 15, 21, 31, 41, 51, 61");
    }
}

}  // namespace

double quadratic_drift_invariant_moment(double eta, double b, double alpha, double sigma,
                                        unsigned nodes) {
    const double s2 = sigma * sigma;
    const double A = 2.0 * alpha / s2;
    const double B = 2.0 * b / s2;
    if (!(A > 0.0) || !(B > 0.0)) {
        throw InvalidInput("quadratic-drift invariant law needs alpha > 0 and b > 0");
    }
    if (!(eta < A)) {
        throw DomainError("quadratic-drift remainder limit diverges: eta < 2 alpha / sigma^2 violated");
    }
    if (eta == 0.0) return 1.0;
    return std::exp(log_laplace_integral(A - eta, B, nodes) - log_laplace_integral(A, B, nodes));
}

double remainder_limit(Family family, const Eigenpair& eig, const HatDynamics& hat) {
    const double sigma = hat.diffusion.sigma;
    const double s2 = sigma * sigma;
    const double al = eig.alpha;
    switch (family) {
        case Family::BlackScholes: return 1.0;
        case Family::OU: {
            const double var = s2 / (2.0 * al);
            if (!(eig.eta * var < 1.0)) {
                throw DomainError("OU remainder limit diverges: eta < 2 alpha / sigma^2 violated");
            }
            return specialfn::gaussian_quad_exp_moment(eig.eta, eig.ell, eig.delta / al, var);
        }
        case Family::CIR: {
            const double shrink = 1.0 - eig.eta * s2 / (2.0 * al);
            if (!(shrink > 0.0)) {
                throw DomainError("CIR remainder limit diverges: eta < 2 alpha / sigma^2 violated");
            }
            return std::exp(-(2.0 * hat.diffusion.level / s2) * std::log(shrink));
        }
        case Family::ThreeHalves:
            return specialfn::three_half_moment_limit(eig.eta, hat.diffusion.level, al, sigma);
        case Family::QuadraticDrift:
            return quadratic_drift_invariant_moment(eig.eta, hat.diffusion.level, al, sigma);
    }
    return 1.0;
}

double closed_form_log_pT(const ModelSpec& spec, const MarketParams& mkt, double T) {
    require_valid(spec, mkt);
    const PricingDynamics dyn = derive_pricing_dynamics(spec, mkt);
    const Eigenpair eig = eigenpair(spec, dyn);
    const HatDynamics hat = hat_dynamics(spec, eig);
    const double f = remainder_closed_form(spec.family, eig, hat, mkt.xi, T);
    return hs_assemble(eig, mkt.xi, T, f).log_p_T;
}

double utility_exponent(const MarketParams& mkt) {
    const double denom = 1.0 - mkt.nu + mkt.nu * mkt.rho_sq;
    if (denom == 0.0) {
        throw DomainError("utility exponent singular: 1 - nu + nu rho'rho = 0");
    }
    return (1.0 - mkt.nu) / denom;
}

double log_utility_from_log_pT(double log_p_T, const MarketParams& mkt, double T) {
    const double E = utility_exponent(mkt);
    // −ω^ν/ν > 0 for ν < 0
    return mkt.nu * std::log(mkt.omega) - std::log(-mkt.nu) + mkt.r * mkt.nu * T + E * log_p_T;
}

Utility utility_from_pT(double p_T, const MarketParams& mkt, double T) {
    if (!(p_T > 0.0)) throw InvalidInput("utility_from_pT: p_T must be positive");
    Utility u;
    u.log_u_T = log_utility_from_log_pT(std::log(p_T), mkt, T);
    u.u_T = std::exp(u.log_u_T);
    return u;
}

SensitivityReport asymptotic_utility_sensitivity(const ModelSpec& spec, const MarketParams& mkt) {
    require_valid(spec, mkt);
    SensitivityReport rep;
    if (spec.family == Family::BlackScholes) {
        const auto bs = black_scholes_sensitivity(spec.mu, mkt, spec.sigma, 1.0);
        rep.lambda = eigenpair(spec, mkt).lambda;
        rep.dlambda_dnu = lambda_sensitivity(spec, mkt);
        rep.asymptotic_slope = bs.slope;
        return rep;
    }
    const double E = utility_exponent(mkt);
    const double c = mkt.rho_sq;
    const double denom = 1.0 - mkt.nu + c * mkt.nu;
    rep.lambda = eigenpair(spec, mkt).lambda;
    rep.dlambda_dnu = lambda_sensitivity(spec, mkt);
    rep.asymptotic_slope = mkt.r + c * rep.lambda / (denom * denom) - E * rep.dlambda_dnu;
    return rep;
}

BlackScholesSensitivity black_scholes_sensitivity(double mu, const MarketParams& mkt, double sigma,
                                                  double T) {
    if (!(sigma > 0.0)) throw InvalidInput("black_scholes_sensitivity: sigma must be positive");
    const double nu = mkt.nu;
    const double one_m = 1.0 - nu;
    const double m2 = (mu - mkt.r) * (mu - mkt.r) / (sigma * sigma);
    BlackScholesSensitivity out;
    out.slope = mkt.r + m2 / (2.0 * one_m * one_m);
    out.log_u_T = nu * std::log(mkt.omega) - std::log(-nu) + (mkt.r + m2 / (2.0 * one_m)) * nu * T;
    out.dlog_u_dnu = std::log(mkt.omega) - 1.0 / nu + out.slope * T;
    return out;
}

}  // namespace longrun
