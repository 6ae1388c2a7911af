#pragma once

#include "longrun/models.hpp"

#include <vector>

namespace longrun {

/// Closed-form eigenpair (λ, φ) of the killed generator, plus the ℙ̂ drift
/// parameters it induces.
///
///   OU              φ = exp(−½ηx² − ℓx)
///   CIR, Quadratic  φ = exp(−ηx)
///   ThreeHalves     φ = x^{−η}
///   BlackScholes    φ ≡ 1
struct Eigenpair {
    Family family = Family::OU;
    double lambda = 0.0;
    double eta = 0.0;
    double ell = 0.0;    // OU only
    double alpha = 0.0;  // ℙ̂ mean reversion
    double delta = 0.0;  // ℙ̂ drift level: ab/α for OU, b otherwise

    double log_phi(double x) const;
    double phi(double x) const;
    double dphi(double x) const;
    double d2phi(double x) const;
    /// 1/φ(x), the remainder payoff.
    double inv_phi(double x) const;
    /// d/dx of 1/φ(x).
    double dinv_phi(double x) const;
};

/// Throws DomainError naming the q-bound when the discriminant is negative.
Eigenpair eigenpair(const ModelSpec& spec, const PricingDynamics& dyn);

/// Convenience: validates, derives the dynamics and the eigenpair.
Eigenpair eigenpair(const ModelSpec& spec, const MarketParams& mkt);

/// max over grid of |½s²φ'' + μφ' − kφ + λφ| / (|λ|φ + 1e−300).
double generator_residual(const ModelSpec& spec, const PricingDynamics& dyn, const Eigenpair& eig,
                          const std::vector<double>& grid);

/// ν-derivatives of the eigenpair parameters, by chain rule through a(ν), q(ν).
struct EigenNuDerivatives {
    double da = 0.0;
    double dq = 0.0;
    double dlambda = 0.0;
    double deta = 0.0;
    double dell = 0.0;
    double dalpha = 0.0;
    double ddelta = 0.0;
};

EigenNuDerivatives eigen_nu_derivatives(const ModelSpec& spec, const MarketParams& mkt);

/// ∂λ/∂ν in closed form.
double lambda_sensitivity(const ModelSpec& spec, const MarketParams& mkt);

/// ∂ν of the ℙ̂ drift at x (the κ̄ of the Malliavin representation).
double hat_drift_nu_derivative(Family family, const EigenNuDerivatives& d, double x);

struct HSDecomposition {
    double T = 0.0;
    double phi_at_xi = 1.0;
    double lambda = 0.0;
    double remainder = 1.0;
    double log_p_T = 0.0;
    double p_T = 1.0;
};

/// p_T = φ(ξ)e^{−λT}·remainder, assembled in log space. Throws InvalidInput
/// when remainder ≤ 0.
HSDecomposition hs_assemble(const Eigenpair& eig, double xi, double T, double remainder);

/// f(T, ξ) = E^ℙ̂[1/φ(X_T)]. QuadraticDrift has no finite-T closed form and
/// throws DomainError; use Monte Carlo or remainder_limit instead.
double remainder_closed_form(Family family, const Eigenpair& eig, const HatDynamics& hat, double xi,
                             double T);

/// lim_{T→∞} f(T, ξ): an integral against the ℙ̂ invariant law.
double remainder_limit(Family family, const Eigenpair& eig, const HatDynamics& hat);

/// ∫ e^{ηx} π(dx) with π ∝ x^{−2} exp(−2b/(σ²x) − 2αx/σ²) on (0, ∞), by
/// Gauss–Kronrod quadrature in u = ln x. `nodes` picks the Kronrod rule
/// (15, 21, 31, 41, 51 or 61).
double quadratic_drift_invariant_moment(double eta, double b, double alpha, double sigma,
                                        unsigned nodes = 61);

/// ln p_T from the decomposition with closed-form remainder
/// (OU, CIR, ThreeHalves, BlackScholes).
double closed_form_log_pT(const ModelSpec& spec, const MarketParams& mkt, double T);

struct Utility {
    double u_T = 0.0;
    double log_u_T = 0.0;
};

/// (1 − ν)/(1 − ν + νρ'ρ); throws DomainError when the denominator vanishes.
double utility_exponent(const MarketParams& mkt);

/// u_T = −(ω^ν/ν)·e^{rνT}·p_T^{(1−ν)/(1−ν+νρ'ρ)}.
Utility utility_from_pT(double p_T, const MarketParams& mkt, double T);

/// ln u_T from ln p_T, for horizons where p_T itself underflows.
double log_utility_from_log_pT(double log_p_T, const MarketParams& mkt, double T);

struct SensitivityRow {
    double T = 0.0;
    double value = 0.0;     // (1/T)∂ν ln p_T
    double residual = 0.0;  // |value + ∂λ/∂ν|
    double std_error = 0.0;
};

struct SensitivityReport {
    double lambda = 0.0;
    double dlambda_dnu = 0.0;
    double asymptotic_slope = 0.0;
    std::vector<SensitivityRow> table;
};

/// Limiting (1/T)∂ν ln u_T:
///   r + ρ'ρλ/(1 − ν + ρ'ρν)² − ((1 − ν)/(1 − ν + νρ'ρ))·∂λ/∂ν.
SensitivityReport asymptotic_utility_sensitivity(const ModelSpec& spec, const MarketParams& mkt);

struct BlackScholesSensitivity {
    double log_u_T = 0.0;
    double dlog_u_dnu = 0.0;
    double slope = 0.0;
};

/// Closed-form Black–Scholes utility and its ν-derivative.
BlackScholesSensitivity black_scholes_sensitivity(double mu, const MarketParams& mkt, double sigma,
                                                  double T);

}  // namespace longrun
