#pragma once

#include <cstddef>

namespace longrun::specialfn {

struct SeriesControl {
    std::size_t max_terms = 500;
    double rel_tol = 1e-14;
};

/// ln Γ(x) for x > 0 (Lanczos, g = 7, nine coefficients; reflection below 1/2).
/// Throws InvalidInput for x ≤ 0 or NaN.
double log_gamma(double x);

/// Kummer's confluent hypergeometric function ₁F₁(a; b; z).
///
/// For z < 0 the Kummer transform e^z ₁F₁(b−a; b; −z) is applied before
/// summing, so the summed series never alternates because of z. Very large
/// negative z switches to the large-argument expansion, which avoids the
/// overflow of e^{−z}. Throws NumericalError when the series fails to reach
/// ctl.rel_tol within ctl.max_terms, InvalidInput when b is a non-positive
/// integer.
double kummer_1f1(double a, double b, double z, const SeriesControl& ctl = {});

/// E[exp(γ X_T)] for dX = (b − αX)dt + σ√X dB, X_0 = x.
///
///   (1 − γ c(T))^{−2b/σ²} · exp(γ e^{−αT} x / (1 − γ c(T))),
///   c(T) = σ²(1 − e^{−αT}) / (2α).
///
/// Requires γ < 2α/σ² and b > σ²/2 (DomainError otherwise).
double cir_mgf(double gamma, double T, double b, double alpha, double sigma, double x);

/// E[X_T^A] for the 3/2 process dX = (b − αX)X dt + σ X^{3/2} dB, X_0 = ξ.
///
/// Γ(K − A)/Γ(K) · (2b/σ² · 1/(1 − e^{−bT}))^A · ₁F₁(A; K; −(2b/σ²)/((e^{bT} − 1)ξ))
/// with K = 2α/σ² + 2. Requires A < K and T > 0.
double three_half_moment(double A, double T, double b, double alpha, double sigma, double xi);

/// Large-horizon limit of three_half_moment: Γ(K − A)/Γ(K) · (2b/σ²)^A.
double three_half_moment_limit(double A, double b, double alpha, double sigma);

/// E[exp(½ηX² + ℓX)] for X ~ N(m, s2), by completing the square:
///   (1 − ηs2)^{−1/2} exp(½ηm² + ℓm + (ηm + ℓ)² s2 / (2(1 − ηs2))).
/// Requires η·s2 < 1 (DomainError otherwise).
double gaussian_quad_exp_moment(double eta, double ell, double m, double s2);

}  // namespace longrun::specialfn
