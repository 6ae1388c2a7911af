#include "longrun/specialfn.hpp"

#include "longrun/error.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

namespace longrun::specialfn {

namespace {

constexpr double kLanczosG = 7.0;
constexpr std::array<double, 9> kLanczosCoeff = {
    0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
    771.32342877765313,   -176.61502916214059,   12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};

// Above this |z| (z < 0) the large-argument expansion is tried first.
constexpr double kAsymptoticThreshold = 40.0;

bool is_nonpositive_integer(double v) {
    return v <= 0.0 && std::floor(v) == v;
}

// Maclaurin series; callers only pass z ≥ 0.
double kummer_series(double a, double b, double z, const SeriesControl& ctl) {
    double term = 1.0;
    double sum = 1.0;
    for (std::size_t n = 0; n < ctl.max_terms; ++n) {
        const double dn = static_cast<double>(n);
        term *= (a + dn) / (b + dn) * z / (dn + 1.0);
        sum += term;
        if (term == 0.0) return sum;  // a is a non-positive integer: polynomial
        // Once the term ratio drops below one the tail is dominated by a
        // geometric series.
        const double ratio = std::abs((a + dn + 1.0) / (b + dn + 1.0) * z / (dn + 2.0));
        if (ratio < 1.0 && std::abs(term) * ratio / (1.0 - ratio) <= ctl.rel_tol * std::abs(sum)) {
            return sum;
        }
    }
    throw NumericalError("kummer_1f1: series did not converge within " +
                         std::to_string(ctl.max_terms) + " terms");
}

// ₁F₁(a; b; −y) ~ Γ(b)/Γ(b − a) · y^{−a} · Σ_s (a)_s (a − b + 1)_s / (s! y^s) as y → ∞.
// Needs b > 0 and b − a > 0. Returns NaN when the divergent tail starts before
// the terms fall below the tolerance.
double kummer_negative_asymptotic(double a, double b, double y, const SeriesControl& ctl) {
    double term = 1.0;
    double sum = 1.0;
    bool converged = false;
    for (std::size_t s = 0; s < ctl.max_terms; ++s) {
        const double ds = static_cast<double>(s);
        const double next = term * (a + ds) * (a - b + 1.0 + ds) / ((ds + 1.0) * y);
        if (next == 0.0) {
            converged = true;
            break;
        }
        if (std::abs(next) > std::abs(term)) break;
        term = next;
        sum += term;
        if (std::abs(term) <= ctl.rel_tol * std::abs(sum)) {
            converged = true;
            break;
        }
    }
    if (!converged) return std::nan("");
    return std::exp(log_gamma(b) - log_gamma(b - a) - a * std::log(y)) * sum;
}

}  // namespace

double log_gamma(double x) {
    if (!(x > 0.0)) {
        throw InvalidInput("log_gamma: argument must be positive, got " + std::to_string(x));
    }
    if (x < 0.5) {
        // Γ(x)Γ(1 − x) = π / sin(πx); sin(πx) > 0 on (0, ½)
        return std::log(std::numbers::pi / std::sin(std::numbers::pi * x)) - log_gamma(1.0 - x);
    }
    const double xm1 = x - 1.0;
    double acc = kLanczosCoeff[0];
    for (std::size_t i = 1; i < kLanczosCoeff.size(); ++i) {
        acc += kLanczosCoeff[i] / (xm1 + static_cast<double>(i));
    }
    const double t = xm1 + kLanczosG + 0.5;
    return 0.5 * std::log(2.0 * std::numbers::pi) + (xm1 + 0.5) * std::log(t) - t + std::log(acc);
}

double kummer_1f1(double a, double b, double z, const SeriesControl& ctl) {
    if (ctl.max_terms < 1 || !(ctl.rel_tol > 0.0)) {
        throw InvalidInput("kummer_1f1: SeriesControl needs max_terms >= 1 and rel_tol > 0");
    }
    if (std::isnan(a) || std::isnan(b) || std::isnan(z)) {
        throw InvalidInput("kummer_1f1: NaN argument");
    }
    if (is_nonpositive_integer(b)) {
        throw InvalidInput("kummer_1f1: b must not be a non-positive integer");
    }
    if (z == 0.0) return 1.0;
    if (z > 0.0) return kummer_series(a, b, z, ctl);

    const double y = -z;
    if (y > kAsymptoticThreshold && b > 0.0 && b - a > 0.0) {
        const double v = kummer_negative_asymptotic(a, b, y, ctl);
        if (!std::isnan(v)) return v;
    }
    // Kummer transform: ₁F₁(a; b; −y) = e^{−y} ₁F₁(b − a; b; y)
    const double s = kummer_series(b - a, b, y, ctl);
    if (s > 0.0) return std::exp(std::log(s) - y);
    return std::exp(-y) * s;
}

double cir_mgf(double gamma, double T, double b, double alpha, double sigma, double x) {
    const double s2 = sigma * sigma;
    if (!(alpha > 0.0) || !(s2 > 0.0) || !(T >= 0.0) || !(x >= 0.0)) {
        throw InvalidInput("cir_mgf: need alpha > 0, sigma != 0, T >= 0, x >= 0");
    }
    if (!(b > 0.5 * s2)) {
        throw DomainError("cir_mgf: b > sigma^2/2 violated");
    }
    if (!(gamma < 2.0 * alpha / s2)) {
        throw DomainError("cir_mgf: gamma < 2 alpha / sigma^2 violated");
    }
    const double decay = std::exp(-alpha * T);
    const double c = s2 / (2.0 * alpha) * (-std::expm1(-alpha * T));
    const double denom = 1.0 - gamma * c;
    return std::exp(-(2.0 * b / s2) * std::log(denom) + gamma * decay * x / denom);
}

double three_half_moment_limit(double A, double b, double alpha, double sigma) {
    const double s2 = sigma * sigma;
    const double K = 2.0 * alpha / s2 + 2.0;
    if (!(A < K)) {
        throw DomainError("three_half_moment: A < 2 alpha / sigma^2 + 2 violated");
    }
    return std::exp(log_gamma(K - A) - log_gamma(K) + A * std::log(2.0 * b / s2));
}

double three_half_moment(double A, double T, double b, double alpha, double sigma, double xi) {
    const double s2 = sigma * sigma;
    if (!(b > 0.0) || !(s2 > 0.0) || !(xi > 0.0) || !(alpha >= -0.5 * s2)) {
        throw InvalidInput("three_half_moment: need b, xi > 0, sigma != 0, alpha >= -sigma^2/2");
    }
    if (!(T > 0.0)) {
        throw DomainError("three_half_moment: T > 0 required (prefactor is singular at T = 0)");
    }
    const double K = 2.0 * alpha / s2 + 2.0;
    if (!(A < K)) {
        throw DomainError("three_half_moment: A < 2 alpha / sigma^2 + 2 violated");
    }
    if (A == 0.0) return 1.0;
    const double scale = 2.0 * b / s2;
    const double bt = b * T;
    // 1 − e^{−bT} and e^{bT} − 1 via expm1 so small bT keeps full precision
    const double log_prefactor = A * (std::log(scale) - std::log(-std::expm1(-bt)));
    const double z = -scale / (std::expm1(bt) * xi);
    const double F = kummer_1f1(A, K, z);
    if (!(F > 0.0)) {
        throw NumericalError("three_half_moment: non-positive hypergeometric factor");
    }
    return std::exp(log_gamma(K - A) - log_gamma(K) + log_prefactor + std::log(F));
}

double gaussian_quad_exp_moment(double eta, double ell, double m, double s2) {
    if (!(s2 >= 0.0)) {
        throw InvalidInput("gaussian_quad_exp_moment: variance must be non-negative");
    }
    const double shrink = 1.0 - eta * s2;
    if (!(shrink > 0.0)) {
        throw DomainError("gaussian_quad_exp_moment: eta * s2 < 1 violated (divergent integral)");
    }
    const double lin = eta * m + ell;
    return std::exp(-0.5 * std::log(shrink) + 0.5 * eta * m * m + ell * m +
                    lin * lin * s2 / (2.0 * shrink));
}

}  // namespace longrun::specialfn
