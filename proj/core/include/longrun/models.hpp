#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace longrun {

enum class Family { BlackScholes, OU, CIR, ThreeHalves, QuadraticDrift };

std::string_view to_string(Family family);
std::optional<Family> parse_family(std::string_view name);

/// True for the four families that carry a state process X.
constexpr bool has_state(Family f) { return f != Family::BlackScholes; }

/// True when the state space is (0, ∞).
constexpr bool positive_state(Family f) {
    return f == Family::CIR || f == Family::ThreeHalves || f == Family::QuadraticDrift;
}

/// Investor and market scalars.
struct MarketParams {
    double r = 0.0;        // short rate
    double omega = 1.0;    // initial wealth, > 0
    double xi = 1.0;       // initial state X_0
    double nu = -2.0;      // CRRA exponent, < 0
    double rho_bar = 0.0;  // ρ'θ(x) = ρ̄·x (or ρ̄·√x)
    double rho_sq = 0.0;   // ρ'ρ ∈ [0, 1]
};

/// Physical (𝐏-measure) model. `mu` is the stock drift and is used by
/// Black–Scholes only.
struct ModelSpec {
    Family family = Family::OU;
    double b = 0.0;
    double k = 0.0;
    double sigma = 0.0;
    double mu = 0.0;
};

struct ValidationReport {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
    std::string joined() const;
};

/// Checks every MarketParams invariant and the family-specific domain.
/// NaN/Inf inputs are reported as violations.
ValidationReport validate_model(const ModelSpec& spec, const MarketParams& mkt);

/// MarketParams invariants only.
ValidationReport validate_market(const MarketParams& mkt);

/// Throws InvalidInput listing every violation.
void require_valid(const ModelSpec& spec, const MarketParams& mkt);

/// Scalar diffusion dX = μ(X)dt + s(X)dB with the family's coefficient shape:
///
///   OU              μ = level − speed·x       s = σ
///   CIR             μ = level − speed·x       s = σ√x
///   ThreeHalves     μ = (level − speed·x)·x   s = σx^{3/2}
///   QuadraticDrift  μ = level − speed·x²      s = σx
///   BlackScholes    no state (μ = s = 0)
struct Diffusion {
    Family family = Family::OU;
    double level = 0.0;
    double speed = 0.0;
    double sigma = 0.0;

    double drift(double x) const;
    double vol(double x) const;
    double drift_dx(double x) const;
    double vol_dx(double x) const;
};

/// Killing rate q·θ'θ(x) in p_T = E[exp(−∫ killing(X_s) ds)].
struct KillingRate {
    enum class Shape { Constant, Linear, Quadratic };
    Shape shape = Shape::Quadratic;
    double coeff = 0.0;

    double operator()(double x) const {
        switch (shape) {
            case Shape::Constant: return coeff;
            case Shape::Linear: return coeff * x;
            case Shape::Quadratic: return coeff * x * x;
        }
        return coeff;
    }
};

/// ℙ-measure dynamics of X and the killing rate.
struct PricingDynamics {
    Family family = Family::OU;
    double a = 0.0;  // k − νσρ̄/(1 − ν)
    double q = 0.0;  // −ν(1 − ν + νρ'ρ) / (2(1 − ν)²)
    Diffusion diffusion;
    KillingRate killing;
};

double risk_adjusted_speed(const ModelSpec& spec, const MarketParams& mkt);
double killing_coefficient(const MarketParams& mkt);

/// a, q and the ℙ-dynamics. For Black–Scholes the killing is the constant
/// q₀(μ − r)²/σ² with q₀ = −ν/(2(1 − ν)).
/// Throws DomainError when q violates the family's lower bound.
PricingDynamics derive_pricing_dynamics(const ModelSpec& spec, const MarketParams& mkt);

struct Eigenpair;

/// ℙ̂-dynamics (eigen-measure). Only the drift differs from ℙ.
struct HatDynamics {
    Family family = Family::OU;
    double alpha = 0.0;
    double delta = 0.0;  // OU intercept; equals b for the other families
    Diffusion diffusion;
};

HatDynamics hat_dynamics(const ModelSpec& spec, const Eigenpair& eig);

}  // namespace longrun
