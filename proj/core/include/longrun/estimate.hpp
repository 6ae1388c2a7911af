#pragma once

#include "longrun/eigen.hpp"
#include "longrun/mc.hpp"
#include "longrun/models.hpp"
#include "longrun/rng.hpp"
#include "longrun/simulate.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace longrun {

/// Monte Carlo budget shared by the estimators.
struct McConfig {
    std::size_t n_paths = 200000;
    double steps_per_unit = 100.0;  // grid density per unit of time
    RngPolicy rng;
    /// Scheme override; estimators otherwise pick exact schemes for plain
    /// expectations and Brownian-driven ones wherever common random numbers
    /// are needed.
    std::optional<SchemeKind> scheme;
};

/// Default finite-difference step: 1e−3·max(1, |ν|).
double default_fd_step(double nu);

/// p_T = E^ℙ[exp(−∫k(X_s)ds)].
McEstimate estimate_pT(const ModelSpec& spec, const MarketParams& mkt, double T, const McConfig& cfg);

/// f(T, ξ) = E^ℙ̂[1/φ(X_T)].
McEstimate estimate_remainder(const ModelSpec& spec, const Eigenpair& eig, const HatDynamics& hat,
                              double xi, double T, const McConfig& cfg);

/// E^ℙ[M_T^φ], expected to be 1.
McEstimate estimate_martingale(const ModelSpec& spec, const MarketParams& mkt, double T,
                               const McConfig& cfg);

/// (ln p̂_T(ν + h) − ln p̂_T(ν − h))/(2h) with common random numbers; the
/// standard error comes from the delta method on the per-path pairs.
/// Black–Scholes is evaluated in closed form (zero standard error).
McEstimate fd_lnpT_sensitivity(const ModelSpec& spec, const MarketParams& mkt, double T, double h,
                               const McConfig& cfg);

/// Same as above for several horizons from one set of paths simulated to
/// max(T_list). Every horizon must lie on the common grid.
std::vector<McEstimate> fd_lnpT_sensitivity(const ModelSpec& spec, const MarketParams& mkt,
                                            const std::vector<double>& T_list, double h,
                                            const McConfig& cfg);

struct ConvergenceRow {
    double T = 0.0;
    double value = 0.0;   // (1/T)∂ν ln p_T
    double target = 0.0;  // −∂λ/∂ν
    double residual = 0.0;
    double std_error = 0.0;
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;  // sorted by T
    double dlambda_dnu = 0.0;
    double asymptotic_slope = 0.0;
    double fitted_c = 0.0;  // least squares of residual ≈ c/T
    bool noise_dominated = false;
    /// True for Black–Scholes, where rows hold (1/T)∂ν ln u_T against the
    /// closed-form slope and carry no Monte Carlo noise.
    bool utility_rows = false;

    /// Residuals non-increasing in T up to `slack` standard errors.
    bool residuals_decreasing(double slack = 1.0) const;
    /// max(residual·T) / min(residual·T).
    double band_ratio() const;
};

/// Requires T_list ascending with at least three entries.
ConvergenceTable convergence_study(const ModelSpec& spec, const MarketParams& mkt,
                                   const std::vector<double>& T_list, const McConfig& cfg,
                                   std::optional<double> h = std::nullopt);

/// ∂ν' E^{ℙ̂ν'}[H(X_T; ν)] at ν' = ν, with H = 1/φ_ν frozen, estimated three
/// ways on the same ℙ̂ paths.
struct CrossValidation {
    McEstimate finite_difference;
    McEstimate likelihood_ratio;
    McEstimate malliavin;
    bool fd_lr_agree = false;
    bool fd_malliavin_agree = false;
    bool lr_malliavin_agree = false;
    bool all_agree() const { return fd_lr_agree && fd_malliavin_agree && lr_malliavin_agree; }
};

CrossValidation cross_validate_estimators(const ModelSpec& spec, const MarketParams& mkt, double T,
                                          const McConfig& cfg, std::optional<double> h = std::nullopt);

/// Step III: f_ν = E^ℙ̂[∂ν H] + ∂ν' E^{ℙ̂ν'}[H].
struct RemainderSplit {
    McEstimate f;            // f(T, ξ) at ν
    McEstimate total;        // CRN finite difference of f in ν
    McEstimate payoff_term;  // frozen measure, differentiated payoff
    McEstimate drift_term;   // Malliavin representation of the measure change
    McEstimate split_sum;    // payoff_term + drift_term path by path
    bool consistent = false; // |total − split_sum| ≤ 3 combined s.e.
    double f_nu_over_f() const { return total.mean / f.mean; }
};

RemainderSplit remainder_nu_split(const ModelSpec& spec, const MarketParams& mkt, double T,
                                  const McConfig& cfg, std::optional<double> h = std::nullopt);

}  // namespace longrun
