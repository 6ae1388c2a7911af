#pragma once

#include "scenario.hpp"
#include "table.hpp"

namespace longrun::cli {

// Exit-code contract.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitIdentity = 2;
inline constexpr int kExitValidation = 3;

struct CommandResult {
    Table table;
    int exit_code = kExitOk;
};

/// Columns: T, lambda, eta, ell, alpha, delta, phi_xi, f_closed, f_closed_kind,
/// f_mc, f_mc_se, pT_mc, pT_mc_se, pT_assembled, pT_assembled_se, hs_z.
/// f_closed_kind is "exact", or "limit" for the quadratic-drift model, whose
/// assembled p_T then uses the Monte Carlo remainder. Exit 2 when any
/// |pT_mc − pT_assembled| exceeds 4 combined standard errors.
CommandResult cmd_decompose(const Scenario& sc);

/// Convergence table over T_list (at least three horizons). Columns: T,
/// quantity, value, target, residual, residual_T, std_error, dlambda_dnu,
/// asymptotic_slope, fitted_c, band_ratio, residuals_decreasing.
CommandResult cmd_sensitivity(const Scenario& sc);

/// ∂λ/∂ν for the four state families over nu_grid (at the scenario k) and
/// over mu_grid, which sweeps k at the scenario ν. b, σ, ρ̄, ρ'ρ come from
/// the scenario. Columns: sweep, nu, k, OU, CIR, ThreeHalves, QuadraticDrift.
/// Points that break a q-bound are empty cells with a reason.
CommandResult cmd_compare(const Scenario& sc);

/// Invariant suite. Columns: check, status (pass|fail|skip), value,
/// threshold, detail. `lambda_shift` perturbs the eigenvalue used by the
/// eigenpair checks (fault injection). Exit 3 on any failure.
CommandResult cmd_validate(const Scenario& sc, double lambda_shift = 0.0);

}  // namespace longrun::cli
