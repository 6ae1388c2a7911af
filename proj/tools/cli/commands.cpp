#include "commands.hpp"

#include "longrun/error.hpp"
#include "longrun/specialfn.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace longrun::cli {

namespace {

double combined(double a, double b) { return std::sqrt(a * a + b * b); }

// |x − y| in units of the combined standard error; exact agreement is 0 and
// any mismatch with zero noise is infinite.
double z_score(double x, double se_x, double y, double se_y) {
    const double d = std::abs(x - y);
    const double s = combined(se_x, se_y);
    if (s > 0.0) return d / s;
    return d <= 1e-12 * std::max(1.0, std::abs(y)) ? 0.0 : std::numeric_limits<double>::infinity();
}

std::vector<double> grid(double lo, double step, int n) {
    std::vector<double> g(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = lo + step * i;
    return g;
}

std::vector<double> state_grid(Family f, double xi) {
    if (f == Family::OU) return grid(xi - 3.0, 6.0 / 49.0, 50);
    return grid(0.1, 4.9 / 49.0, 50);
}

const Family kStateFamilies[] = {Family::OU, Family::CIR, Family::ThreeHalves, Family::QuadraticDrift};

}  // namespace

CommandResult cmd_decompose(const Scenario& sc) {
    require_valid(sc.spec, sc.market);
    const auto& spec = sc.spec;
    const auto& mkt = sc.market;
    const McConfig cfg = sc.mc();
    const Eigenpair eig = eigenpair(spec, mkt);
    const HatDynamics hat = hat_dynamics(spec, eig);
    const bool stateful = has_state(spec.family);
    const bool limit_only = spec.family == Family::QuadraticDrift;

    CommandResult out;
    out.table.command = "decompose";
    out.table.columns = {"T",        "lambda", "eta",     "ell",          "alpha",           "delta",
                         "phi_xi",   "f_closed", "f_closed_kind", "f_mc", "f_mc_se",      "pT_mc",
                         "pT_mc_se", "pT_assembled", "pT_assembled_se", "hs_z"};
    for (double T : sc.T_list) {
        const double f_closed = !stateful    ? 1.0
                                : limit_only ? remainder_limit(spec.family, eig, hat)
                                             : remainder_closed_form(spec.family, eig, hat, mkt.xi, T);
        std::vector<Cell> row{T, eig.lambda, eig.eta, eig.ell, eig.alpha, eig.delta, eig.phi(mkt.xi), f_closed,
                              std::string(limit_only ? "limit" : "exact")};
        McEstimate f_mc;
        if (stateful) {
            f_mc = estimate_remainder(spec, eig, hat, mkt.xi, T, cfg);
            row.emplace_back(f_mc.mean);
            row.emplace_back(f_mc.std_error);
        } else {
            row.emplace_back(Missing{"no state process"});
            row.emplace_back(Missing{"no state process"});
        }
        const McEstimate p = estimate_pT(spec, mkt, T, cfg);
        const double scale = std::exp(eig.log_phi(mkt.xi) - eig.lambda * T);
        const double assembled = scale * (limit_only ? f_mc.mean : f_closed);
        const double assembled_se = limit_only ? scale * f_mc.std_error : 0.0;
        const double z = z_score(p.mean, p.std_error, assembled, assembled_se);
        row.emplace_back(p.mean);
        row.emplace_back(p.std_error);
        row.emplace_back(assembled);
        row.emplace_back(assembled_se);
        if (std::isfinite(z)) row.emplace_back(z);
        else row.emplace_back(Missing{"zero standard error with a nonzero gap"});
        if (!(z <= 4.0)) out.exit_code = kExitIdentity;
        out.table.add(std::move(row));
    }
    return out;
}

CommandResult cmd_sensitivity(const Scenario& sc) {
    require_valid(sc.spec, sc.market);
    const ConvergenceTable tab = convergence_study(sc.spec, sc.market, sc.T_list, sc.mc());
    CommandResult out;
    out.table.command = "sensitivity";
    out.table.columns = {"T",           "quantity",    "value",            "target",    "residual",
                         "residual_T",  "std_error",   "dlambda_dnu",      "asymptotic_slope",
                         "fitted_c",    "band_ratio",  "residuals_decreasing"};
    const std::string quantity = tab.utility_rows ? "dnu_log_uT_over_T" : "dnu_log_pT_over_T";
    const double band = tab.band_ratio();
    const bool decreasing = tab.residuals_decreasing();
    for (const auto& r : tab.rows) {
        std::vector<Cell> row{r.T, quantity, r.value, r.target, r.residual, r.residual * r.T, r.std_error,
                              tab.dlambda_dnu, tab.asymptotic_slope, tab.fitted_c};
        if (std::isfinite(band)) row.emplace_back(band);
        else row.emplace_back(Missing{"a residual is zero"});
        row.emplace_back(decreasing);
        out.table.add(std::move(row));
    }
    return out;
}

CommandResult cmd_compare(const Scenario& sc) {
    const auto nu_grid = sc.nu_grid.value_or(grid(-5.0, 0.1, 46));
    const auto k_grid = sc.mu_grid.value_or(grid(0.25, 0.25, 16));
    if (nu_grid.empty() || k_grid.empty()) throw InvalidInput("compare needs non-empty nu_grid and mu_grid");

    CommandResult out;
    out.table.command = "compare";
    out.table.columns = {"sweep", "nu", "k", "OU", "CIR", "ThreeHalves", "QuadraticDrift"};

    const auto emit = [&](const std::string& sweep, double nu, double k) {
        MarketParams m = sc.market;
        m.nu = nu;
        std::vector<Cell> row{sweep, nu, k};
        const auto market = validate_market(m);
        for (Family f : kStateFamilies) {
            ModelSpec spec = sc.spec;
            spec.family = f;
            spec.k = k;
            if (!market.ok()) {
                row.emplace_back(Missing{market.joined()});
                continue;
            }
            if (!(spec.sigma > 0.0) || !(spec.b > 0.0)) {
                row.emplace_back(Missing{"b > 0 and sigma > 0 required"});
                continue;
            }
            try {
                row.emplace_back(eigen_nu_derivatives(spec, m).dlambda);
            } catch (const std::exception& e) {
                row.emplace_back(Missing{e.what()});
            }
        }
        out.table.add(std::move(row));
    };
    for (double nu : nu_grid) emit("nu", nu, sc.spec.k);
    for (double k : k_grid) emit("k", sc.market.nu, k);
    return out;
}

namespace {

struct Checks {
    Table table;
    bool failed = false;

    void add(const std::string& name, bool pass, Cell value, Cell threshold, const std::string& detail) {
        failed = failed || !pass;
        table.add({name, std::string(pass ? "pass" : "fail"), std::move(value), std::move(threshold), detail});
    }
    void skip(const std::string& name, const std::string& why) {
        table.add({name, std::string("skip"), Missing{why}, Missing{why}, why});
    }
    // Runs `body`; library errors become a failed check instead of aborting
    // the suite.
    template <class F>
    void guarded(const std::string& name, F&& body) {
        try {
            body();
        } catch (const std::exception& e) {
            add(name, false, Missing{"error"}, Missing{"error"}, e.what());
        }
    }
};

void special_function_checks(Checks& c) {
    c.guarded("kummer_contiguous", [&] {
        std::mt19937_64 eng(2024);
        std::uniform_real_distribution<double> ua(-2.0, 4.0), ub(0.5, 6.0), uz(-40.0, 10.0);
        double worst = 0.0;
        for (int i = 0; i < 100; ++i) {
            const double a = ua(eng), b = ub(eng), z = uz(eng);
            const double t1 = (b - a) * specialfn::kummer_1f1(a - 1.0, b, z);
            const double t2 = (2.0 * a - b + z) * specialfn::kummer_1f1(a, b, z);
            const double t3 = -a * specialfn::kummer_1f1(a + 1.0, b, z);
            const double scale = std::max(std::abs(t1) + std::abs(t2) + std::abs(t3), 1e-300);
            worst = std::max(worst, std::abs(t1 + t2 + t3) / scale);
        }
        c.add("kummer_contiguous", worst <= 1e-9, worst, 1e-9, "(b−a)M(a−1) + (2a−b+z)M(a) − aM(a+1) = 0 on 100 triples");
    });
    c.guarded("cir_mgf_mean", [&] {
        const double b = 0.6, al = 1.32, s = 1.0, x = 0.8, T = 2.0, h = 1e-5;
        const double d = (specialfn::cir_mgf(h, T, b, al, s, x) - specialfn::cir_mgf(-h, T, b, al, s, x)) / (2 * h);
        const double mean = x * std::exp(-al * T) + b / al * (1.0 - std::exp(-al * T));
        const double rel = std::abs(d / mean - 1.0);
        c.add("cir_mgf_mean", rel <= 1e-6, rel, 1e-6, "d/dγ of the CIR transform at 0 equals the mean");
    });
    c.guarded("three_half_limit", [&] {
        const double b = 0.5, al = 1.9, s = 0.8, A = 0.3;
        const double K = 2.0 * al / (s * s) + 2.0;
        const double direct = std::exp(std::lgamma(K - A) - std::lgamma(K) + A * std::log(2.0 * b / (s * s)));
        const double rel = std::abs(specialfn::three_half_moment(A, 60.0, b, al, s, 1.0) / direct - 1.0);
        c.add("three_half_limit", rel <= 1e-8, rel, 1e-8, "finite-T 3/2 moment reaches the Gamma-ratio limit");
    });
    c.guarded("log_gamma_recurrence", [&] {
        double worst = 0.0;
        for (double x : {0.3, 1.7, 9.2, 40.5}) {
            worst = std::max(worst, std::abs(specialfn::log_gamma(x + 1.0) - specialfn::log_gamma(x) - std::log(x)));
        }
        c.add("log_gamma_recurrence", worst <= 1e-12, worst, 1e-12, "lnΓ(x+1) − lnΓ(x) = ln x");
    });
}

}  // namespace

CommandResult cmd_validate(const Scenario& sc, double lambda_shift) {
    Checks c;
    c.table.command = "validate";
    c.table.columns = {"check", "status", "value", "threshold", "detail"};
    const auto& spec = sc.spec;
    const auto& mkt = sc.market;
    const McConfig cfg = sc.mc();
    const double T = sc.T_list.front();

    const auto rep = validate_model(spec, mkt);
    c.add("model_domain", rep.ok(), static_cast<double>(rep.violations.size()), 0.0,
          rep.ok() ? "all parameter invariants hold" : rep.joined());

    if (rep.ok()) {
        c.guarded("generator_residual", [&] {
            const PricingDynamics dyn = derive_pricing_dynamics(spec, mkt);
            Eigenpair eig = eigenpair(spec, dyn);
            eig.lambda += lambda_shift;
            const double res = generator_residual(spec, dyn, eig, state_grid(spec.family, mkt.xi));
            c.add("generator_residual", res <= 1e-8, res, 1e-8, "max relative |Lφ + λφ| on a 50-point grid");
        });
        c.guarded("lambda_sensitivity_fd", [&] {
            const double h = 1e-5 * std::max(1.0, std::abs(mkt.nu));
            const auto lam = [&](double nu) {
                MarketParams m = mkt;
                m.nu = nu;
                return eigenpair(spec, derive_pricing_dynamics(spec, m)).lambda;
            };
            const double fd = (lam(mkt.nu + h) - lam(mkt.nu - h)) / (2.0 * h);
            const double cf = lambda_sensitivity(spec, mkt);
            const double rel = std::abs(cf - fd) / std::max(std::abs(fd), 1e-12);
            c.add("lambda_sensitivity_fd", rel <= 1e-6, rel, 1e-6, "closed-form ∂λ/∂ν against a central difference");
        });
        c.guarded("hs_identity", [&] {
            Eigenpair eig = eigenpair(spec, mkt);
            const HatDynamics hat = hat_dynamics(spec, eig);
            const McEstimate p = estimate_pT(spec, mkt, T, cfg);
            const McEstimate f = estimate_remainder(spec, eig, hat, mkt.xi, T, cfg);
            eig.lambda += lambda_shift;
            const double scale = std::exp(eig.log_phi(mkt.xi) - eig.lambda * T);
            const double z = z_score(p.mean, p.std_error, scale * f.mean, scale * f.std_error);
            c.add("hs_identity", z <= 4.0, std::isfinite(z) ? Cell{z} : Cell{Missing{"zero standard error"}}, 4.0,
                  "MC p_T against φ(ξ)e^{−λT}·(MC remainder), in standard errors");
        });
        if (has_state(spec.family)) {
            c.guarded("martingale", [&] {
                const McEstimate m = estimate_martingale(spec, mkt, T, cfg);
                const double z = z_score(m.mean, m.std_error, 1.0, 0.0);
                c.add("martingale", z <= 3.0, std::isfinite(z) ? Cell{z} : Cell{Missing{"zero standard error"}},
                      3.0, "E[M_T] = 1, in standard errors");
            });
            c.guarded("estimator_cross_validation", [&] {
                const CrossValidation cv = cross_validate_estimators(spec, mkt, T, cfg);
                const double z = std::max({z_score(cv.finite_difference.mean, cv.finite_difference.std_error,
                                                   cv.likelihood_ratio.mean, cv.likelihood_ratio.std_error),
                                           z_score(cv.finite_difference.mean, cv.finite_difference.std_error,
                                                   cv.malliavin.mean, cv.malliavin.std_error),
                                           z_score(cv.likelihood_ratio.mean, cv.likelihood_ratio.std_error,
                                                   cv.malliavin.mean, cv.malliavin.std_error)});
                c.add("estimator_cross_validation", cv.all_agree(), z, 3.0,
                      "FD, likelihood-ratio and Malliavin drift sensitivities, worst pairwise gap in s.e.");
            });
            c.guarded("remainder_split", [&] {
                const RemainderSplit s = remainder_nu_split(spec, mkt, T, cfg);
                const double z = z_score(s.total.mean, s.total.std_error, s.split_sum.mean, s.split_sum.std_error);
                c.add("remainder_split", s.consistent, z, 3.0, "f_ν equals payoff term plus drift term");
            });
        } else {
            for (const char* name : {"martingale", "estimator_cross_validation", "remainder_split"}) {
                c.skip(name, "no state process");
            }
        }
    }
    special_function_checks(c);

    CommandResult out;
    out.table = std::move(c.table);
    out.exit_code = c.failed ? kExitValidation : kExitOk;
    return out;
}

}  // namespace longrun::cli
