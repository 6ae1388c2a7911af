// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Monte Carlo budgets are fixed so the output is
// reproducible run to run. Pass criterion ids to run a subset.

#include "commands.hpp"
#include "longrun/eigen.hpp"
#include "longrun/estimate.hpp"
#include "longrun/simulate.hpp"
#include "longrun/specialfn.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <sstream>
#include <string>

using namespace longrun;

namespace {

MarketParams base_market() {
    MarketParams m;
    m.nu = -2.0;
    m.rho_bar = -0.5;
    m.rho_sq = 0.25;
    m.xi = 1.0;
    return m;
}

// CIR keeps b > σ²/2 by taking σ = 0.5; the others use σ = 0.8.
ModelSpec base_spec(Family f) { return {f, 0.16, 2.0, f == Family::CIR ? 0.5 : 0.8, 0.0}; }

McConfig budget(std::size_t paths, double spu, std::uint64_t seed) {
    McConfig cfg;
    cfg.n_paths = paths;
    cfg.steps_per_unit = spu;
    cfg.rng.seed = seed;
    return cfg;
}

const Family kStateFamilies[] = {Family::OU, Family::CIR, Family::ThreeHalves, Family::QuadraticDrift};

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << "[" << what << "] ";
        }
    }
};

int failures = 0;
std::vector<int> selected;  // empty: run everything

void criterion(int id, const char* name, const std::function<void(Outcome&)>& body) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), id) == selected.end()) return;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        body(o);
    } catch (const std::exception& e) {
        o.pass = false;
        o.detail << "exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::printf("%s %d %s (%.1fs): %s\n", o.pass ? "PASS" : "FAIL", id, name, secs, o.detail.str().c_str());
    std::fflush(stdout);
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// Terminal values of a one-step exact simulation.
std::vector<double> exact_terminal(const Diffusion& d, SchemeKind kind, double T, double x0, std::size_t n,
                                   std::uint64_t seed) {
    const PathSimulator sim(d, KillingRate{KillingRate::Shape::Constant, 0.0}, SimScheme{kind, 1, T}, x0);
    const auto ens = sample_paths(sim, n, RngPolicy{seed}, Measure::P);
    std::vector<double> out(n);
    for (std::size_t p = 0; p < n; ++p) out[p] = ens.path(p).back();
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    // optional arguments: criterion ids to run
    for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
    criterion(1, "Black-Scholes closed form", [](Outcome& o) {
        MarketParams m;
        m.nu = -2.0;
        m.r = 0.02;
        m.omega = 1.0;
        const double mu = 0.1, sigma = 0.2, T = 10.0;
        const auto bs = black_scholes_sensitivity(mu, m, sigma, T);
        o.detail << "slope=" << fmt(bs.slope);
        o.require(std::abs(bs.slope - 0.0288889) < 5e-8, "slope != 0.0288889");
        const double h = 1e-5;
        const auto lu = [&](double nu) {
            MarketParams mm = m;
            mm.nu = nu;
            return black_scholes_sensitivity(mu, mm, sigma, T).log_u_T;
        };
        const double fd = (lu(m.nu + h) - lu(m.nu - h)) / (2.0 * h);
        const double rel = std::abs(fd - bs.dlog_u_dnu) / std::abs(bs.dlog_u_dnu);
        o.detail << " fd_rel_err=" << fmt(rel);
        o.require(rel <= 1e-8, "FD vs analytic");
    });

    criterion(2, "Hansen-Scheinkman identity (2e5 paths)", [](Outcome& o) {
        const auto m = base_market();
        for (Family f : {Family::OU, Family::CIR, Family::ThreeHalves}) {
            const auto spec = base_spec(f);
            const auto eig = eigenpair(spec, m);
            const auto hat = hat_dynamics(spec, eig);
            for (double T : {1.0, 5.0, 10.0}) {
                const auto p = estimate_pT(spec, m, T, budget(200000, 100, 2));
                const double hs = std::exp(eig.log_phi(m.xi) - eig.lambda * T) *
                                  remainder_closed_form(f, eig, hat, m.xi, T);
                const double z = (p.mean - hs) / p.std_error;
                o.detail << to_string(f) << "@" << T << " z=" << fmt(z) << " ";
                o.require(std::abs(z) <= 3.0, std::string(to_string(f)));
            }
        }
    });

    criterion(3, "Special-function oracles (1e5 exact-transition paths)", [](Outcome& o) {
        const double b = 0.6, alpha = 1.0, sigma = 1.0, x0 = 1.0;
        const Diffusion cir{Family::CIR, b, alpha, sigma};
        for (auto [g, T] : {std::pair{0.3, 2.0}, std::pair{-0.8, 0.7}}) {
            auto v = exact_terminal(cir, SchemeKind::ExactCIR, T, x0, 100000, 41);
            for (double& x : v) x = std::exp(g * x);
            const auto st = summarize(v, 41, Measure::P);
            const double z = (st.mean - specialfn::cir_mgf(g, T, b, alpha, sigma, x0)) / st.std_error;
            o.detail << "cir(" << g << "," << T << ") z=" << fmt(z) << " ";
            o.require(std::abs(z) <= 3.0, "cir_mgf");
        }
        const Diffusion th{Family::ThreeHalves, 0.16, 1.9, 0.8};
        for (auto [A, T] : {std::pair{0.5, 3.0}, std::pair{-1.0, 1.0}}) {
            auto v = exact_terminal(th, SchemeKind::ReciprocalCIR, T, 1.0, 100000, 43);
            for (double& x : v) x = std::pow(x, A);
            const auto st = summarize(v, 43, Measure::P);
            const double z = (st.mean - specialfn::three_half_moment(A, T, 0.16, 1.9, 0.8, 1.0)) / st.std_error;
            o.detail << "3/2(" << A << "," << T << ") z=" << fmt(z) << " ";
            o.require(std::abs(z) <= 3.0, "three_half_moment");
        }
        std::mt19937_64 eng(2024);
        std::uniform_real_distribution<double> ua(-2.0, 4.0), ub(0.5, 6.0), uz(-40.0, 10.0);
        double worst = 0.0;
        for (int i = 0; i < 100; ++i) {
            const double a = ua(eng), bb = ub(eng), z = uz(eng);
            const double t1 = (bb - a) * specialfn::kummer_1f1(a - 1.0, bb, z);
            const double t2 = (2.0 * a - bb + z) * specialfn::kummer_1f1(a, bb, z);
            const double t3 = -a * specialfn::kummer_1f1(a + 1.0, bb, z);
            const double scale = std::max(std::abs(t1) + std::abs(t2) + std::abs(t3), 1e-300);
            worst = std::max(worst, std::abs(t1 + t2 + t3) / scale);
        }
        o.detail << "kummer_contiguous=" << fmt(worst);
        o.require(worst <= 1e-9, "Kummer contiguous relation");
    });

    criterion(4, "Sensitivity asymptote c/T", [](Outcome& o) {
        const auto m = base_market();
        for (Family f : kStateFamilies) {
            const auto tab = convergence_study(base_spec(f), m, {2.0, 5.0, 10.0, 20.0}, budget(200000, 50, 4));
            const bool dec = tab.residuals_decreasing(1.0);
            const double band = tab.band_ratio();
            o.detail << to_string(f) << " band=" << fmt(band) << (dec ? " dec " : " NOT-dec ");
            o.require(dec && band <= 3.0, std::string(to_string(f)));
        }
    });

    criterion(5, "Estimator equivalence FD/LR/Malliavin (T=2)", [](Outcome& o) {
        const auto m = base_market();
        for (Family f : {Family::OU, Family::CIR}) {
            const auto cv = cross_validate_estimators(base_spec(f), m, 2.0, budget(200000, 200, 5));
            o.detail << to_string(f) << " fd=" << fmt(cv.finite_difference.mean) << "±"
                     << fmt(cv.finite_difference.std_error) << " lr=" << fmt(cv.likelihood_ratio.mean) << "±"
                     << fmt(cv.likelihood_ratio.std_error) << " mal=" << fmt(cv.malliavin.mean) << "±"
                     << fmt(cv.malliavin.std_error) << " ";
            o.require(cv.all_agree(), std::string(to_string(f)));
        }
    });

    criterion(6, "Martingale normalization (T=5)", [](Outcome& o) {
        const auto m = base_market();
        for (Family f : kStateFamilies) {
            const auto est = estimate_martingale(base_spec(f), m, 5.0, budget(200000, 200, 6));
            const double z = (est.mean - 1.0) / est.std_error;
            o.detail << to_string(f) << " z=" << fmt(z) << " ";
            o.require(std::abs(z) <= 3.0, std::string(to_string(f)));
        }
    });

    criterion(7, "Closed-form dlambda/dnu vs FD", [](Outcome& o) {
        double worst = 0.0;
        for (Family f : kStateFamilies) {
            const auto spec = base_spec(f);
            for (int i = 0; i <= 9; ++i) {
                MarketParams m = base_market();
                m.nu = -5.0 + 0.5 * i;
                const double h = 1e-5 * std::max(1.0, std::abs(m.nu));
                const auto lam = [&](double nu) {
                    MarketParams mm = m;
                    mm.nu = nu;
                    return eigenpair(spec, mm).lambda;
                };
                const double fd = (lam(m.nu + h) - lam(m.nu - h)) / (2.0 * h);
                const double rel = std::abs(lambda_sensitivity(spec, m) - fd) / std::abs(fd);
                worst = std::max(worst, rel);
                o.require(rel <= 1e-6, std::string(to_string(f)) + "@" + fmt(m.nu));
            }
        }
        o.detail << "worst_rel_err=" << fmt(worst);
    });

    criterion(8, "compare output (structural)", [](Outcome& o) {
        cli::Scenario sc;
        sc.spec = {Family::OU, 0.16, 2.0, 0.8, 0.0};
        sc.market = base_market();
        const auto res = cli::cmd_compare(sc);
        const auto& rows = res.table.rows;
        std::size_t n_nu = 0;
        for (const auto& r : rows) n_nu += std::get<std::string>(r[0]) == "nu";
        o.require(n_nu > 2 && rows.size() > n_nu + 2, "grids");
        for (std::size_t col = 3; col < 7; ++col) {
            const std::string fam = res.table.columns[col];
            for (auto [lo, hi] : {std::pair{std::size_t{0}, n_nu}, std::pair{n_nu, rows.size()}}) {
                std::vector<double> y;
                for (std::size_t i = lo; i < hi; ++i) {
                    const auto* v = std::get_if<double>(&rows[i][col]);
                    o.require(v && std::isfinite(*v), fam + " finite");
                    if (v) y.push_back(*v);
                }
                if (y.size() < 3) continue;
                const bool neg = y.front() < 0.0;
                const auto [mn, mx] = std::minmax_element(y.begin(), y.end());
                const double range = *mx - *mn;
                for (std::size_t i = 0; i < y.size(); ++i) {
                    o.require((y[i] < 0.0) == neg, fam + " sign stable");
                    if (i < 2) continue;
                    // neighbouring steps of a continuous curve on a fine grid are alike
                    const double d1 = y[i - 1] - y[i - 2], d2 = y[i] - y[i - 1];
                    o.require(std::abs(d2 - d1) <= 0.5 * std::max(std::abs(d1), std::abs(d2)) + 1e-3 * range,
                              fam + " continuity");
                }
            }
            o.detail << fam << (std::get<double>(rows[0][col]) < 0 ? "(-) " : "(+) ");
        }
        o.detail << rows.size() << " rows";
    });

    return failures == 0 ? 0 : 1;
}
