#include "longrun/estimate.hpp"

#include "longrun/error.hpp"
#include "longrun/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace longrun {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Setup {
    PricingDynamics dyn;
    Eigenpair eig;
    HatDynamics hat;
};

Setup setup(const ModelSpec& spec, const MarketParams& mkt) {
    require_valid(spec, mkt);
    Setup s;
    s.dyn = derive_pricing_dynamics(spec, mkt);
    s.eig = eigenpair(spec, s.dyn);
    s.hat = hat_dynamics(spec, s.eig);
    return s;
}

MarketParams with_nu(const MarketParams& mkt, double nu) {
    MarketParams m = mkt;
    m.nu = nu;
    return m;
}

void check_fd_step(const MarketParams& mkt, double h) {
    if (!(h > 0.0)) throw InvalidInput("finite-difference step must be positive");
    if (!(mkt.nu + h < 0.0)) throw InvalidInput("nu + h must stay negative");
}

// Drops NaN samples (flagged paths), enforcing the 0.1% limit.
McEstimate summarize_finite(std::vector<double> v, const RngPolicy& rng, Measure m) {
    const std::size_t n = v.size();
    std::erase_if(v, [](double x) { return std::isnan(x); });
    check_flagged(n - v.size(), n);
    return summarize(v, rng.seed, m);
}

SchemeKind pick_scheme(const McConfig& cfg, Family family, bool need_crn) {
    const SchemeKind k = cfg.scheme.value_or(need_crn ? brownian_scheme(family) : exact_scheme(family));
    if (!scheme_compatible(k, family)) {
        throw InvalidInput("scheme " + std::string(to_string(k)) + " does not apply to " +
                           std::string(to_string(family)));
    }
    if (need_crn && !brownian_driven(k)) {
        throw InvalidInput("common random numbers need a Brownian-driven scheme, not " +
                           std::string(to_string(k)));
    }
    return k;
}

const KillingRate kNoKilling{KillingRate::Shape::Constant, 0.0};

}  // namespace

double default_fd_step(double nu) { return 1e-3 * std::max(1.0, std::abs(nu)); }

McEstimate estimate_pT(const ModelSpec& spec, const MarketParams& mkt, double T, const McConfig& cfg) {
    const Setup s = setup(spec, mkt);
    if (!has_state(spec.family)) {
        McEstimate est;
        est.mean = std::exp(-s.dyn.killing.coeff * T);
        est.n_paths = cfg.n_paths;
        est.seed = cfg.rng.seed;
        return est;
    }
    const SimScheme scheme = make_scheme(pick_scheme(cfg, spec.family, false), T, cfg.steps_per_unit);
    const PathSimulator sim(s.dyn.diffusion, s.dyn.killing, scheme, mkt.xi);
    std::vector<double> v(cfg.n_paths);
    parallel_blocks(cfg.n_paths, [&](std::size_t lo, std::size_t hi) {
        PathBuffer buf;
        for (std::size_t p = lo; p < hi; ++p) {
            sim.simulate(cfg.rng, p, buf);
            v[p] = buf.flagged ? kNaN : std::exp(-buf.killing);
        }
    });
    return summarize_finite(std::move(v), cfg.rng, Measure::P);
}

McEstimate estimate_remainder(const ModelSpec& spec, const Eigenpair& eig, const HatDynamics& hat,
                              double xi, double T, const McConfig& cfg) {
    if (!has_state(spec.family)) {
        McEstimate est;
        est.mean = 1.0;
        est.n_paths = cfg.n_paths;
        est.seed = cfg.rng.seed;
        est.measure = Measure::PHat;
        return est;
    }
    const SimScheme scheme = make_scheme(pick_scheme(cfg, spec.family, false), T, cfg.steps_per_unit);
    const PathSimulator sim(hat.diffusion, kNoKilling, scheme, xi);
    std::vector<double> v(cfg.n_paths);
    parallel_blocks(cfg.n_paths, [&](std::size_t lo, std::size_t hi) {
        PathBuffer buf;
        for (std::size_t p = lo; p < hi; ++p) {
            sim.simulate(cfg.rng, p, buf);
            v[p] = buf.flagged ? kNaN : eig.inv_phi(buf.x.back());
        }
    });
    return summarize_finite(std::move(v), cfg.rng, Measure::PHat);
}

McEstimate estimate_martingale(const ModelSpec& spec, const MarketParams& mkt, double T,
                               const McConfig& cfg) {
    const Setup s = setup(spec, mkt);
    if (!has_state(spec.family)) {
        McEstimate est;
        est.mean = 1.0;
        est.n_paths = cfg.n_paths;
        est.seed = cfg.rng.seed;
        return est;
    }
    const SimScheme scheme = make_scheme(pick_scheme(cfg, spec.family, false), T, cfg.steps_per_unit);
    const PathSimulator sim(s.dyn.diffusion, s.dyn.killing, scheme, mkt.xi);
    const double base = s.eig.log_phi(mkt.xi) - s.eig.lambda * T;
    std::vector<double> v(cfg.n_paths);
    parallel_blocks(cfg.n_paths, [&](std::size_t lo, std::size_t hi) {
        PathBuffer buf;
        for (std::size_t p = lo; p < hi; ++p) {
            sim.simulate(cfg.rng, p, buf);
            v[p] = buf.flagged ? kNaN : std::exp(s.eig.log_phi(buf.x.back()) - base - buf.killing);
        }
    });
    return summarize_finite(std::move(v), cfg.rng, Measure::P);
}

std::vector<McEstimate> fd_lnpT_sensitivity(const ModelSpec& spec, const MarketParams& mkt,
                                            const std::vector<double>& T_list, double h,
                                            const McConfig& cfg) {
    if (T_list.empty()) throw InvalidInput("fd_lnpT_sensitivity: empty horizon list");
    for (double T : T_list) {
        if (!(T > 0.0)) throw InvalidInput("fd_lnpT_sensitivity: horizons must be positive");
    }
    check_fd_step(mkt, h);
    const MarketParams up = with_nu(mkt, mkt.nu + h);
    const MarketParams dn = with_nu(mkt, mkt.nu - h);
    const Setup s_up = setup(spec, up);
    const Setup s_dn = setup(spec, dn);
    const std::size_t m = T_list.size();
    std::vector<McEstimate> out(m);

    if (!has_state(spec.family)) {
        for (std::size_t j = 0; j < m; ++j) {
            out[j].mean = (closed_form_log_pT(spec, up, T_list[j]) - closed_form_log_pT(spec, dn, T_list[j])) /
                          (2.0 * h);
            out[j].n_paths = 0;
            out[j].seed = cfg.rng.seed;
        }
        return out;
    }

    const double T_max = *std::max_element(T_list.begin(), T_list.end());
    const SimScheme scheme = make_scheme(pick_scheme(cfg, spec.family, true), T_max, cfg.steps_per_unit);
    const double dt = scheme.dt();
    std::vector<std::size_t> idx(m);
    for (std::size_t j = 0; j < m; ++j) {
        const double steps = T_list[j] / dt;
        idx[j] = static_cast<std::size_t>(std::llround(steps));
        if (idx[j] == 0 || std::abs(steps - static_cast<double>(idx[j])) > 1e-7) {
            throw InvalidInput("horizon " + std::to_string(T_list[j]) +
                               " does not lie on the simulation grid (dt = " + std::to_string(dt) + ")");
        }
    }

    const PathSimulator sim_up(s_up.dyn.diffusion, s_up.dyn.killing, scheme, mkt.xi);
    const PathSimulator sim_dn(s_dn.dyn.diffusion, s_dn.dyn.killing, scheme, mkt.xi);
    const std::size_t n = cfg.n_paths;
    std::vector<double> k_up(n * m), k_dn(n * m);

    // Cumulative trapezoid killing read off at each horizon.
    const auto checkpoints = [&](const KillingRate& kill, const std::vector<double>& x, double* dst) {
        double acc = 0.0;
        double prev = kill(x[0]);
        std::size_t i = 0;
        for (std::size_t j = 0; j < m; ++j) {
            for (; i < idx[j]; ++i) {
                const double next = kill(x[i + 1]);
                acc += 0.5 * (prev + next) * dt;
                prev = next;
            }
            dst[j] = acc;
        }
    };
    // checkpoints walks idx in order, so sort a copy of the horizons
    std::vector<std::size_t> order(m);
    for (std::size_t j = 0; j < m; ++j) order[j] = j;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return idx[a] < idx[b]; });
    std::vector<std::size_t> sorted_idx(m);
    for (std::size_t j = 0; j < m; ++j) sorted_idx[j] = idx[order[j]];
    idx = sorted_idx;

    parallel_blocks(n, [&](std::size_t lo, std::size_t hi) {
        PathBuffer buf;
        std::vector<double> tmp(m);
        for (std::size_t p = lo; p < hi; ++p) {
            Xoshiro256 eng = cfg.rng.engine(p);
            sim_up.draw_noise(eng, buf);
            sim_up.advance(buf);
            bool bad = buf.flagged;
            checkpoints(s_up.dyn.killing, buf.x, tmp.data());
            for (std::size_t j = 0; j < m; ++j) k_up[p * m + order[j]] = tmp[j];
            sim_dn.advance(buf);
            bad = bad || buf.flagged;
            checkpoints(s_dn.dyn.killing, buf.x, tmp.data());
            for (std::size_t j = 0; j < m; ++j) k_dn[p * m + order[j]] = tmp[j];
            if (bad) {
                for (std::size_t j = 0; j < m; ++j) k_up[p * m + j] = k_dn[p * m + j] = kNaN;
            }
        }
    });

    std::vector<double> w_up, w_dn, dev;
    for (std::size_t j = 0; j < m; ++j) {
        w_up.clear();
        w_dn.clear();
        for (std::size_t p = 0; p < n; ++p) {
            const double a = k_up[p * m + j];
            if (std::isnan(a)) continue;
            w_up.push_back(std::exp(-a));
            w_dn.push_back(std::exp(-k_dn[p * m + j]));
        }
        check_flagged(n - w_up.size(), n);
        const double p_up = pairwise_sum(w_up) / static_cast<double>(w_up.size());
        const double p_dn = pairwise_sum(w_dn) / static_cast<double>(w_dn.size());
        dev.resize(w_up.size());
        for (std::size_t i = 0; i < w_up.size(); ++i) {
            dev[i] = (w_up[i] / p_up - w_dn[i] / p_dn) / (2.0 * h);
        }
        McEstimate est = summarize(dev, cfg.rng.seed, Measure::P);
        est.mean = (std::log(p_up) - std::log(p_dn)) / (2.0 * h);
        out[j] = est;
    }
    return out;
}

McEstimate fd_lnpT_sensitivity(const ModelSpec& spec, const MarketParams& mkt, double T, double h,
                               const McConfig& cfg) {
    return fd_lnpT_sensitivity(spec, mkt, std::vector<double>{T}, h, cfg).front();
}

bool ConvergenceTable::residuals_decreasing(double slack) const {
    for (std::size_t j = 1; j < rows.size(); ++j) {
        const double se = std::hypot(rows[j - 1].std_error, rows[j].std_error);
        if (rows[j].residual > rows[j - 1].residual + slack * se) return false;
    }
    return true;
}

double ConvergenceTable::band_ratio() const {
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (const auto& r : rows) {
        const double v = r.residual * r.T;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
    return hi / lo;
}

ConvergenceTable convergence_study(const ModelSpec& spec, const MarketParams& mkt,
                                   const std::vector<double>& T_list, const McConfig& cfg,
                                   std::optional<double> h) {
    if (T_list.size() < 3) throw InvalidInput("convergence_study: need at least three horizons");
    if (!std::is_sorted(T_list.begin(), T_list.end()) ||
        std::adjacent_find(T_list.begin(), T_list.end()) != T_list.end()) {
        throw InvalidInput("convergence_study: horizons must be strictly ascending");
    }
    require_valid(spec, mkt);
    ConvergenceTable table;
    const SensitivityReport rep = asymptotic_utility_sensitivity(spec, mkt);
    table.dlambda_dnu = rep.dlambda_dnu;
    table.asymptotic_slope = rep.asymptotic_slope;

    if (!has_state(spec.family)) {
        table.utility_rows = true;
        for (double T : T_list) {
            const auto bs = black_scholes_sensitivity(spec.mu, mkt, spec.sigma, T);
            ConvergenceRow row;
            row.T = T;
            row.value = bs.dlog_u_dnu / T;
            row.target = bs.slope;
            row.residual = std::abs(row.value - row.target);
            table.rows.push_back(row);
        }
    } else {
        const double step = h.value_or(default_fd_step(mkt.nu));
        const auto ests = fd_lnpT_sensitivity(spec, mkt, T_list, step, cfg);
        for (std::size_t j = 0; j < T_list.size(); ++j) {
            ConvergenceRow row;
            row.T = T_list[j];
            row.value = ests[j].mean / row.T;
            row.target = -rep.dlambda_dnu;
            row.residual = std::abs(row.value - row.target);
            row.std_error = ests[j].std_error / row.T;
            table.rows.push_back(row);
        }
    }
    double num = 0.0;
    double den = 0.0;
    for (const auto& r : table.rows) {
        num += r.residual / r.T;
        den += 1.0 / (r.T * r.T);
    }
    table.fitted_c = num / den;
    const auto& last = table.rows.back();
    table.noise_dominated = last.std_error > last.residual;
    return table;
}

namespace {

// Per-path quantities for the ℙ̂ drift-sensitivity studies. NaN marks a
// dropped path.
struct HatStudy {
    std::vector<double> h0;        // H_ν(X_T^ν)
    std::vector<double> fd_total;  // (H_{ν+h}(X_T^{ν+h}) − H_{ν−h}(X_T^{ν−h}))/2h
    std::vector<double> fd_drift;  // (H_ν(X_T^{ν+h}) − H_ν(X_T^{ν−h}))/2h
    std::vector<double> payoff;    // (H_{ν+h} − H_{ν−h})(X_T^ν)/2h
    std::vector<double> lr;
    std::vector<double> malliavin;
};

HatStudy run_hat_study(const ModelSpec& spec, const MarketParams& mkt, double T, const McConfig& cfg,
                       double h) {
    if (!has_state(spec.family)) {
        throw InvalidInput("drift-sensitivity estimators need a state process");
    }
    check_fd_step(mkt, h);
    const Setup s0 = setup(spec, mkt);
    const Setup s_up = setup(spec, with_nu(mkt, mkt.nu + h));
    const Setup s_dn = setup(spec, with_nu(mkt, mkt.nu - h));
    const EigenNuDerivatives d = eigen_nu_derivatives(spec, mkt);
    const Family fam = spec.family;

    const SimScheme scheme = make_scheme(pick_scheme(cfg, fam, true), T, cfg.steps_per_unit);
    const PathSimulator sim0(s0.hat.diffusion, kNoKilling, scheme, mkt.xi);
    const PathSimulator sim_up(s_up.hat.diffusion, kNoKilling, scheme, mkt.xi);
    const PathSimulator sim_dn(s_dn.hat.diffusion, kNoKilling, scheme, mkt.xi);
    const Diffusion& diff0 = s0.hat.diffusion;
    const double dt = scheme.dt();
    const auto kbar = [&](double x) { return hat_drift_nu_derivative(fam, d, x); };
    const ScalarField kbar_f = kbar;
    const ScalarField hx_f = [&](double x) { return s0.eig.dinv_phi(x); };
    // Y for the quadratic-drift model follows the explicit Malliavin
    // derivative; the other families use their pathwise closed forms.
    const bool generic_y = fam == Family::QuadraticDrift;

    const std::size_t n = cfg.n_paths;
    HatStudy st;
    for (auto* v : {&st.h0, &st.fd_total, &st.fd_drift, &st.payoff, &st.lr, &st.malliavin}) v->assign(n, kNaN);

    parallel_blocks(n, [&](std::size_t lo, std::size_t hi) {
        PathBuffer buf;
        std::vector<double> y;
        for (std::size_t p = lo; p < hi; ++p) {
            Xoshiro256 eng = cfg.rng.engine(p);
            sim0.draw_noise(eng, buf);
            sim_up.advance(buf);
            bool bad = buf.flagged;
            const double x_up = buf.x.back();
            sim_dn.advance(buf);
            bad = bad || buf.flagged;
            const double x_dn = buf.x.back();
            sim0.advance(buf);
            bad = bad || buf.flagged;
            if (bad) continue;
            const double xT = buf.x.back();
            if (generic_y) {
                first_variation_generic(diff0, buf.x, buf.db, dt, y);
            } else {
                first_variation_pathwise(diff0, buf.x, dt, y);
            }
            const double mal = malliavin_path(buf.x, y, dt, hx_f, kbar_f);
            if (std::isnan(mal)) continue;
            const double h0 = s0.eig.inv_phi(xT);
            st.h0[p] = h0;
            st.fd_total[p] = (s_up.eig.inv_phi(x_up) - s_dn.eig.inv_phi(x_dn)) / (2.0 * h);
            st.fd_drift[p] = (s0.eig.inv_phi(x_up) - s0.eig.inv_phi(x_dn)) / (2.0 * h);
            st.payoff[p] = (s_up.eig.inv_phi(xT) - s_dn.eig.inv_phi(xT)) / (2.0 * h);
            st.lr[p] = h0 * likelihood_ratio_path(buf.x, buf.db, diff0, kbar_f);
            st.malliavin[p] = mal;
        }
    });
    return st;
}

}  // namespace

CrossValidation cross_validate_estimators(const ModelSpec& spec, const MarketParams& mkt, double T,
                                          const McConfig& cfg, std::optional<double> h) {
    const HatStudy st = run_hat_study(spec, mkt, T, cfg, h.value_or(default_fd_step(mkt.nu)));
    CrossValidation cv;
    cv.finite_difference = summarize_finite(st.fd_drift, cfg.rng, Measure::PHat);
    cv.likelihood_ratio = summarize_finite(st.lr, cfg.rng, Measure::PHat);
    cv.malliavin = summarize_finite(st.malliavin, cfg.rng, Measure::PHat);
    const auto agree = [](const McEstimate& a, const McEstimate& b) {
        return agree_within(a.mean, a.std_error, b.mean, b.std_error);
    };
    cv.fd_lr_agree = agree(cv.finite_difference, cv.likelihood_ratio);
    cv.fd_malliavin_agree = agree(cv.finite_difference, cv.malliavin);
    cv.lr_malliavin_agree = agree(cv.likelihood_ratio, cv.malliavin);
    return cv;
}

RemainderSplit remainder_nu_split(const ModelSpec& spec, const MarketParams& mkt, double T,
                                  const McConfig& cfg, std::optional<double> h) {
    const HatStudy st = run_hat_study(spec, mkt, T, cfg, h.value_or(default_fd_step(mkt.nu)));
    RemainderSplit out;
    out.f = summarize_finite(st.h0, cfg.rng, Measure::PHat);
    out.total = summarize_finite(st.fd_total, cfg.rng, Measure::PHat);
    out.payoff_term = summarize_finite(st.payoff, cfg.rng, Measure::PHat);
    out.drift_term = summarize_finite(st.malliavin, cfg.rng, Measure::PHat);
    std::vector<double> sum(st.payoff.size());
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] = st.payoff[i] + st.malliavin[i];
    out.split_sum = summarize_finite(std::move(sum), cfg.rng, Measure::PHat);
    out.consistent = agree_within(out.total.mean, out.total.std_error, out.split_sum.mean,
                                  out.split_sum.std_error);
    return out;
}

}  // namespace longrun
