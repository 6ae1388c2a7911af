#pragma once

#include "longrun/eigen.hpp"
#include "longrun/mc.hpp"
#include "longrun/models.hpp"
#include "longrun/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace longrun {

/// Path discretisations.
///
///   ExactGaussian       OU, exact transition drawn jointly with ΔB
///   ExactCIR            CIR, Poisson-mixed Gamma (noncentral χ²) transition
///   ReciprocalCIR       ThreeHalves, 1/X as an exact CIR
///   LogEuler            QuadraticDrift, Euler on ln X
///   ImplicitSqrt        CIR, drift-implicit Euler on √X
///   ReciprocalImplicit  ThreeHalves, ImplicitSqrt on 1/X
///
/// ExactCIR and ReciprocalCIR consume a parameter-dependent number of
/// uniforms and record no Brownian increments. Every other scheme is a
/// function of stored Gaussian draws, so rerunning it with different drift
/// parameters gives common random numbers.
enum class SchemeKind { ExactGaussian, ExactCIR, ReciprocalCIR, LogEuler, ImplicitSqrt, ReciprocalImplicit };

std::string_view to_string(SchemeKind kind);
std::optional<SchemeKind> parse_scheme(std::string_view name);

SchemeKind exact_scheme(Family family);
SchemeKind brownian_scheme(Family family);
bool brownian_driven(SchemeKind kind);
bool scheme_compatible(SchemeKind kind, Family family);

struct SimScheme {
    SchemeKind kind = SchemeKind::ExactGaussian;
    std::size_t n_steps = 100;
    double T = 1.0;

    double dt() const { return T / static_cast<double>(n_steps); }
};

/// n_steps = ⌈steps_per_unit·T⌉ (at least one).
SimScheme make_scheme(SchemeKind kind, double T, double steps_per_unit);

/// Scratch storage for a single path.
struct PathBuffer {
    std::vector<double> x;    // n_steps + 1 states
    std::vector<double> db;   // Brownian increments
    std::vector<double> aux;  // second normal per step (ExactGaussian)
    double killing = 0.0;     // trapezoid ∫ k(X_s) ds
    bool flagged = false;

    void resize(const SimScheme& scheme);
};

/// Trapezoid ∫ k(X_s) ds over the first `steps` grid intervals.
double trapezoid_killing(const KillingRate& killing, std::span<const double> x, double dt,
                         std::size_t steps);

class PathSimulator {
public:
    /// Throws InvalidInput when the scheme does not fit the family.
    PathSimulator(const Diffusion& diffusion, const KillingRate& killing, const SimScheme& scheme,
                  double xi);

    const SimScheme& scheme() const { return scheme_; }
    const Diffusion& diffusion() const { return diffusion_; }
    const KillingRate& killing() const { return killing_; }
    double xi() const { return xi_; }

    /// Gaussian inputs of a Brownian-driven scheme.
    void draw_noise(Xoshiro256& eng, PathBuffer& buf) const;
    /// Runs the recursion on the noise already in `buf` and fills x, killing
    /// and flagged. Brownian-driven schemes only.
    void advance(PathBuffer& buf) const;
    /// Full path from the engine, any scheme.
    void simulate(Xoshiro256& eng, PathBuffer& buf) const;
    void simulate(const RngPolicy& rng, std::uint64_t path, PathBuffer& buf) const;

private:
    void finish(PathBuffer& buf) const;

    Diffusion diffusion_;
    KillingRate killing_;
    SimScheme scheme_;
    double xi_;
    // per-step constants
    double decay_ = 0.0;
    double shift_ = 0.0;
    double cov_over_dt_ = 0.0;
    double resid_sd_ = 0.0;
    double sqrt_dt_ = 0.0;
};

/// Simulated ensemble under a named measure. Arrays are row-major, one row
/// per path.
struct PathEnsemble {
    Measure measure = Measure::P;
    SchemeKind scheme = SchemeKind::ExactGaussian;
    Family family = Family::OU;
    double T = 0.0;
    double xi = 0.0;
    std::size_t n_paths = 0;
    std::size_t n_steps = 0;
    std::uint64_t seed = 0;
    std::vector<double> times;
    std::vector<double> states;
    std::vector<double> brownian_increments;  // empty for χ² schemes
    std::vector<double> integrated_killing;
    std::vector<double> first_variation;      // empty until first_variation()
    std::vector<std::uint8_t> flagged;
    std::size_t n_flagged = 0;

    double dt() const { return T / static_cast<double>(n_steps); }
    std::span<const double> path(std::size_t i) const;
    std::span<const double> increments(std::size_t i) const;
    std::span<const double> y(std::size_t i) const;
};

/// Throws NumericalError when more than 0.1% of the paths are flagged.
void check_flagged(std::size_t n_flagged, std::size_t n_paths);

PathEnsemble sample_paths(const PathSimulator& sim, std::size_t n_paths, const RngPolicy& rng,
                          Measure measure);

/// Y_t = exp(∫(μ' − ½s'²)ds + ∫s'dB) on the grid: trapezoid in ds,
/// left point in dB. Needs Brownian increments.
void first_variation_generic(const Diffusion& d, std::span<const double> x,
                             std::span<const double> db, double dt, std::vector<double>& y);

/// Pathwise closed forms of Y that need only the states:
///   OU         e^{−κt}
///   CIR        √(X_t/ξ)·exp(∫(−κ/2 − (β/2 − σ²/8)/X) ds)
///   ThreeHalves (X_t/ξ)^{3/2}·exp(−βt/2 − (κ/2 + 3σ²/8)∫X ds)
///   Quadratic  (X_t/ξ)·exp(−∫(β/X + κX) ds)
/// (β = level, κ = speed.)
void first_variation_pathwise(const Diffusion& d, std::span<const double> x, double dt,
                              std::vector<double>& y);

/// For the quadratic-drift model: Y_T from the explicit Malliavin
/// derivative D_0X_T/(σξ) = exp(−2κ∫X ds − ½σ²T + σB_T).
double quadratic_drift_malliavin_y(const Diffusion& d, std::span<const double> x,
                                   std::span<const double> db, double dt);

/// Fills ensemble.first_variation (generic formula when increments are
/// available and `pathwise` is false).
void first_variation(PathEnsemble& ens, const Diffusion& d, bool pathwise = false);

using ScalarField = std::function<double(double)>;

/// Left-point Itô sum Σ (b̄/s)(X_i)ΔB_i.
double likelihood_ratio_path(std::span<const double> x, std::span<const double> db,
                             const Diffusion& d, const ScalarField& bbar);

/// H_x(X_T)·Y_T·∫ κ̄(X_s)/Y_s ds (trapezoid). Returns NaN when Y underflows.
double malliavin_path(std::span<const double> x, std::span<const double> y, double dt,
                      const ScalarField& h_deriv, const ScalarField& kbar);

std::vector<double> likelihood_ratio_weight(const PathEnsemble& ens, const Diffusion& d,
                                            const ScalarField& bbar);
std::vector<double> malliavin_weight_estimate(const PathEnsemble& ens, const ScalarField& h_deriv,
                                              const ScalarField& kbar);

/// E[M_T^φ] = E[(φ(X_T)/φ(ξ))·e^{λT − ∫k(X_s)ds}] over ℙ-paths.
McEstimate martingale_check(const Eigenpair& eig, const PathEnsemble& ens);

/// Debug dump: "LRPE" magic, u32 version, header (seed, n_paths, n_steps,
/// T, xi, measure, scheme, family), then row-major states, increments and
/// integrated killing as little-endian doubles.
void write_ensemble(const PathEnsemble& ens, std::ostream& os);
PathEnsemble read_ensemble(std::istream& is);

}  // namespace longrun
