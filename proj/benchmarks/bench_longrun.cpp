#include "longrun/eigen.hpp"
#include "longrun/estimate.hpp"
#include "longrun/simulate.hpp"
#include "longrun/specialfn.hpp"

#include <benchmark/benchmark.h>

using namespace longrun;

namespace {

MarketParams base_market() {
    MarketParams m;
    m.nu = -2.0;
    m.rho_bar = -0.5;
    m.rho_sq = 0.25;
    return m;
}

ModelSpec spec_for(Family f) { return {f, 0.16, 2.0, f == Family::CIR ? 0.5 : 0.8, 0.0}; }

void BM_Kummer(benchmark::State& st) {
    const double z = static_cast<double>(st.range(0));
    for (auto _ : st) benchmark::DoNotOptimize(specialfn::kummer_1f1(1.7, 3.2, -z));
}
BENCHMARK(BM_Kummer)->Arg(1)->Arg(20)->Arg(150);

void BM_CirMgf(benchmark::State& st) {
    for (auto _ : st) benchmark::DoNotOptimize(specialfn::cir_mgf(-0.4, 3.0, 0.6, 1.3, 1.0, 0.8));
}
BENCHMARK(BM_CirMgf);

void BM_ThreeHalfMoment(benchmark::State& st) {
    for (auto _ : st) benchmark::DoNotOptimize(specialfn::three_half_moment(0.5, 3.0, 0.16, 1.9, 0.8, 1.0));
}
BENCHMARK(BM_ThreeHalfMoment);

void BM_LambdaSensitivity(benchmark::State& st) {
    const auto spec = spec_for(static_cast<Family>(st.range(0)));
    const auto m = base_market();
    for (auto _ : st) benchmark::DoNotOptimize(lambda_sensitivity(spec, m));
}
BENCHMARK(BM_LambdaSensitivity)->DenseRange(1, 4);

void BM_QuadraticDriftLimit(benchmark::State& st) {
    const auto spec = spec_for(Family::QuadraticDrift);
    const auto e = eigenpair(spec, base_market());
    for (auto _ : st) {
        benchmark::DoNotOptimize(quadratic_drift_invariant_moment(e.eta, spec.b, e.alpha, spec.sigma));
    }
}
BENCHMARK(BM_QuadraticDriftLimit);

// One path of 100 steps, per scheme.
void BM_SimulatePath(benchmark::State& st) {
    const auto kind = static_cast<SchemeKind>(st.range(0));
    Family f = Family::OU;
    switch (kind) {
        case SchemeKind::ExactCIR:
        case SchemeKind::ImplicitSqrt: f = Family::CIR; break;
        case SchemeKind::ReciprocalCIR:
        case SchemeKind::ReciprocalImplicit: f = Family::ThreeHalves; break;
        case SchemeKind::LogEuler: f = Family::QuadraticDrift; break;
        case SchemeKind::ExactGaussian: break;
    }
    const auto spec = spec_for(f);
    const auto dyn = derive_pricing_dynamics(spec, base_market());
    const PathSimulator sim(dyn.diffusion, dyn.killing, make_scheme(kind, 1.0, 100), 1.0);
    PathBuffer buf;
    Xoshiro256 eng(1);
    for (auto _ : st) {
        sim.simulate(eng, buf);
        benchmark::DoNotOptimize(buf.killing);
    }
    st.SetLabel(std::string(to_string(kind)));
    st.SetItemsProcessed(st.iterations() * 100);
}
BENCHMARK(BM_SimulatePath)->DenseRange(0, 5);

void BM_EstimatePT(benchmark::State& st) {
    const auto spec = spec_for(Family::OU);
    McConfig cfg;
    cfg.n_paths = static_cast<std::size_t>(st.range(0));
    cfg.steps_per_unit = 100;
    for (auto _ : st) benchmark::DoNotOptimize(estimate_pT(spec, base_market(), 1.0, cfg).mean);
    st.SetItemsProcessed(st.iterations() * st.range(0));
}
BENCHMARK(BM_EstimatePT)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
