#include "longrun/mc.hpp"
#include "longrun/parallel.hpp"

#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

namespace longrun {

std::size_t thread_count() {
    if (const char* env = std::getenv("LONGRUN_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v > 0) return static_cast<std::size_t>(v);
        } catch (...) {
            // ignore malformed values
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 16) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

std::string_view to_string(Measure m) { return m == Measure::P ? "P" : "P_hat"; }

McEstimate summarize(std::span<const double> samples, std::uint64_t seed, Measure measure) {
    McEstimate est;
    est.n_paths = samples.size();
    est.seed = seed;
    est.measure = measure;
    if (samples.empty()) return est;
    const double n = static_cast<double>(samples.size());
    est.mean = pairwise_sum(samples) / n;
    if (samples.size() < 2) return est;
    std::vector<double> dev(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double d = samples[i] - est.mean;
        dev[i] = d * d;
    }
    est.std_error = std::sqrt(pairwise_sum(dev) / (n - 1.0) / n);
    return est;
}

bool agree_within(double x, double se_x, double y, double se_y, double k) {
    return std::abs(x - y) <= k * std::sqrt(se_x * se_x + se_y * se_y);
}

}  // namespace longrun
