#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace longrun {

enum class Measure { P, PHat };

std::string_view to_string(Measure m);

/// Universal Monte Carlo return type.
struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n_paths = 0;
    std::uint64_t seed = 0;
    Measure measure = Measure::P;
};

/// Sample mean and standard error of the mean, both by pairwise sums.
McEstimate summarize(std::span<const double> samples, std::uint64_t seed, Measure measure);

/// |x − y| ≤ k·√(se_x² + se_y²).
bool agree_within(double x, double se_x, double y, double se_y, double k = 3.0);

}  // namespace longrun
