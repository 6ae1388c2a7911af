#pragma once

// Independent reference computations for the tests. Nothing here calls into
// the library under test.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <random>

namespace oracle {

/// Straight Maclaurin series of 1F1 in long double, no transformations.
inline long double kummer_series(long double a, long double b, long double z, int terms = 200) {
    long double term = 1.0L;
    long double sum = 1.0L;
    for (int n = 0; n < terms; ++n) {
        term *= (a + n) / (b + n) * z / (n + 1);
        sum += term;
    }
    return sum;
}

/// Adaptive Gauss–Kronrod on [lo, hi] (infinite bounds allowed).
inline double integrate(const std::function<double(double)>& f, double lo, double hi,
                        double tol = 1e-13) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, hi, 25, tol);
}

/// E[g(X)] for X ~ N(m, s2) by quadrature over m ± 40 s.
inline double gaussian_expectation(const std::function<double(double)>& g, double m, double s2) {
    const double s = std::sqrt(s2);
    const auto dens = [&](double x) {
        const double z = (x - m) / s;
        return g(x) * std::exp(-0.5 * z * z) / (s * std::sqrt(2.0 * std::numbers::pi));
    };
    return integrate(dens, m - 40.0 * s, m + 40.0 * s);
}

inline double central_diff(const std::function<double(double)>& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

/// Exact CIR transition by the Poisson mixture of central χ² laws:
/// dX = (b − αX)dt + σ√X dW.
class CirSampler {
public:
    CirSampler(double b, double alpha, double sigma, double T)
        : c_(sigma * sigma * (1.0 - std::exp(-alpha * T)) / (4.0 * alpha)),
          d_(4.0 * b / (sigma * sigma)),
          decay_(std::exp(-alpha * T)) {}

    template <class Eng>
    double operator()(double x0, Eng& eng) const {
        const double nc = x0 * decay_ / c_;
        std::poisson_distribution<long> pois(0.5 * nc);
        std::chi_squared_distribution<double> chi(d_ + 2.0 * static_cast<double>(pois(eng)));
        return c_ * chi(eng);
    }

private:
    double c_;
    double d_;
    double decay_;
};

struct SampleStats {
    double mean = 0.0;
    double se = 0.0;
};

template <class Draw>
SampleStats sample_mean(std::size_t n, Draw&& draw) {
    long double s = 0.0L;
    long double s2 = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
        const long double v = draw();
        s += v;
        s2 += v * v;
    }
    const long double m = s / n;
    const long double var = (s2 / n - m * m) * n / (n - 1);
    return {static_cast<double>(m), static_cast<double>(std::sqrt(var / n))};
}

}  // namespace oracle
