#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "ksample/errors.hpp"
#include "ksample/rng.hpp"

namespace ksample {

enum class DistFamily { Normal, Gamma, Beta, Uniform };

inline const char* dist_family_name(DistFamily family) {
    switch (family) {
    case DistFamily::Normal:
        return "normal";
    case DistFamily::Gamma:
        return "gamma";
    case DistFamily::Beta:
        return "beta";
    case DistFamily::Uniform:
        return "uniform";
    }
    return "unknown";
}

// One univariate distribution. Parameter meaning depends on the family:
// normal(mean, variance), gamma(shape, rate), beta(a, b), uniform(lo, hi).
// Note the normal is parameterized by variance, not standard deviation.
struct DistSpec {
    DistFamily family = DistFamily::Normal;
    double p1 = 0.0;
    double p2 = 1.0;

    static DistSpec normal(double mean, double variance) {
        if (!std::isfinite(mean) || !(variance > 0.0) || !std::isfinite(variance)) {
            throw InvalidParameters("normal requires finite mean and variance > 0");
        }
        return DistSpec{DistFamily::Normal, mean, variance};
    }

    static DistSpec gamma(double shape, double rate) {
        if (!(shape > 0.0) || !(rate > 0.0) || !std::isfinite(shape) || !std::isfinite(rate)) {
            throw InvalidParameters("gamma requires shape > 0 and rate > 0");
        }
        return DistSpec{DistFamily::Gamma, shape, rate};
    }

    static DistSpec beta(double a, double b) {
        if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
            throw InvalidParameters("beta requires both shape parameters > 0");
        }
        return DistSpec{DistFamily::Beta, a, b};
    }

    static DistSpec uniform(double lo, double hi) {
        if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
            throw InvalidParameters("uniform requires lo < hi, both finite");
        }
        return DistSpec{DistFamily::Uniform, lo, hi};
    }

    bool operator==(const DistSpec&) const = default;
};

namespace detail {

// Box-Muller without caching the second variate, so every draw consumes
// exactly two uniforms and streams stay reproducible.
inline double draw_std_normal(CounterRng& rng) {
    const double u1 = rng.next_positive_double();
    const double u2 = rng.next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// Marsaglia-Tsang squeeze for shape >= 1; shapes below 1 are boosted and
// corrected with a power of a uniform.
inline double draw_gamma(CounterRng& rng, double shape, double rate) {
    if (shape < 1.0) {
        const double boosted = draw_gamma(rng, shape + 1.0, rate);
        return boosted * std::pow(rng.next_positive_double(), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x = 0.0;
        double v = 0.0;
        do {
            x = draw_std_normal(rng);
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng.next_positive_double();
        if (u < 1.0 - 0.0331 * x * x * x * x) {
            return d * v / rate;
        }
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
            return d * v / rate;
        }
    }
}

} // namespace detail

inline double draw(const DistSpec& spec, CounterRng& rng) {
    switch (spec.family) {
    case DistFamily::Normal:
        return spec.p1 + std::sqrt(spec.p2) * detail::draw_std_normal(rng);
    case DistFamily::Gamma:
        return detail::draw_gamma(rng, spec.p1, spec.p2);
    case DistFamily::Beta: {
        const double x = detail::draw_gamma(rng, spec.p1, 1.0);
        const double y = detail::draw_gamma(rng, spec.p2, 1.0);
        return x / (x + y);
    }
    case DistFamily::Uniform:
        return spec.p1 + (spec.p2 - spec.p1) * rng.next_double();
    }
    throw InvalidParameters("unknown distribution family");
}

inline Eigen::VectorXd sample_dist(const DistSpec& spec, CounterRng& rng, Eigen::Index count) {
    if (count < 1) {
        throw InvalidParameters("draw count must be >= 1");
    }
    Eigen::VectorXd values(count);
    for (Eigen::Index i = 0; i < count; ++i) {
        values[i] = draw(spec, rng);
    }
    return values;
}

} // namespace ksample
