#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace gdlab {

using Vec = std::vector<double>;

// Caller misuse: bad dimensions, invalid arguments, violated preconditions.
struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A computation produced a non-finite value.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An iterative solver failed to reach its tolerance.
struct ConvergenceError : std::runtime_error {
    ConvergenceError(const std::string& what, double achieved)
        : std::runtime_error(what), achieved_grad_norm(achieved) {}
    double achieved_grad_norm;
};

// A gradient-descent iterate became non-finite.
struct DivergenceError : std::runtime_error {
    DivergenceError(const std::string& what, std::size_t step)
        : std::runtime_error(what), step(step) {}
    std::size_t step;
};

// A bound was requested under a violated hypothesis.
struct RegimeViolationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

inline bool all_finite(const Vec& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

inline double norm_sq(const Vec& a) { return dot(a, a); }

inline double norm(const Vec& a) { return std::sqrt(norm_sq(a)); }

// y += c * x
inline void axpy(double c, const Vec& x, Vec& y) {
    for (std::size_t k = 0; k < x.size(); ++k) y[k] += c * x[k];
}

inline Vec sub(const Vec& a, const Vec& b) {
    Vec r(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) r[k] = a[k] - b[k];
    return r;
}

inline double dist_sq(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        s += d * d;
    }
    return s;
}

// One training example: feature vector plus an optional scalar label.
struct Example {
    Vec x;
    double y = 0.0;
    bool has_label = false;
};

using Dataset = std::vector<Example>;

// Running mean / standard error accumulator with fixed insertion order.
struct MeanAccumulator {
    double sum = 0.0;
    double sum_sq = 0.0;
    std::size_t count = 0;

    void add(double v) {
        sum += v;
        sum_sq += v * v;
        ++count;
    }
    double mean() const { return count ? sum / double(count) : 0.0; }
    double stderr_of_mean() const {
        if (count < 2) return 0.0;
        const double m = mean();
        double var = (sum_sq - double(count) * m * m) / double(count - 1);
        if (var < 0.0) var = 0.0;
        return std::sqrt(var / double(count));
    }
};

}  // namespace gdlab
