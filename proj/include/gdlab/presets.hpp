#pragma once

#include <cmath>
#include <cstddef>

#include "harness.hpp"
#include "losses.hpp"
#include "schedule.hpp"

namespace gdlab {

// Default data distribution per family.  The convex regression family spreads
// its feature scales geometrically so the covariance spectrum spans two
// decades; gradient descent then leaves a wide band of slow directions and the
// optimization error decays polynomially rather than geometrically over the
// desk-scale iteration range.
inline DataDistribution default_distribution(LossFamily family, std::size_t d) {
    DataDistribution dist;
    dist.family = family;
    dist.d = d;
    switch (family) {
        case LossFamily::quadratic_point:
            dist.point_lo = 0.0;
            dist.point_hi = 1.0;
            break;
        case LossFamily::least_squares:
        case LossFamily::ridge:
            dist.feature_scale.resize(d);
            dist.teacher.resize(d);
            for (std::size_t k = 0; k < d; ++k) {
                dist.feature_scale[k] = std::pow(2.0, -0.5 * double(k));
                dist.teacher[k] = 1.0;
            }
            dist.noise = 0.5;
            break;
        case LossFamily::logistic:
            dist.feature_scale.assign(d, 1.0);
            dist.teacher.resize(d);
            for (std::size_t k = 0; k < d; ++k)
                dist.teacher[k] = (k % 2 == 0 ? 1.0 : -1.0) * (1.0 + 0.5 * double(k));
            dist.noise = 0.6;  // keeps the classes non-separable
            break;
        case LossFamily::sigmoid_squared:
            dist.feature_scale.assign(d, 0.75);
            dist.teacher.resize(d);
            for (std::size_t k = 0; k < d; ++k)
                dist.teacher[k] = (k % 2 == 0 ? 2.0 : -1.0) / double(k + 1);
            // flip rate high enough that datasets carry conflicting labels;
            // the empirical minimizer is then interior and the high-precision
            // reference runs converge
            dist.noise = 0.25;
            break;
    }
    return dist;
}

inline LossFamily default_family(Regime regime) {
    switch (regime) {
        case Regime::nonconvex: return LossFamily::sigmoid_squared;
        case Regime::convex: return LossFamily::least_squares;
        case Regime::convex_interpolation: return LossFamily::least_squares;
        case Regime::strongly_convex: return LossFamily::quadratic_point;
        case Regime::pl: return LossFamily::quadratic_point;
    }
    return LossFamily::quadratic_point;
}

inline std::size_t default_dimension(Regime regime) {
    switch (regime) {
        case Regime::nonconvex: return 4;
        case Regime::convex: return 8;
        case Regime::convex_interpolation: return 8;  // overridden per cell
        case Regime::strongly_convex: return 1;
        case Regime::pl: return 1;
    }
    return 1;
}

inline TRule default_t_rule(Regime regime) {
    switch (regime) {
        case Regime::nonconvex: return TRule::n_over_log_n;
        case Regime::convex: return TRule::sqrt_n;
        case Regime::convex_interpolation: return TRule::linear_n;
        case Regime::strongly_convex: return TRule::log_n;
        case Regime::pl: return TRule::sqrt_n;
    }
    return TRule::sqrt_n;
}

inline StepSchedule default_schedule(Regime regime, const LossModel& model) {
    switch (regime) {
        case Regime::nonconvex:
            return StepSchedule::inverse_t(0.5 / model.beta);  // beta*C = 1/2
        case Regime::strongly_convex:
            return StepSchedule::sc_optimal();
        default:
            return StepSchedule::half_inv_beta();
    }
}

// Fully resolved experiment for a regime with its documented defaults.
inline ExperimentConfig preset_experiment(Regime regime) {
    ExperimentConfig cfg;
    cfg.regime = regime;
    const LossFamily fam = default_family(regime);
    cfg.dist = default_distribution(fam, default_dimension(regime));
    cfg.model = make_model(cfg.dist, fam == LossFamily::ridge ? 0.1 : 0.0);
    cfg.t_rule = default_t_rule(regime);
    cfg.schedule = default_schedule(regime, cfg.model);
    cfg.d_tracks_n = regime == Regime::convex_interpolation;
    return cfg;
}

}  // namespace gdlab
