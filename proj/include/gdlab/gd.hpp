#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "core.hpp"
#include "losses.hpp"
#include "rng.hpp"
#include "schedule.hpp"

namespace gdlab {

// Iterate history of one run.  iterates has T+1 entries; the bookkeeping
// vectors (etas, risks, tracked gradient norms) have one entry per step.
struct Trajectory {
    std::vector<Vec> iterates;          // W_1 .. W_{T+1}
    std::vector<double> etas;           // eta_1 .. eta_T
    std::vector<double> risks;          // R_S(W_1) .. R_S(W_{T+1})
    std::vector<double> tracked_grad_sq;  // ||grad f(W_t, z_i)||^2 per step
    std::size_t tracked_index = 1;      // 1-based
    double path_error = 0.0;            // sum_t eta_t * tracked_grad_sq[t]

    const Vec& output() const { return iterates.back(); }  // A(S) = W_{T+1}
    std::size_t steps() const { return etas.size(); }
};

// Full-batch GD: W_{t+1} = W_t - (eta_t/n) * sum_j grad f(W_t, z_j).
// The batch gradient is summed in index order so permutation-consistency and
// bitwise determinism hold.
inline Trajectory run_gd(const LossModel& model, const Dataset& S, const Vec& W1,
                         const StepSchedule& sched, std::size_t T,
                         std::size_t tracked_index) {
    const std::size_t n = S.size();
    if (n == 0) throw UsageError("run_gd: empty dataset");
    if (W1.size() != model.d) throw UsageError("run_gd: W1 dimension mismatch");
    if (tracked_index < 1 || tracked_index > n)
        throw UsageError("run_gd: tracked index out of range");

    Trajectory traj;
    traj.tracked_index = tracked_index;
    traj.iterates.reserve(T + 1);
    traj.iterates.push_back(W1);
    traj.etas.reserve(T);
    traj.risks.reserve(T);
    traj.tracked_grad_sq.reserve(T);

    const Example& zi = S[tracked_index - 1];
    Vec w = W1;
    Vec g(model.d);
    Vec gi(model.d);
    for (std::size_t t = 1; t <= T; ++t) {
        const double eta = schedule_eta(sched, t, model.beta, model.gamma);
        std::fill(g.begin(), g.end(), 0.0);
        double risk = 0.0;
        for (const Example& z : S) risk += detail::loss_grad_accum(model, w, z, g);
        risk /= double(n);

        std::fill(gi.begin(), gi.end(), 0.0);
        detail::loss_grad_accum(model, w, zi, gi);
        const double gi_sq = norm_sq(gi);

        axpy(-eta / double(n), g, w);
        if (!all_finite(w))
            throw DivergenceError("run_gd: non-finite iterate", t);

        traj.etas.push_back(eta);
        traj.risks.push_back(risk);
        traj.tracked_grad_sq.push_back(gi_sq);
        traj.path_error += eta * gi_sq;
        traj.iterates.push_back(w);
    }
    traj.risks.push_back(empirical_risk(model, w, S));
    return traj;
}

// Single-run path-error summand: sum_t eta_t * ||grad f(W_t, z_i)||^2.
inline double path_error(const Trajectory& traj) {
    double s = 0.0;
    for (std::size_t t = 0; t < traj.steps(); ++t)
        s += traj.etas[t] * traj.tracked_grad_sq[t];
    return s;
}

// Single-run optimization-error summand: R_S(A(S)) - R_S(W*_S).
inline double opt_error(const LossModel& model, const Trajectory& traj,
                        const Dataset& S) {
    const ErmResult erm = erm_minimizer(model, S);
    const double gap =
        empirical_risk(model, traj.output(), S) - empirical_risk(model, erm.w, S);
    if (gap < -1e-10) throw NumericError("opt_error: negative risk gap");
    return gap < 0.0 ? 0.0 : gap;
}

// SGD contrast baseline: one uniformly drawn sample per step.  Comparison
// plumbing only; no bound in the calculator refers to it.
inline Trajectory run_sgd_baseline(const LossModel& model, const Dataset& S,
                                   const Vec& W1, const StepSchedule& sched,
                                   std::size_t T, std::uint64_t seed,
                                   std::size_t tracked_index = 1) {
    const std::size_t n = S.size();
    if (n == 0) throw UsageError("run_sgd_baseline: empty dataset");
    if (W1.size() != model.d) throw UsageError("run_sgd_baseline: W1 dimension mismatch");
    if (tracked_index < 1 || tracked_index > n)
        throw UsageError("run_sgd_baseline: tracked index out of range");

    Rng rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);

    Trajectory traj;
    traj.tracked_index = tracked_index;
    traj.iterates.push_back(W1);
    const Example& zi = S[tracked_index - 1];
    Vec w = W1;
    Vec g(model.d);
    Vec gi(model.d);
    for (std::size_t t = 1; t <= T; ++t) {
        const double eta = schedule_eta(sched, t, model.beta, model.gamma);
        const Example& z = S[pick(rng)];
        std::fill(g.begin(), g.end(), 0.0);
        const double fval = detail::loss_grad_accum(model, w, z, g);

        std::fill(gi.begin(), gi.end(), 0.0);
        detail::loss_grad_accum(model, w, zi, gi);
        const double gi_sq = norm_sq(gi);

        axpy(-eta, g, w);
        if (!all_finite(w))
            throw DivergenceError("run_sgd_baseline: non-finite iterate", t);

        traj.etas.push_back(eta);
        traj.risks.push_back(fval);  // single-sample loss, not R_S
        traj.tracked_grad_sq.push_back(gi_sq);
        traj.path_error += eta * gi_sq;
        traj.iterates.push_back(w);
    }
    return traj;
}

}  // namespace gdlab
