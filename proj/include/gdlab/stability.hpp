#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "core.hpp"
#include "gd.hpp"
#include "losses.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "schedule.hpp"

namespace gdlab {

inline Dataset replace_one(const Dataset& S, std::size_t i, const Example& zprime) {
    if (i < 1 || i > S.size()) throw UsageError("replace_one: index out of range");
    Dataset out = S;
    out[i - 1] = zprime;
    return out;
}

struct ReplicatePlan {
    std::size_t n = 0;
    std::size_t reps = 1;
    std::vector<std::size_t> indices;  // 1-based perturbed indices; empty = all
    std::uint64_t master_seed = 0;
    std::size_t population_m = 100;
    std::size_t jobs = 1;
    // When set, replicate r perturbs only index (r mod n) + 1.  Same estimand
    // by exchangeability at a fraction of the retraining cost; grid runs use it.
    bool rotate_single_index = false;

    std::vector<std::size_t> resolved_indices(std::size_t rep) const {
        if (rotate_single_index) return {rep % n + 1};
        if (!indices.empty()) return indices;
        std::vector<std::size_t> all(n);
        for (std::size_t i = 0; i < n; ++i) all[i] = i + 1;
        return all;
    }
};

struct MeanStd {
    double mean = 0.0;
    double se = 0.0;
};

struct StabilityReport {
    MeanStd eps_stab;
    MeanStd eps_gen_direct;
    MeanStd eps_gen_exch;
    MeanStd eps_opt;
    MeanStd eps_path;
    MeanStd eps_c;
    MeanStd w_gap;      // E||W_1 - W*_S||^2
    MeanStd pop_risk;   // E[R(A(S))], Monte Carlo
    MeanStd risk_init;  // E[R_S(W_1)]
    std::size_t total_tasks = 0;
    std::size_t failed_tasks = 0;
    // metadata
    std::string family;
    std::size_t n = 0;
    std::size_t T = 0;
};

namespace detail {

struct TaskSample {
    bool ok = false;
    double stab = 0.0;
    double gen_direct = 0.0;
    double gen_exch = 0.0;
    double opt = 0.0;
    double path = 0.0;
    double cap = 0.0;
    double wgap = 0.0;
    double pop = 0.0;
    double rinit = 0.0;
};

inline MeanStd finish(const MeanAccumulator& acc) {
    return {acc.mean(), acc.stderr_of_mean()};
}

}  // namespace detail

// Replace-one retraining protocol.  For every (replicate, index) pair the
// dataset, the replacement draw, and the population sample are pulled from
// their own derived streams, so results do not depend on execution order.
inline StabilityReport estimate_stability(const LossModel& model,
                                          const DataDistribution& dist,
                                          const ReplicatePlan& plan,
                                          const StepSchedule& sched, std::size_t T,
                                          const Vec& W1) {
    if (plan.n == 0 || plan.reps == 0)
        throw UsageError("estimate_stability: empty plan");

    struct TaskKey {
        std::size_t rep;
        std::size_t index;
    };
    std::vector<TaskKey> tasks;
    for (std::size_t rep = 0; rep < plan.reps; ++rep)
        for (std::size_t i : plan.resolved_indices(rep)) {
            if (i < 1 || i > plan.n)
                throw UsageError("estimate_stability: perturbed index out of range");
            tasks.push_back({rep, i});
        }

    std::vector<detail::TaskSample> samples(tasks.size());
    parallel_for(tasks.size(), plan.jobs, [&](std::size_t k) {
        const auto [rep, i] = tasks[k];
        Rng rng_data = make_rng(plan.master_seed, rep, i, StreamPurpose::dataset);
        const Dataset S = sample_dataset(dist, plan.n, rng_data);
        Rng rng_rep = make_rng(plan.master_seed, rep, i, StreamPurpose::replacement);
        const Example zprime = dist.sample(rng_rep);
        const Dataset Si = replace_one(S, i, zprime);

        detail::TaskSample out;
        try {
            const Trajectory traj = run_gd(model, S, W1, sched, T, i);
            const Trajectory traj_i = run_gd(model, Si, W1, sched, T, i);
            const Vec& A = traj.output();
            const Vec& Ai = traj_i.output();

            out.stab = dist_sq(A, Ai);
            const double risk_S = empirical_risk(model, A, S);
            Rng rng_pop =
                make_rng(plan.master_seed, rep, i, StreamPurpose::population);
            out.pop =
                population_risk(model, dist, A, plan.population_m, rng_pop).mean;
            out.gen_direct = out.pop - risk_S;
            out.gen_exch = eval_loss(model, Ai, S[i - 1]) -
                           eval_loss(model, A, S[i - 1]);
            // families without a closed-form minimizer use the plateau
            // descent, warm-started at A(S): it lands on the risk infimum
            // even when the minimizer sits at infinity (bounded losses on
            // near-separable datasets)
            const bool fallback_family = model.family == LossFamily::logistic ||
                                         model.family == LossFamily::sigmoid_squared;
            const ErmResult erm =
                fallback_family
                    ? detail::minimize_to_plateau(model, S, A, 1e-10, 200000)
                    : erm_minimizer(model, S);
            const double risk_star = empirical_risk(model, erm.w, S);
            out.opt = std::max(0.0, risk_S - risk_star);
            out.cap = risk_star;
            out.path = traj.path_error;
            out.wgap = dist_sq(W1, erm.w);
            out.rinit = traj.risks.front();
            out.ok = true;
        } catch (const DivergenceError&) {
            out.ok = false;
        } catch (const ConvergenceError&) {
            out.ok = false;
        }
        samples[k] = out;
    });

    MeanAccumulator stab, gen_d, gen_e, opt, path, cap, wgap, pop, rinit;
    std::size_t failed = 0;
    for (const auto& s : samples) {
        if (!s.ok) {
            ++failed;
            continue;
        }
        stab.add(s.stab);
        gen_d.add(s.gen_direct);
        gen_e.add(s.gen_exch);
        opt.add(s.opt);
        path.add(s.path);
        cap.add(s.cap);
        wgap.add(s.wgap);
        pop.add(s.pop);
        rinit.add(s.rinit);
    }
    if (failed * 10 > tasks.size())
        throw RegimeViolationError(
            "estimate_stability: more than 10% of replicates failed (" +
            std::to_string(failed) + "/" + std::to_string(tasks.size()) + ")");

    StabilityReport rep;
    rep.eps_stab = detail::finish(stab);
    rep.eps_gen_direct = detail::finish(gen_d);
    rep.eps_gen_exch = detail::finish(gen_e);
    rep.eps_opt = detail::finish(opt);
    rep.eps_path = detail::finish(path);
    rep.eps_c = detail::finish(cap);
    rep.w_gap = detail::finish(wgap);
    rep.pop_risk = detail::finish(pop);
    rep.risk_init = detail::finish(rinit);
    rep.total_tasks = tasks.size();
    rep.failed_tasks = failed;
    rep.family = family_name(model.family);
    rep.n = plan.n;
    rep.T = T;
    return rep;
}

// E[R_S(W*_S)] over fresh datasets.
inline MeanStd estimate_interpolation_error(const LossModel& model,
                                            const DataDistribution& dist,
                                            std::size_t n, std::size_t reps,
                                            std::uint64_t seed) {
    MeanAccumulator acc;
    for (std::size_t rep = 0; rep < reps; ++rep) {
        Rng rng = make_rng(seed, rep, 0, StreamPurpose::dataset);
        const Dataset S = sample_dataset(dist, n, rng);
        const ErmResult erm = erm_minimizer(model, S);
        acc.add(empirical_risk(model, erm.w, S));
    }
    return detail::finish(acc);
}

struct StationaryDiagnostic {
    MeanStd dist_sq_to_limit;   // E||A(S) - W*_{S,W1}||^2
    MeanStd risk_at_limit;      // E[R_S(W*_{S,W1})]
    MeanStd c_tilde;            // E[R_S(pi_S) + R(pi_S)], pi_S the GD limit
};

// The reference point W*_{S,W1} is the long-run limit of GD from W1 on S,
// found by the plateau descent at gradient norm target 1e-10.
inline StationaryDiagnostic stationary_point_diagnostic(
    const LossModel& model, const DataDistribution& dist, const ReplicatePlan& plan,
    const StepSchedule& sched, std::size_t T, const Vec& W1) {
    struct Row {
        double d2 = 0.0, risk = 0.0, ct = 0.0;
        bool ok = false;
    };
    std::vector<Row> rows(plan.reps);
    parallel_for(plan.reps, plan.jobs, [&](std::size_t rep) {
        Rng rng = make_rng(plan.master_seed, rep, 0, StreamPurpose::dataset);
        const Dataset S = sample_dataset(dist, plan.n, rng);
        const Trajectory traj = run_gd(model, S, W1, sched, T, 1);
        ErmResult limit;
        try {
            limit = detail::minimize_to_plateau(model, S, W1, 1e-10, 200000);
        } catch (const NumericError&) {
            rows[rep].ok = false;
            return;
        }
        rows[rep].d2 = dist_sq(traj.output(), limit.w);
        rows[rep].risk = empirical_risk(model, limit.w, S);
        Rng rng_pop = make_rng(plan.master_seed, rep, 0, StreamPurpose::population);
        rows[rep].ct =
            rows[rep].risk +
            population_risk(model, dist, limit.w, plan.population_m, rng_pop).mean;
        rows[rep].ok = true;
    });
    MeanAccumulator d2, risk, ct;
    std::size_t failed = 0;
    for (const auto& r : rows) {
        if (!r.ok) {
            ++failed;
            continue;
        }
        d2.add(r.d2);
        risk.add(r.risk);
        ct.add(r.ct);
    }
    if (failed > 0)
        throw ConvergenceError(
            "stationary_point_diagnostic: reference run failed on " +
                std::to_string(failed) + " replicates",
            0.0);
    return {detail::finish(d2), detail::finish(risk), detail::finish(ct)};
}

struct RecursionCheckResult {
    bool ok = true;
    double worst_violation = 0.0;
    std::size_t steps_checked = 0;
};

// Per-step audit of the paired-update lemmas.  For each step t the shared
// leave-one-out gradient map G(w) = w - eta_t * grad R_{S^-i}(w) (with the
// 1/n normalization) is applied to both iterates.  Convex case: the mapped
// distance must not exceed the prior distance.  Strongly convex case: the
// mapped squared distance must contract by (1 - eta_t * gamma_loo).
inline RecursionCheckResult recursion_check(const LossModel& model, const Dataset& S,
                                            std::size_t i, const Example& zprime,
                                            const Vec& W1, const StepSchedule& sched,
                                            std::size_t T, bool strongly_convex,
                                            double gloo) {
    const std::size_t n = S.size();
    const Dataset Si = replace_one(S, i, zprime);
    const Trajectory traj = run_gd(model, S, W1, sched, T, i);
    const Trajectory traj_i = run_gd(model, Si, W1, sched, T, i);

    RecursionCheckResult res;
    Vec g(model.d), gi(model.d);
    for (std::size_t t = 1; t <= T; ++t) {
        const Vec& w = traj.iterates[t - 1];
        const Vec& wi = traj_i.iterates[t - 1];
        const double eta = traj.etas[t - 1];

        std::fill(g.begin(), g.end(), 0.0);
        std::fill(gi.begin(), gi.end(), 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i - 1) continue;
            detail::loss_grad_accum(model, w, S[j], g);
            detail::loss_grad_accum(model, wi, S[j], gi);
        }
        double mapped_sq = 0.0;
        const double before_sq = dist_sq(w, wi);
        for (std::size_t k = 0; k < model.d; ++k) {
            const double diff =
                (w[k] - eta / double(n) * g[k]) - (wi[k] - eta / double(n) * gi[k]);
            mapped_sq += diff * diff;
        }
        const double limit =
            strongly_convex ? (1.0 - eta * gloo) * before_sq : before_sq;
        const double violation = mapped_sq - limit;
        if (violation > res.worst_violation) res.worst_violation = violation;
        if (violation > 1e-10) res.ok = false;
        ++res.steps_checked;
    }
    return res;
}

}  // namespace gdlab
