#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gdlab/bounds.hpp"
#include "gdlab/presets.hpp"
#include "gdlab/stability.hpp"

using namespace gdlab;

namespace {

Example pt(double v) {
    Example z;
    z.x = {v};
    return z;
}

DataDistribution unit_quad() {
    DataDistribution d;
    d.family = LossFamily::quadratic_point;
    d.d = 1;
    return d;
}

}  // namespace

TEST_CASE("replace_one") {
    const Dataset S = {pt(0.0), pt(2.0)};
    const Dataset R = replace_one(S, 1, pt(5.0));
    CHECK(R[0].x[0] == doctest::Approx(5.0));
    CHECK(R[1].x[0] == doctest::Approx(2.0));
    CHECK(R.size() == 2);

    const Dataset noop = replace_one(S, 2, S[1]);
    CHECK(noop[0].x[0] == S[0].x[0]);
    CHECK(noop[1].x[0] == S[1].x[0]);

    CHECK_THROWS_AS(replace_one(S, 0, pt(1.0)), UsageError);
    CHECK_THROWS_AS(replace_one(S, 3, pt(1.0)), UsageError);
}

TEST_CASE("quadratic stability oracle, reduced-size run") {
    // converged GD outputs are sample means, so the replace-one squared
    // distance is (z_i - z'_i)^2 / n^2 with expectation (1/6)/n^2
    const DataDistribution dist = unit_quad();
    const LossModel model = make_model(dist);
    ReplicatePlan plan;
    plan.n = 10;
    plan.reps = 150;
    plan.master_seed = 20240817;
    plan.population_m = 100;
    plan.jobs = 4;
    const StabilityReport rep = estimate_stability(
        model, dist, plan, StepSchedule::constant(0.5), 200, Vec{0.0});
    const double truth = (1.0 / 6.0) / 100.0;
    CHECK(std::fabs(rep.eps_stab.mean - truth) <= 4.0 * rep.eps_stab.se);
    CHECK(rep.failed_tasks == 0);
    CHECK(rep.total_tasks == 150 * 10);
    // the two gap estimators target the same expectation
    const double comb =
        std::hypot(rep.eps_gen_direct.se, rep.eps_gen_exch.se);
    CHECK(std::fabs(rep.eps_gen_direct.mean - rep.eps_gen_exch.mean) <=
          4.0 * comb);
}

TEST_CASE("degenerate distribution: all error measures vanish") {
    DataDistribution d = unit_quad();
    d.degenerate = true;
    d.atom = pt(0.4);
    const LossModel model = make_model(d);
    ReplicatePlan plan;
    plan.n = 5;
    plan.reps = 3;
    plan.master_seed = 7;
    plan.population_m = 10;
    const StabilityReport rep = estimate_stability(
        model, d, plan, StepSchedule::constant(0.5), 30, Vec{0.0});
    CHECK(rep.eps_stab.mean == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(rep.eps_gen_direct.mean == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(rep.eps_gen_exch.mean == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(rep.eps_c.mean == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("estimate_stability is bitwise deterministic") {
    const DataDistribution dist = unit_quad();
    const LossModel model = make_model(dist);
    ReplicatePlan plan;
    plan.n = 6;
    plan.reps = 8;
    plan.master_seed = 99;
    plan.population_m = 20;
    plan.jobs = 3;
    const StabilityReport a = estimate_stability(
        model, dist, plan, StepSchedule::constant(0.5), 25, Vec{0.0});
    plan.jobs = 1;
    const StabilityReport b = estimate_stability(
        model, dist, plan, StepSchedule::constant(0.5), 25, Vec{0.0});
    CHECK(a.eps_stab.mean == b.eps_stab.mean);
    CHECK(a.eps_gen_direct.mean == b.eps_gen_direct.mean);
    CHECK(a.eps_path.mean == b.eps_path.mean);
    CHECK(a.eps_c.mean == b.eps_c.mean);
}

TEST_CASE("rotated single-index plan matches the estimand") {
    const DataDistribution dist = unit_quad();
    const LossModel model = make_model(dist);
    ReplicatePlan full;
    full.n = 8;
    full.reps = 60;
    full.master_seed = 321;
    full.population_m = 50;
    full.jobs = 4;
    ReplicatePlan rot = full;
    rot.rotate_single_index = true;
    rot.reps = 480;
    const StepSchedule sched = StepSchedule::constant(0.5);
    const StabilityReport a =
        estimate_stability(model, dist, full, sched, 100, Vec{0.0});
    const StabilityReport b =
        estimate_stability(model, dist, rot, sched, 100, Vec{0.0});
    const double comb = std::hypot(a.eps_stab.se, b.eps_stab.se);
    CHECK(std::fabs(a.eps_stab.mean - b.eps_stab.mean) <= 4.0 * comb);
}

TEST_CASE("interpolation error: two-point quadratic oracle") {
    // R_S(W*_S) for n=2 is (z1-z2)^2/8; brute-force midpoint integration of
    // E[(z1-z2)^2]/8 over the unit square pins 1/48
    const std::size_t G = 400;
    double integral = 0.0;
    for (std::size_t a = 0; a < G; ++a)
        for (std::size_t b = 0; b < G; ++b) {
            const double z1 = (double(a) + 0.5) / double(G);
            const double z2 = (double(b) + 0.5) / double(G);
            integral += (z1 - z2) * (z1 - z2) / 8.0;
        }
    integral /= double(G) * double(G);
    CHECK(integral == doctest::Approx(1.0 / 48.0).epsilon(1e-5));

    const DataDistribution dist = unit_quad();
    const LossModel model = make_model(dist);
    const MeanStd est = estimate_interpolation_error(model, dist, 2, 4000, 5);
    CHECK(std::fabs(est.mean - 1.0 / 48.0) <= 4.0 * est.se);
}

TEST_CASE("interpolating least squares has zero empirical minimum") {
    DataDistribution dist = default_distribution(LossFamily::least_squares, 12);
    const LossModel model = make_model(dist);
    const MeanStd est = estimate_interpolation_error(model, dist, 8, 20, 11);
    CHECK(est.mean <= 1e-12);

    DataDistribution deg = unit_quad();
    deg.degenerate = true;
    deg.atom = pt(0.3);
    const MeanStd z =
        estimate_interpolation_error(make_model(deg), deg, 4, 5, 3);
    CHECK(z.mean == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("stationary point diagnostic") {
    const DataDistribution dist = unit_quad();
    const LossModel model = make_model(dist);
    ReplicatePlan plan;
    plan.n = 6;
    plan.reps = 10;
    plan.master_seed = 555;
    plan.population_m = 200;
    plan.jobs = 2;
    const StepSchedule sched = StepSchedule::constant(0.5);

    // distance to the long-run limit decreases monotonically across T
    double prev = 1e300;
    for (std::size_t T : {2, 8, 32}) {
        const StationaryDiagnostic sd = stationary_point_diagnostic(
            model, dist, plan, sched, T, Vec{0.0});
        CHECK(sd.dist_sq_to_limit.mean <= prev + 1e-15);
        prev = sd.dist_sq_to_limit.mean;
        CHECK(std::isfinite(sd.c_tilde.mean));
    }

    // bitwise reproducibility on the nonconvex family
    DataDistribution nc = default_distribution(LossFamily::sigmoid_squared, 2);
    const LossModel mnc = make_model(nc);
    ReplicatePlan p2;
    p2.n = 40;
    p2.reps = 4;
    p2.master_seed = 77;
    p2.population_m = 30;
    const StepSchedule inv = StepSchedule::inverse_t(0.5 / mnc.beta);
    const StationaryDiagnostic a =
        stationary_point_diagnostic(mnc, nc, p2, inv, 20, Vec(2, 0.0));
    const StationaryDiagnostic b =
        stationary_point_diagnostic(mnc, nc, p2, inv, 20, Vec(2, 0.0));
    CHECK(a.dist_sq_to_limit.mean == b.dist_sq_to_limit.mean);
    CHECK(a.risk_at_limit.mean == b.risk_at_limit.mean);
    CHECK(a.c_tilde.mean == b.c_tilde.mean);
}

TEST_CASE("recursion lemmas: per-step audit") {
    Rng samp(61);
    // convex: non-expansive shared map
    DataDistribution ls = default_distribution(LossFamily::least_squares, 3);
    const LossModel mls = make_model(ls);
    for (int rep = 0; rep < 10; ++rep) {
        const Dataset S = sample_dataset(ls, 12, samp);
        const Example zp = ls.sample(samp);
        const RecursionCheckResult r =
            recursion_check(mls, S, 3, zp, Vec(3, 0.0),
                            StepSchedule::half_inv_beta(), 15, false, 0.0);
        CHECK(r.ok);
        CHECK(r.steps_checked == 15);
    }
    // strongly convex: contraction by (1 - eta*gamma_loo)
    const DataDistribution q = unit_quad();
    const LossModel mq = make_model(q);
    for (int rep = 0; rep < 10; ++rep) {
        const Dataset S = sample_dataset(q, 10, samp);
        const Example zp = q.sample(samp);
        const double gloo = gamma_loo(*mq.gamma, mq.beta, S.size());
        const RecursionCheckResult r = recursion_check(
            mq, S, 2, zp, Vec{0.0}, StepSchedule::sc_optimal(), 12, true, gloo);
        CHECK(r.ok);
        CHECK(r.worst_violation <= 1e-10);
    }
}

TEST_CASE("plan validation") {
    const DataDistribution dist = unit_quad();
    const LossModel model = make_model(dist);
    ReplicatePlan empty;
    CHECK_THROWS_AS(estimate_stability(model, dist, empty,
                                       StepSchedule::constant(0.5), 1, Vec{0.0}),
                    UsageError);
    ReplicatePlan bad;
    bad.n = 4;
    bad.reps = 1;
    bad.indices = {9};
    CHECK_THROWS_AS(estimate_stability(model, dist, bad,
                                       StepSchedule::constant(0.5), 1, Vec{0.0}),
                    UsageError);
}
