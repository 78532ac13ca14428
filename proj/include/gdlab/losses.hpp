#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <random>
#include <string>

#include "core.hpp"
#include "linalg.hpp"
#include "rng.hpp"

namespace gdlab {

enum class LossFamily {
    quadratic_point,   // f(w,z) = 0.5*||w - z||^2
    least_squares,     // f(w,z) = 0.5*(w.x - y)^2
    ridge,             // least squares + 0.5*lambda*||w||^2
    logistic,          // f(w,z) = log(1 + exp(-y * w.x)), y in {-1,+1}
    sigmoid_squared,   // f(w,z) = (sigmoid(w.x) - y)^2, y in [0,1]; nonconvex
};

inline std::string family_name(LossFamily f) {
    switch (f) {
        case LossFamily::quadratic_point: return "quadratic-point";
        case LossFamily::least_squares: return "least-squares";
        case LossFamily::ridge: return "ridge";
        case LossFamily::logistic: return "logistic";
        case LossFamily::sigmoid_squared: return "nonconvex-sigmoid-squared";
    }
    return "?";
}

inline double sigmoid(double u) {
    if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
    const double e = std::exp(u);
    return e / (1.0 + e);
}

// Sampler with bounded (uniform box) support.  The smoothness constant of the
// paired LossModel is derived from these declared bounds, never estimated.
struct DataDistribution {
    LossFamily family = LossFamily::quadratic_point;
    std::size_t d = 1;

    // quadratic-point support: z uniform on [point_lo, point_hi]^d
    double point_lo = 0.0;
    double point_hi = 1.0;

    // regression / classification support: x_k uniform on [-scale_k, scale_k],
    // labels from a fixed teacher vector plus bounded noise
    Vec feature_scale;
    Vec teacher;
    double noise = 0.0;  // half-width of label noise, or flip probability

    // degenerate point mass, used by edge-case tests
    bool degenerate = false;
    Example atom;

    double feature_norm_bound_sq() const {
        double s = 0.0;
        for (double v : feature_scale) s += v * v;
        return s;
    }

    bool is_point_family() const { return family == LossFamily::quadratic_point; }

    // analytic moments, quadratic-point only
    double point_mean() const { return 0.5 * (point_lo + point_hi); }
    double point_variance_per_coord() const {
        const double w = point_hi - point_lo;
        return w * w / 12.0;
    }
    double point_variance_total() const {
        return double(d) * point_variance_per_coord();
    }

    Example sample(Rng& rng) const {
        if (degenerate) return atom;
        Example z;
        if (is_point_family()) {
            std::uniform_real_distribution<double> u(point_lo, point_hi);
            z.x.resize(d);
            for (std::size_t k = 0; k < d; ++k) z.x[k] = u(rng);
            return z;
        }
        z.x.resize(d);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (std::size_t k = 0; k < d; ++k) z.x[k] = feature_scale[k] * u(rng);
        const double t = dot(teacher, z.x);
        z.has_label = true;
        switch (family) {
            case LossFamily::least_squares:
            case LossFamily::ridge:
                z.y = t + noise * u(rng);
                break;
            case LossFamily::logistic:
                z.y = (t + noise * u(rng)) >= 0.0 ? 1.0 : -1.0;
                break;
            case LossFamily::sigmoid_squared: {
                double y = sigmoid(t) >= 0.5 ? 1.0 : 0.0;
                std::uniform_real_distribution<double> p(0.0, 1.0);
                if (p(rng) < noise) y = 1.0 - y;
                z.y = y;
                break;
            }
            default:
                break;
        }
        return z;
    }
};

inline Dataset sample_dataset(const DataDistribution& dist, std::size_t n, Rng& rng) {
    Dataset S(n);
    for (std::size_t j = 0; j < n; ++j) S[j] = dist.sample(rng);
    return S;
}

struct LossModel {
    LossFamily family = LossFamily::quadratic_point;
    std::size_t d = 1;
    double lambda = 0.0;  // ridge weight
    double beta = 1.0;
    std::optional<double> gamma;
    std::optional<double> mu;
};

// Declared constants come from the distribution's support bounds:
//   quadratic-point    beta = gamma = mu = 1
//   least-squares      beta = B^2 where B bounds ||x||
//   ridge              beta = B^2 + lambda, gamma = lambda
//   logistic           beta = B^2 / 4
//   sigmoid-squared    beta = (1/8 + 1/(3*sqrt(3))) * B^2, the global bound on
//                      |2*s'(u)^2 + 2*(s(u)-y)*s''(u)| for y in [0,1]
inline LossModel make_model(const DataDistribution& dist, double lambda = 0.0) {
    LossModel m;
    m.family = dist.family;
    m.d = dist.d;
    m.lambda = lambda;
    const double bx2 = dist.feature_norm_bound_sq();
    switch (dist.family) {
        case LossFamily::quadratic_point:
            m.beta = 1.0;
            m.gamma = 1.0;
            m.mu = 1.0;
            break;
        case LossFamily::least_squares:
            m.beta = bx2;
            break;
        case LossFamily::ridge:
            if (lambda <= 0.0) throw UsageError("ridge requires lambda > 0");
            m.beta = bx2 + lambda;
            m.gamma = lambda;
            m.mu = lambda;
            break;
        case LossFamily::logistic:
            m.beta = 0.25 * bx2;
            break;
        case LossFamily::sigmoid_squared:
            m.beta = (0.125 + 1.0 / (3.0 * std::sqrt(3.0))) * bx2;
            break;
    }
    if (m.beta <= 0.0) throw UsageError("declared beta must be positive");
    return m;
}

namespace detail {

inline void check_dims(const LossModel& m, const Vec& w, const Example& z) {
    if (w.size() != m.d || z.x.size() != m.d)
        throw UsageError("loss evaluation: dimension mismatch");
}

// loss value without any validation; hot path for the GD engine
inline double loss_unchecked(const LossModel& m, const Vec& w, const Example& z) {
    switch (m.family) {
        case LossFamily::quadratic_point:
            return 0.5 * dist_sq(w, z.x);
        case LossFamily::least_squares: {
            const double r = dot(w, z.x) - z.y;
            return 0.5 * r * r;
        }
        case LossFamily::ridge: {
            const double r = dot(w, z.x) - z.y;
            return 0.5 * r * r + 0.5 * m.lambda * norm_sq(w);
        }
        case LossFamily::logistic: {
            const double u = -z.y * dot(w, z.x);
            // log(1+e^u), overflow-safe
            return u > 0.0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u));
        }
        case LossFamily::sigmoid_squared: {
            const double r = sigmoid(dot(w, z.x)) - z.y;
            return r * r;
        }
    }
    return 0.0;
}

// g += grad f(w,z); returns f(w,z).  Single fused pass for the GD engine.
inline double loss_grad_accum(const LossModel& m, const Vec& w, const Example& z,
                              Vec& g) {
    switch (m.family) {
        case LossFamily::quadratic_point: {
            double s = 0.0;
            for (std::size_t k = 0; k < w.size(); ++k) {
                const double diff = w[k] - z.x[k];
                g[k] += diff;
                s += diff * diff;
            }
            return 0.5 * s;
        }
        case LossFamily::least_squares: {
            const double r = dot(w, z.x) - z.y;
            axpy(r, z.x, g);
            return 0.5 * r * r;
        }
        case LossFamily::ridge: {
            const double r = dot(w, z.x) - z.y;
            double s = 0.0;
            for (std::size_t k = 0; k < w.size(); ++k) {
                g[k] += r * z.x[k] + m.lambda * w[k];
                s += w[k] * w[k];
            }
            return 0.5 * r * r + 0.5 * m.lambda * s;
        }
        case LossFamily::logistic: {
            const double u = -z.y * dot(w, z.x);
            const double p = sigmoid(u);  // d/du log(1+e^u)
            axpy(-z.y * p, z.x, g);
            return u > 0.0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u));
        }
        case LossFamily::sigmoid_squared: {
            const double u = dot(w, z.x);
            const double s = sigmoid(u);
            const double r = s - z.y;
            axpy(2.0 * r * s * (1.0 - s), z.x, g);
            return r * r;
        }
    }
    return 0.0;
}

}  // namespace detail

inline double eval_loss(const LossModel& m, const Vec& w, const Example& z) {
    detail::check_dims(m, w, z);
    const double v = detail::loss_unchecked(m, w, z);
    if (!std::isfinite(v)) throw NumericError("eval_loss: non-finite result");
    return v;
}

inline Vec eval_grad(const LossModel& m, const Vec& w, const Example& z) {
    detail::check_dims(m, w, z);
    Vec g(m.d, 0.0);
    detail::loss_grad_accum(m, w, z, g);
    if (!all_finite(g)) throw NumericError("eval_grad: non-finite result");
    return g;
}

inline double empirical_risk(const LossModel& m, const Vec& w, const Dataset& S) {
    if (S.empty()) throw UsageError("empirical_risk: empty dataset");
    double s = 0.0;
    for (const Example& z : S) s += eval_loss(m, w, z);
    return s / double(S.size());
}

// mean gradient with index-order summation (determinism contract)
inline Vec empirical_grad(const LossModel& m, const Vec& w, const Dataset& S) {
    if (S.empty()) throw UsageError("empirical_grad: empty dataset");
    Vec g(m.d, 0.0);
    for (const Example& z : S) detail::loss_grad_accum(m, w, z, g);
    const double inv = 1.0 / double(S.size());
    for (double& v : g) v *= inv;
    if (!all_finite(g)) throw NumericError("empirical_grad: non-finite result");
    return g;
}

struct ErmResult {
    Vec w;
    bool numeric = false;        // true when found by the GD fallback
    double grad_norm = 0.0;      // achieved ||grad R_S|| at the returned point
};

namespace detail {

// plain GD with eta = 1/beta until the gradient norm target is met
inline ErmResult minimize_by_gd(const LossModel& m, const Dataset& S, Vec w,
                                double tol, std::size_t cap) {
    const double eta = 1.0 / m.beta;
    double gnorm = 0.0;
    for (std::size_t it = 0; it <= cap; ++it) {
        Vec g = empirical_grad(m, w, S);
        gnorm = norm(g);
        if (gnorm <= tol) return {w, true, gnorm};
        axpy(-eta, g, w);
        if (!all_finite(w)) throw NumericError("erm fallback: iterate diverged");
    }
    throw ConvergenceError("erm fallback: gradient tolerance not reached", gnorm);
}

// Descent to the empirical risk infimum.  Bounded families (sigmoid-squared
// in particular) can lack a finite minimizer on a fraction of datasets: the
// infimum is approached as ||w|| grows and no gradient tolerance is ever met,
// while the risk plateaus at its infimum.  Adaptive step (grow on success,
// backtrack on failure, floor at 1/beta so descent is guaranteed) reaches the
// plateau quickly; the run stops at the gradient tolerance or when the risk
// stops improving, and never throws on slow convergence.
inline ErmResult minimize_to_plateau(const LossModel& m, const Dataset& S, Vec w,
                                     double tol, std::size_t cap) {
    const double eta_floor = 1.0 / m.beta;
    double eta = eta_floor;
    double risk = empirical_risk(m, w, S);
    double gnorm = 0.0;
    double window_drop = 0.0;
    std::size_t window = 0;
    Vec cand(m.d);
    for (std::size_t it = 0; it < cap; ++it) {
        const Vec g = empirical_grad(m, w, S);
        gnorm = norm(g);
        if (gnorm <= tol) return {w, true, gnorm};
        double cand_risk = 0.0;
        for (;;) {
            cand = w;
            axpy(-eta, g, cand);
            if (!all_finite(cand))
                throw NumericError("plateau descent: iterate diverged");
            cand_risk = empirical_risk(m, cand, S);
            if (cand_risk <= risk || eta <= eta_floor) break;
            eta = std::max(eta_floor, 0.5 * eta);
        }
        window_drop += risk - cand_risk;
        w = cand;
        risk = cand_risk;
        eta *= 2.0;
        if (++window == 64) {
            if (window_drop <= 1e-14 * (1.0 + risk)) break;
            window_drop = 0.0;
            window = 0;
        }
    }
    return {w, true, gnorm};
}

inline SymMat gram_dd(const Dataset& S)  // X^T X / n
{
    const std::size_t d = S.front().x.size();
    SymMat A(d);
    for (const Example& z : S) A.add_outer(1.0 / double(S.size()), z.x);
    return A;
}

}  // namespace detail

// Exact minimizers where the family admits one; high-precision GD otherwise.
// The fallback (and the interpolating d >= n least-squares branch) flags the
// result as numeric.
inline ErmResult erm_minimizer(const LossModel& m, const Dataset& S,
                               double tol = 1e-10, std::size_t cap = 2000000) {
    if (S.empty()) throw UsageError("erm_minimizer: empty dataset");
    const std::size_t n = S.size();
    switch (m.family) {
        case LossFamily::quadratic_point: {
            Vec w(m.d, 0.0);
            for (const Example& z : S) axpy(1.0 / double(n), z.x, w);
            return {w, false, norm(empirical_grad(m, w, S))};
        }
        case LossFamily::least_squares: {
            // overdetermined: normal equations; interpolating d >= n: solve in
            // the span of the data, giving a zero-residual point
            if (n >= m.d) {
                SymMat A = detail::gram_dd(S);
                Vec b(m.d, 0.0);
                for (const Example& z : S) axpy(z.y / double(n), z.x, b);
                Vec w;
                if (solve_linear(A, b, w)) {
                    const double g = norm(empirical_grad(m, w, S));
                    if (g <= 1e-8) return {w, false, g};
                }
            } else {
                SymMat K(n);  // X X^T
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = 0; j < n; ++j)
                        K.at(i, j) = dot(S[i].x, S[j].x);
                Vec y(n);
                for (std::size_t i = 0; i < n; ++i) y[i] = S[i].y;
                Vec alpha;
                if (solve_linear(K, y, alpha)) {
                    Vec w(m.d, 0.0);
                    for (std::size_t i = 0; i < n; ++i) axpy(alpha[i], S[i].x, w);
                    const double g = norm(empirical_grad(m, w, S));
                    if (g <= 1e-8) return {w, false, g};
                }
            }
            return detail::minimize_by_gd(m, S, Vec(m.d, 0.0), tol, cap);
        }
        case LossFamily::ridge: {
            SymMat A = detail::gram_dd(S);
            A.add_diag(m.lambda);
            Vec b(m.d, 0.0);
            for (const Example& z : S) axpy(z.y / double(n), z.x, b);
            Vec w;
            if (!solve_linear(A, b, w))
                throw NumericError("ridge normal equations singular");
            return {w, false, norm(empirical_grad(m, w, S))};
        }
        case LossFamily::logistic:
        case LossFamily::sigmoid_squared:
            return detail::minimize_by_gd(m, S, Vec(m.d, 0.0), tol, cap);
    }
    throw UsageError("erm_minimizer: unknown family");
}

inline bool self_bounding_check(const LossModel& m, const Vec& w, const Example& z) {
    const double f = eval_loss(m, w, z);
    const Vec g = eval_grad(m, w, z);
    return norm_sq(g) <= 4.0 * m.beta * f + 1e-9;
}

struct RiskEstimate {
    double mean = 0.0;
    double se = 0.0;
};

// Monte Carlo population risk over m fresh samples from the given stream.
inline RiskEstimate population_risk(const LossModel& model,
                                    const DataDistribution& dist, const Vec& w,
                                    std::size_t m, Rng& rng) {
    if (m < 2) throw UsageError("population_risk: m must be >= 2");
    MeanAccumulator acc;
    for (std::size_t j = 0; j < m; ++j)
        acc.add(detail::loss_unchecked(model, w, dist.sample(rng)));
    return {acc.mean(), acc.stderr_of_mean()};
}

// Analytic cross-check, quadratic-point only: R(w) = 0.5*(||w-mean||^2 + var).
inline double analytic_population_risk(const DataDistribution& dist, const Vec& w) {
    if (!dist.is_point_family())
        throw UsageError("analytic population risk only for quadratic-point");
    if (dist.degenerate) {
        return 0.5 * dist_sq(w, dist.atom.x);
    }
    double s = 0.0;
    for (double wk : w) {
        const double dmean = wk - dist.point_mean();
        s += dmean * dmean;
    }
    return 0.5 * (s + dist.point_variance_total());
}

// Hessian of the empirical objective, for curvature audits (small d only).
inline SymMat empirical_hessian(const LossModel& m, const Vec& w, const Dataset& S) {
    SymMat H(m.d);
    const double inv = 1.0 / double(S.size());
    switch (m.family) {
        case LossFamily::quadratic_point:
            H.add_diag(1.0);
            break;
        case LossFamily::least_squares:
            for (const Example& z : S) H.add_outer(inv, z.x);
            break;
        case LossFamily::ridge:
            for (const Example& z : S) H.add_outer(inv, z.x);
            H.add_diag(m.lambda);
            break;
        case LossFamily::logistic:
            for (const Example& z : S) {
                const double p = sigmoid(dot(w, z.x));
                H.add_outer(inv * p * (1.0 - p), z.x);
            }
            break;
        case LossFamily::sigmoid_squared:
            for (const Example& z : S) {
                const double s = sigmoid(dot(w, z.x));
                const double sp = s * (1.0 - s);
                const double spp = sp * (1.0 - 2.0 * s);
                const double c = 2.0 * sp * sp + 2.0 * (s - z.y) * spp;
                H.add_outer(inv * c, z.x);
            }
            break;
    }
    return H;
}

}  // namespace gdlab
