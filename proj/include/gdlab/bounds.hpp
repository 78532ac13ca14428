#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "core.hpp"

namespace gdlab {

// Inputs a bound evaluation may draw on.  Error quantities come either from
// measurement or from upstream closed-form bounds; the caller states which via
// BoundMode.
struct RegimeInputs {
    double beta = 1.0;
    std::optional<double> gamma;
    std::optional<double> mu;
    std::size_t n = 1;
    std::size_t T = 0;
    double C = 0.0;        // inverse-t constant
    double Cprime = 0.0;   // early-phase constant of the piecewise schedule
    double eta_const = 0.0;  // constant step value where a bound assumes one

    double eps_opt = 0.0;
    double eps_c = 0.0;
    double eps_path = 0.0;
    double eps_stab = 0.0;
    double w_gap = 0.0;         // E||W_1 - W*_S||^2
    double c_tilde = 0.0;       // E[R_S(pi_S) + R(pi_S)]
    double risk_at_init = 0.0;  // E[R_S(W_1)]
};

enum class BoundMode { measured, theoretical };

inline std::string bound_mode_name(BoundMode m) {
    return m == BoundMode::measured ? "measured" : "theoretical";
}

struct BoundReport {
    std::string regime;
    BoundMode mode = BoundMode::measured;
    std::vector<std::pair<std::string, double>> values;
    std::vector<std::string> notes;

    void emit(const std::string& name, double v) {
        if (!std::isfinite(v) || v < 0.0)
            throw NumericError("bound '" + name + "' is not finite non-negative");
        values.emplace_back(name, v);
    }
    bool has(const std::string& name) const {
        for (const auto& kv : values)
            if (kv.first == name) return true;
        return false;
    }
    double get(const std::string& name) const {
        for (const auto& kv : values)
            if (kv.first == name) return kv.second;
        throw UsageError("bound '" + name + "' not present in report");
    }
};

namespace detail {

inline void require_nonneg(double v, const char* what) {
    if (!(v >= 0.0)) throw UsageError(std::string(what) + " must be non-negative");
}

}  // namespace detail

// |eps_gen| <= 2*sqrt(2*beta*(eps_opt + eps_c)*eps_stab) + 2*beta*eps_stab.
// With eps_opt = eps_c = 0 this is the memorization form 2*beta*eps_stab.
inline double generic_gen_bound(double beta, double eps_opt, double eps_c,
                                double eps_stab) {
    detail::require_nonneg(beta, "beta");
    detail::require_nonneg(eps_opt, "eps_opt");
    detail::require_nonneg(eps_c, "eps_c");
    detail::require_nonneg(eps_stab, "eps_stab");
    return 2.0 * std::sqrt(2.0 * beta * (eps_opt + eps_c) * eps_stab) +
           2.0 * beta * eps_stab;
}

inline double excess_decomposition(double eps_gen, double eps_opt) {
    if (!std::isfinite(eps_gen) || !std::isfinite(eps_opt))
        throw UsageError("excess_decomposition: non-finite input");
    return eps_gen + eps_opt;
}

// Stationary-point variant of the generic bound:
// |eps_gen| <= 4*sqrt(beta*(beta*E||A(S)-W*_{S,W1}||^2 + E[R_S(W*_{S,W1})])*eps_stab)
//              + 2*beta*eps_stab.
inline double stationary_gen_bound(double beta, double dist_to_stationary_sq,
                                   double risk_at_stationary, double eps_stab) {
    detail::require_nonneg(beta, "beta");
    detail::require_nonneg(dist_to_stationary_sq, "distance");
    detail::require_nonneg(risk_at_stationary, "risk");
    detail::require_nonneg(eps_stab, "eps_stab");
    return 4.0 * std::sqrt(beta *
                           (beta * dist_to_stationary_sq + risk_at_stationary) *
                           eps_stab) +
           2.0 * beta * eps_stab;
}

enum class FactorRule {
    nonconvex,        // (1 + beta*eta_j)^2
    strongly_convex,  // (1 - eta_j*gamma_loo)
    half_gamma,       // (1 - eta_j*gamma/2), used by the piecewise schedule case
};

// Brute-force sum_t eta_t * prod_{j=t+1..T} factor(j).  Oracle for every
// closed form below.
inline double sum_product_exact(const std::vector<double>& etas, FactorRule rule,
                                double coeff) {
    const std::size_t T = etas.size();
    double total = 0.0;
    for (std::size_t t = 1; t <= T; ++t) {
        double prod = 1.0;
        for (std::size_t j = t + 1; j <= T; ++j) {
            const double eta = etas[j - 1];
            switch (rule) {
                case FactorRule::nonconvex: {
                    const double f = 1.0 + coeff * eta;
                    prod *= f * f;
                    break;
                }
                case FactorRule::strongly_convex:
                    prod *= 1.0 - eta * coeff;
                    break;
                case FactorRule::half_gamma:
                    prod *= 1.0 - 0.5 * eta * coeff;
                    break;
            }
        }
        total += etas[t - 1] * prod;
    }
    return total;
}

// (1 - (1-u)^T)/u evaluated stably; equals sum_{t=0..T-1} (1-u)^t.  The series
// branch covers u*T below 1e-6 where the direct quotient loses all digits.
inline double geometric_partial_sum(double u, std::size_t T) {
    if (T == 0) return 0.0;
    if (u * double(T) < 1e-6) {
        const double Td = double(T);
        // first terms of T*(1 - (T-1)u/2 + (T-1)(T-2)u^2/6 - ...)
        return Td * (1.0 - (Td - 1.0) * u / 2.0 +
                     (Td - 1.0) * (Td - 2.0) * u * u / 6.0);
    }
    // u near or above 1: the direct quotient is already well conditioned
    if (u > 0.5) return (1.0 - std::pow(1.0 - u, double(T))) / u;
    return -std::expm1(double(T) * std::log1p(-u)) / u;
}

// Appendix-style closed forms for the sum-product expressions.
// Case 1: constant step eta = C <= 2/(beta+gamma), exact value.
inline double sum_product_closed_case1(double C, double gamma, double beta,
                                       std::size_t T) {
    if (C <= 0.0) throw UsageError("case 1 requires C > 0");
    if (gamma < 0.0) throw UsageError("case 1 requires gamma >= 0");
    if (C > 2.0 / (beta + gamma))
        throw UsageError("case 1 requires C <= 2/(beta+gamma)");
    return C * geometric_partial_sum(C * gamma, T);
}

// Case 2: piecewise C'/t then C/t schedule with factor (1 - eta_j*gamma/2);
// upper bound C*log(e^2*ceil(beta/gamma)).
inline double sum_product_closed_case2(double C, double Cprime, double gamma,
                                       double beta, std::size_t T) {
    if (gamma <= 0.0) throw UsageError("case 2 requires gamma > 0");
    if (C < 2.0 / gamma) throw UsageError("case 2 requires C >= 2/gamma");
    const double kcap = std::ceil(beta / gamma);
    if (C / (kcap + 1.0) > 2.0 / (beta + gamma))
        throw UsageError("case 2 requires C/t <= 2/(beta+gamma) for t > ceil(beta/gamma)");
    if (Cprime >= 2.0 / (beta + gamma))
        throw UsageError("case 2 requires C' < 2/(beta+gamma)");
    (void)T;
    return C * std::log(std::exp(2.0) * kcap);
}

// Case 3: eta_t <= C/t < 2/beta with factor (1 + beta*eta_j)^2; upper bound
// C*e^{2Cbeta}*T^{2Cbeta}*min{1 + 1/(2Cbeta), log(eT)}.
inline double sum_product_closed_case3(double C, double beta, std::size_t T) {
    if (C <= 0.0 || beta <= 0.0) throw UsageError("case 3 requires C, beta > 0");
    if (C >= 2.0 / beta) throw UsageError("case 3 requires C < 2/beta");
    if (T == 0) return 0.0;
    const double e2cb = 2.0 * C * beta;
    const double Td = double(T);
    return C * std::exp(e2cb) * std::pow(Td, e2cb) *
           std::min(1.0 + 1.0 / e2cb, std::log(std::exp(1.0) * Td));
}

inline double gamma_loo(double gamma, double beta, std::size_t n) {
    if (gamma < 0.0 || beta <= 0.0 || n < 1)
        throw UsageError("gamma_loo: invalid inputs");
    const double v = gamma - beta / double(n);
    return v > 0.0 ? v : 0.0;
}

// --- nonconvex regime, schedule eta_t = C/t with eps := beta*C < 1 ---

inline std::vector<double> inverse_t_etas(double C, std::size_t T) {
    std::vector<double> etas(T);
    for (std::size_t t = 1; t <= T; ++t) etas[t - 1] = C / double(t);
    return etas;
}

inline BoundReport nonconvex_bounds(const RegimeInputs& in, BoundMode mode) {
    if (in.C <= 0.0) throw UsageError("nonconvex bounds require C > 0");
    const double eps = in.beta * in.C;
    if (eps >= 1.0)
        throw RegimeViolationError("nonconvex bounds require beta*C < 1");
    BoundReport rep;
    rep.regime = "nonconvex";
    rep.mode = mode;
    rep.notes.push_back("mode=" + bound_mode_name(mode));

    const double n = double(in.n);
    const double T = double(in.T);
    const double eT = std::exp(1.0) * T;
    const double sum_prod =
        sum_product_exact(inverse_t_etas(in.C, in.T), FactorRule::nonconvex, in.beta);

    // stability via the exact sum-product
    const double stab = 4.0 * in.eps_path / (n * n) * sum_prod;
    rep.emit("stability", stab);

    if (in.T == 0) {
        rep.emit("gen_cbar", 0.0);
        rep.emit("gen_simple", 0.0);
        rep.emit("gen_init_risk", 0.0);
        rep.emit("excess", in.eps_opt);
        return rep;
    }

    const double cbar = std::min(eps + 0.5, eps * std::log(eT));
    const double powT = std::pow(eT, eps);
    const double powT2 = std::pow(eT, 2.0 * eps);

    const double gen_cbar =
        4.0 * std::sqrt(2.0) / n *
            std::sqrt((in.eps_opt + in.eps_c) * in.eps_path) * powT * std::sqrt(cbar) +
        8.0 * in.eps_path / (n * n) * powT2 * cbar;
    rep.emit("gen_cbar", gen_cbar);

    const double gen_simple =
        4.0 * std::sqrt(3.0) / n * powT *
            std::sqrt((in.eps_opt + in.eps_c) * in.eps_path) +
        12.0 * powT2 * in.eps_path / (n * n);
    rep.emit("gen_simple", gen_simple);

    const double logeT = std::log(eT);
    const double gen_init =
        (8.0 * std::sqrt(3.0) / n * std::sqrt(logeT) * powT +
         48.0 / (n * n) * logeT * powT2) *
        in.risk_at_init;
    rep.emit("gen_init_risk", gen_init);

    rep.emit("excess", gen_simple + in.eps_opt);
    return rep;
}

// --- convex regime, eta_t <= 1/(2*beta) assumed by the explicit forms ---

inline BoundReport convex_bounds(const RegimeInputs& in, BoundMode mode) {
    if (in.eta_const <= 0.0)
        throw UsageError("convex bounds require the constant step value");
    if (in.eta_const > 1.0 / (2.0 * in.beta) + 1e-12)
        throw RegimeViolationError("convex bounds require eta <= 1/(2*beta)");
    BoundReport rep;
    rep.regime = "convex";
    rep.mode = mode;
    rep.notes.push_back("mode=" + bound_mode_name(mode));

    const double n = double(in.n);
    const double T = double(in.T);
    const double sum_eta = in.eta_const * T;

    // appendix closed forms for path and optimization error
    const double path_bound =
        4.0 * in.beta * in.w_gap + 8.0 * in.beta * in.eps_c * sum_eta;
    rep.emit("path_bound", path_bound);
    const double opt_denom = sum_eta * (1.0 - in.beta * in.eta_const / 2.0);
    const double opt_bound =
        in.T == 0 ? std::numeric_limits<double>::infinity() : in.w_gap / opt_denom;
    if (in.T > 0) rep.emit("opt_bound", opt_bound);

    const double eps_path =
        mode == BoundMode::measured ? in.eps_path : path_bound;
    const double eps_opt =
        mode == BoundMode::measured || in.T == 0 ? in.eps_opt : opt_bound;

    const double stab = 4.0 * eps_path / (n * n) * sum_eta;
    rep.emit("stability", stab);
    const double stab_wgap = 32.0 * in.beta * sum_eta / (n * n) *
                             (in.w_gap + in.eps_c * sum_eta);
    rep.emit("stability_wgap", stab_wgap);

    const double gen =
        4.0 / n * std::sqrt(2.0 * in.beta * (eps_opt + in.eps_c) * eps_path * sum_eta) +
        8.0 * in.beta * eps_path / (n * n) * sum_eta;
    rep.emit("gen", gen);

    const double bracket = 1.0 / n + 2.0 * T / (n * n);
    const double gen_explicit =
        8.0 * bracket * (3.0 * in.beta * in.w_gap + T * in.eps_c);
    rep.emit("gen_explicit", gen_explicit);

    if (in.T > 0) {
        const double excess = gen_explicit + 3.0 * in.beta * in.w_gap / T;
        rep.emit("excess", excess);
        rep.emit("excess_from_gen", gen + eps_opt);
    }
    return rep;
}

// --- strongly convex regime, eta_t = 2/(beta+gamma) assumed ---

inline BoundReport strongly_convex_bounds_with_gloo(const RegimeInputs& in,
                                                    BoundMode mode, double gloo);

inline BoundReport strongly_convex_bounds(const RegimeInputs& in, BoundMode mode) {
    if (!in.gamma) throw UsageError("strongly convex bounds require gamma");
    const double gloo = gamma_loo(*in.gamma, in.beta, in.n);
    return strongly_convex_bounds_with_gloo(in, mode, gloo);
}

inline BoundReport strongly_convex_bounds_with_gloo(const RegimeInputs& in,
                                                    BoundMode mode, double gloo) {
    if (!in.gamma) throw UsageError("strongly convex bounds require gamma");
    const double gamma = *in.gamma;
    const double eta = 2.0 / (in.beta + gamma);
    if (in.eta_const > 0.0 && in.eta_const > eta + 1e-12)
        throw RegimeViolationError("strongly convex bounds require eta <= 2/(beta+gamma)");
    BoundReport rep;
    rep.regime = "strongly-convex";
    rep.mode = mode;
    rep.notes.push_back("mode=" + bound_mode_name(mode));

    const double n = double(in.n);
    const double T = double(in.T);
    const double bg = in.beta + gamma;

    // Lambda(gloo, T) = (1 - (1 - eta*gloo)^T)/gloo = eta * partial geometric sum
    const double lambda_sum = eta * geometric_partial_sum(eta * gloo, in.T);

    // appendix closed forms for path and optimization error
    const double expo4 = std::exp(-4.0 * T * gamma / bg);
    const double Gamma_fn = gamma > 0.0
                                ? (1.0 - expo4) / (std::exp(4.0 * gamma / bg) - 1.0)
                                : T;
    rep.emit("path_bound", 4.0 * in.beta * in.beta / bg * Gamma_fn * in.w_gap +
                               8.0 * in.beta * T / bg * in.eps_c);
    const double opt_bound = 0.5 * in.beta * expo4 * in.w_gap;
    rep.emit("opt_bound", opt_bound);
    if (in.C > 0.0) {
        // decreasing step eta_t = C/t variant of the optimization lemma
        const double opt_inv =
            in.T == 0 ? 0.5 * in.beta * in.w_gap
                      : 0.5 * in.beta *
                            std::pow(T, -2.0 * in.C * in.beta * gamma / bg) * in.w_gap;
        rep.emit("opt_bound_inverse_t", opt_inv);
    }

    const double eps_path = mode == BoundMode::measured ? in.eps_path
                                                        : rep.get("path_bound");

    const double stab = 4.0 * eps_path / (n * n) * lambda_sum;
    rep.emit("stability", stab);
    const double stab_min =
        4.0 * eps_path / (n * n) *
        std::min(gloo > 0.0 ? 1.0 / gloo : std::numeric_limits<double>::infinity(),
                 2.0 * T / in.beta);
    rep.emit("stability_min_form", stab_min);

    // explicit bound quantities
    const double minratio =
        std::min(gloo > 0.0 ? in.beta / gloo : std::numeric_limits<double>::infinity(),
                 2.0 * T);
    const double m_fn = in.T == 0 ? 0.0 : in.beta * T * minratio / bg;
    const double M_init = std::max(in.beta * in.w_gap, in.eps_c);
    const double delta_T = in.T == 0 ? 0.0 : in.beta * T * M_init * minratio / bg;
    const double expo2 = std::exp(-2.0 * T * gamma / bg);
    rep.emit("m", m_fn);
    rep.emit("M", M_init);
    rep.emit("Delta_T", delta_T);

    const double gen =
        8.0 * std::sqrt(6.0) / n *
        (std::sqrt(M_init) +
         (expo2 + 4.0 * std::sqrt(3.0) / n * std::sqrt(m_fn)) * M_init) *
        std::sqrt(m_fn);
    rep.emit("gen", gen);

    const double lambda_c = 0.5 * in.beta * in.w_gap;
    const double excess_core =
        std::sqrt(delta_T) + (expo2 + 4.0 * std::sqrt(3.0) / n * delta_T);
    const double excess6 =
        8.0 * std::sqrt(6.0) / n * excess_core + lambda_c * expo4;
    rep.emit("excess", excess6);
    // the per-regime summary table prints the same expression with an 8*sqrt(3)
    // leading constant; both are reported and the mismatch is flagged
    const double excess3 =
        8.0 * std::sqrt(3.0) / n * excess_core + lambda_c * expo4;
    rep.emit("excess_alt_const", excess3);
    rep.notes.push_back(
        "leading constant of the excess bound differs between statements "
        "(8*sqrt(6) vs 8*sqrt(3)); both values reported, the larger is used");

    // stability-based generalization with the exact sum-product, for audits
    const double gen_sum_prod =
        4.0 / n * std::sqrt((in.eps_opt + in.eps_c) * eps_path) *
            std::sqrt(2.0 * in.beta * lambda_sum) +
        8.0 * in.beta * eps_path / (n * n) * lambda_sum;
    rep.emit("gen_sum_prod", gen_sum_prod);
    return rep;
}

// --- PL regime ---

inline BoundReport pl_bounds(const RegimeInputs& in, BoundMode mode) {
    if (!in.mu || *in.mu <= 0.0) throw UsageError("pl bounds require mu > 0");
    const double mu = *in.mu;
    BoundReport rep;
    rep.regime = "pl";
    rep.mode = mode;
    rep.notes.push_back("mode=" + bound_mode_name(mode));

    const double n = double(in.n);
    const double stab =
        16.0 * in.eps_opt / mu + 8.0 * in.beta / (n * n * mu * mu) * in.c_tilde;
    rep.emit("stability", stab);

    const double gen =
        8.0 * in.beta * std::sqrt(in.c_tilde) / (n * mu) * std::sqrt(in.eps_opt) +
        16.0 * in.beta * in.beta * in.c_tilde / (n * n * mu * mu) +
        44.0 * in.beta / mu * in.eps_opt;
    rep.emit("gen", gen);

    const double excess =
        8.0 * in.beta * std::sqrt(in.c_tilde) / (n * mu) *
            std::sqrt(in.eps_opt + in.eps_c) +
        8.0 * std::sqrt(2.0 * in.beta * in.eps_opt * in.eps_c) / std::sqrt(mu) +
        16.0 * in.c_tilde * in.beta * in.beta / (n * n * mu * mu) +
        45.0 * in.beta / mu * in.eps_opt;
    rep.emit("excess", excess);
    return rep;
}

}  // namespace gdlab
