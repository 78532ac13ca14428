#pragma once

#include <cstddef>
#include <optional>

#include "core.hpp"

namespace gdlab {

// eta_t rules used by the implemented bounds, plus an offset inverse rule
// that only the SGD comparison baseline uses.
enum class ScheduleKind {
    constant,          // eta_t = c
    inverse_t,         // eta_t = C / t
    half_inv_beta,     // eta_t = 1 / (2*beta)
    sc_optimal,        // eta_t = 2 / (beta + gamma)
    inverse_t_offset,  // eta_t = C / (t + t0), baseline plumbing
};

struct StepSchedule {
    ScheduleKind kind = ScheduleKind::half_inv_beta;
    double c = 0.0;   // constant value, or the C of the inverse rules
    double t0 = 0.0;  // offset of inverse_t_offset

    static StepSchedule constant(double c) {
        if (c <= 0.0) throw UsageError("constant schedule requires c > 0");
        return {ScheduleKind::constant, c, 0.0};
    }
    static StepSchedule inverse_t(double C) {
        if (C <= 0.0) throw UsageError("inverse-t schedule requires C > 0");
        return {ScheduleKind::inverse_t, C, 0.0};
    }
    static StepSchedule half_inv_beta() { return {ScheduleKind::half_inv_beta, 0.0, 0.0}; }
    static StepSchedule sc_optimal() { return {ScheduleKind::sc_optimal, 0.0, 0.0}; }
    static StepSchedule inverse_t_offset(double C, double t0) {
        if (C <= 0.0) throw UsageError("offset schedule requires C > 0");
        return {ScheduleKind::inverse_t_offset, C, t0};
    }
};

inline double schedule_eta(const StepSchedule& s, std::size_t t, double beta,
                           std::optional<double> gamma) {
    if (t < 1) throw UsageError("schedule_eta: t starts at 1");
    switch (s.kind) {
        case ScheduleKind::constant:
            return s.c;
        case ScheduleKind::inverse_t:
            return s.c / double(t);
        case ScheduleKind::half_inv_beta:
            if (beta <= 0.0) throw UsageError("half-inv-beta schedule requires beta > 0");
            return 1.0 / (2.0 * beta);
        case ScheduleKind::sc_optimal:
            if (!gamma) throw UsageError("sc-optimal schedule requires gamma");
            return 2.0 / (beta + *gamma);
        case ScheduleKind::inverse_t_offset:
            return s.c / (double(t) + s.t0);
    }
    throw UsageError("schedule_eta: unknown kind");
}

}  // namespace gdlab
