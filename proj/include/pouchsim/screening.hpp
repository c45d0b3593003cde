#ifndef POUCHSIM_SCREENING_HPP
#define POUCHSIM_SCREENING_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "pouchsim/actuator.hpp"
#include "pouchsim/arm.hpp"
#include "pouchsim/material.hpp"
#include "pouchsim/units.hpp"

namespace pouchsim {

struct ScreeningTargets {
    double theta_target = deg_to_rad(45.0);
    double supply_pressure = psi_to_pa(7.5);
    double safety_factor = 2.0;
    double pressure_tolerance = 1.0;  // Pa
};

enum class ScreenReason { none, unreachable_angle, pressure_exceeds_supply, stress_exceeds_yield };

inline const char* to_string(ScreenReason r) {
    switch (r) {
    case ScreenReason::none: return "ok";
    case ScreenReason::unreachable_angle: return "unreachable_angle";
    case ScreenReason::pressure_exceeds_supply: return "pressure_exceeds_supply";
    case ScreenReason::stress_exceeds_yield: return "stress_exceeds_yield";
    }
    return "?";
}

struct ScreeningResult {
    ActuatorDesign design;
    double contact_distance = 0.0;
    double max_thickness = 0.0;   // fully inflated stack height
    double max_angle = 0.0;
    double required_pressure_at_target = std::numeric_limits<double>::quiet_NaN();
    double hoop_stress_at_target = std::numeric_limits<double>::quiet_NaN();
    double stress_margin = std::numeric_limits<double>::quiet_NaN();     // 1 - sigma / allowable
    double lift_torque_margin = std::numeric_limits<double>::quiet_NaN(); // at supply pressure
    bool feasible = false;
    ScreenReason reason = ScreenReason::unreachable_angle;
    int rank = 0;
};

inline double max_shoulder_angle(const ActuatorDesign& design, double d) {
    return wedge_angle(max_pouch_height(design.cell_length()), d).angle;
}

/// Arc half-angle at which the wedge opens to theta, or a negative value if the
/// fully inflated stack cannot reach it.
inline double half_angle_for_shoulder_angle(const ActuatorDesign& design, double theta, double d) {
    const double h = 2.0 * d * std::sin(theta / 2.0);
    if (h > max_pouch_height(design.cell_length())) return -1.0;
    return half_angle_from_height(design.cell_length(), h);
}

/// Smallest pressure (to within `tol`) whose lift torque at half-angle t holds `load`.
inline double required_pressure(const ActuatorDesign& design, double t, double d, double load, double tol = 1.0) {
    if (load <= 0.0) return 0.0;
    auto torque = [&](double p) { return lift_torque(design, t, p, d); };
    double lo = 0.0, hi = 1000.0;
    while (torque(hi) < load) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e12) return std::numeric_limits<double>::infinity();
    }
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (torque(mid) >= load) hi = mid; else lo = mid;
    }
    return hi;
}

/// Angle at which a pouch held at constant pressure first balances gravity.
inline double static_angle(const ActuatorDesign& design, double pressure, const ArmModel& arm) {
    const double d = arm.contact.distance(design);
    const double lc = design.cell_length();
    const double t_end = max_pouch_height(lc) < 2.0 * d ? kHalfPi : half_angle_from_height(lc, 2.0 * d * (1.0 - 1e-9));
    auto net = [&](double t) {
        const double theta = shoulder_angle_from_fill(design, t, d).angle;
        return lift_torque(design, t, pressure, d) - arm.gravity_torque(theta);
    };
    constexpr int kScan = 2000;
    double prev_t = 0.0;
    double prev = net(0.0);
    if (prev <= 0.0) return 0.0;
    for (int i = 1; i <= kScan; ++i) {
        const double t = t_end * i / kScan;
        const double cur = net(t);
        if (cur <= 0.0) {
            boost::uintmax_t iters = 200;
            auto r = boost::math::tools::toms748_solve(net, prev_t, t, prev, cur,
                                                       boost::math::tools::eps_tolerance<double>(50), iters);
            return shoulder_angle_from_fill(design, 0.5 * (r.first + r.second), d).angle;
        }
        prev_t = t;
        prev = cur;
    }
    return shoulder_angle_from_fill(design, t_end, d).angle;
}

inline ScreeningResult screen_design(const ActuatorDesign& design, const ScreeningTargets& targets,
                                     const ArmModel& arm, const FabricMaterial& mat) {
    ScreeningResult r;
    r.design = design;
    r.contact_distance = arm.contact.distance(design);
    r.max_thickness = max_pouch_height(design.cell_length());
    r.max_angle = max_shoulder_angle(design, r.contact_distance);
    const double t = half_angle_for_shoulder_angle(design, targets.theta_target, r.contact_distance);
    if (t <= 0.0) {
        r.reason = ScreenReason::unreachable_angle;
        return r;
    }
    const double load = arm.gravity_torque(targets.theta_target);
    const double allowable = mat.yield_strength / targets.safety_factor;
    r.required_pressure_at_target = required_pressure(design, t, r.contact_distance, load, targets.pressure_tolerance);
    r.hoop_stress_at_target = hoop_stress(design, t, r.required_pressure_at_target, mat);
    r.stress_margin = 1.0 - r.hoop_stress_at_target / allowable;
    r.lift_torque_margin = lift_torque(design, t, targets.supply_pressure, r.contact_distance) - load;
    if (r.required_pressure_at_target > targets.supply_pressure) {
        r.reason = ScreenReason::pressure_exceeds_supply;
    } else if (r.hoop_stress_at_target > allowable) {
        r.reason = ScreenReason::stress_exceeds_yield;
    } else {
        r.reason = ScreenReason::none;
        r.feasible = true;
    }
    return r;
}

/// Screens every design and returns them ordered by rank: feasible designs by
/// stress margin then torque margin, followed by the infeasible ones in input order.
inline std::vector<ScreeningResult> screen_designs(const std::vector<ActuatorDesign>& designs,
                                                   const ScreeningTargets& targets, const ArmModel& arm,
                                                   const FabricMaterial& mat = nylon_oxford()) {
    if (!(targets.safety_factor > 0.0 && targets.supply_pressure > 0.0 && targets.pressure_tolerance > 0.0)) {
        throw std::invalid_argument("screen_designs: targets must be positive");
    }
    if (!(targets.theta_target > 0.0 && targets.theta_target < kPi)) {
        throw std::invalid_argument("screen_designs: theta_target must be in (0, pi)");
    }
    std::vector<ScreeningResult> rows;
    rows.reserve(designs.size());
    for (const auto& d : designs) rows.push_back(screen_design(d, targets, arm, mat));
    std::vector<std::size_t> order(rows.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& x = rows[a];
        const auto& y = rows[b];
        if (x.feasible != y.feasible) return x.feasible;
        if (!x.feasible) return false;
        if (x.stress_margin != y.stress_margin) return x.stress_margin > y.stress_margin;
        return x.lift_torque_margin > y.lift_torque_margin;
    });
    std::vector<ScreeningResult> out;
    out.reserve(rows.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        out.push_back(rows[order[i]]);
        out.back().rank = static_cast<int>(i) + 1;
    }
    return out;
}

inline std::size_t count_feasible(const std::vector<ScreeningResult>& rows) {
    return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const auto& r) { return r.feasible; }));
}

} // namespace pouchsim

#endif // POUCHSIM_SCREENING_HPP
