#ifndef POUCHSIM_ACTUATOR_HPP
#define POUCHSIM_ACTUATOR_HPP

#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "pouchsim/material.hpp"
#include "pouchsim/units.hpp"

namespace pouchsim {

inline constexpr std::array<double, 5> kWidths = {50.80e-3, 44.45e-3, 38.10e-3, 31.75e-3, 25.40e-3};
inline constexpr double kHalfPi = kPi / 2.0;

/// Width factor giving the 1-cell pouch the full volume of a pocket of height
/// pocket_height_ref over the inflatable length (pi^2 h / 4 L).
constexpr double pocket_equivalent_width_factor(double pocket_height, double inflatable_length) {
    return kPi * kPi * pocket_height / (4.0 * inflatable_length);
}

struct ActuatorDesign {
    int n_cells = 1;
    double width = kWidths[0];
    double total_length = 0.254;
    double inflatable_length = 0.1524;
    double anchor_length = 0.0508;
    double pocket_height_ref = 0.009;
    double effective_width_factor = pocket_equivalent_width_factor(0.009, 0.1524);

    double cell_length() const { return inflatable_length / n_cells; }

    // e.g. "1c-50.80"
    std::string id() const {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%dc-%.2f", n_cells, width * 1e3);
        return buf;
    }

    /// Two fabric layers over the full strip.
    double strip_mass(const FabricMaterial& mat) const {
        return 2.0 * total_length * width * mat.wall_thickness * mat.mass_density;
    }

    void validate() const {
        if (n_cells < 1 || n_cells > 4) throw std::invalid_argument("ActuatorDesign: n_cells must be 1..4");
        bool known_width = false;
        for (double w : kWidths) known_width = known_width || std::abs(w - width) < 1e-9;
        if (!known_width) throw std::invalid_argument("ActuatorDesign: width not in the design set");
        if (std::abs(total_length - (inflatable_length + 2.0 * anchor_length)) > 1e-12) {
            throw std::invalid_argument("ActuatorDesign: total_length != inflatable_length + 2*anchor_length");
        }
        if (!(effective_width_factor > 0.0 && effective_width_factor <= 1.0)) {
            throw std::invalid_argument("ActuatorDesign: effective_width_factor must be in (0, 1]");
        }
    }
};

inline bool same_design(const ActuatorDesign& a, const ActuatorDesign& b) {
    return a.n_cells == b.n_cells && std::abs(a.width - b.width) < 1e-9;
}

inline ActuatorDesign make_design(int n_cells, double width, double width_factor = pocket_equivalent_width_factor(0.009, 0.1524)) {
    ActuatorDesign d;
    d.n_cells = n_cells;
    d.width = width;
    d.effective_width_factor = width_factor;
    d.validate();
    return d;
}

/// Cell counts 1..4 crossed with the five widths, widest first.
inline std::vector<ActuatorDesign> design_space(double width_factor = pocket_equivalent_width_factor(0.009, 0.1524)) {
    std::vector<ActuatorDesign> out;
    out.reserve(20);
    for (int n = 1; n <= 4; ++n) {
        for (double w : kWidths) out.push_back(make_design(n, w, width_factor));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Pouch cross-section. Two circular arcs of length Lc meet at the seams; the
// arc half-angle t runs from 0 (flat) to pi/2 (circle of diameter 2 Lc / pi).

struct PouchSection {
    double arc_half_angle;
    double height;
    double chord;
    double cross_area;
    double radius;
};

namespace detail {

inline void check_half_angle(double t) {
    if (!(t >= 0.0 && t <= kHalfPi)) throw std::domain_error("pouch: arc half-angle outside [0, pi/2]");
}

// (x - sin x) / x^3 without cancellation
inline double x_minus_sin_over_cube(double x) {
    if (std::abs(x) < 0.1) {
        const double x2 = x * x;
        return 1.0 / 6.0 - x2 * (1.0 / 120.0 - x2 * (1.0 / 5040.0 - x2 * (1.0 / 362880.0 - x2 / 39916800.0)));
    }
    return (x - std::sin(x)) / (x * x * x);
}

// (sin t - t cos t) / t^3
inline double sin_minus_tcos_over_cube(double t) {
    if (std::abs(t) < 0.1) {
        const double t2 = t * t;
        return 1.0 / 3.0 - t2 * (1.0 / 30.0 - t2 * (1.0 / 840.0 - t2 / 45360.0));
    }
    return (std::sin(t) - t * std::cos(t)) / (t * t * t);
}

// (t sin t - (1 - cos t)) / t^2
inline double height_slope_factor(double t) {
    if (std::abs(t) < 0.05) {
        const double t2 = t * t;
        return 0.5 - t2 * (1.0 / 8.0 - t2 * (1.0 / 144.0 - t2 / 5760.0));
    }
    const double s = std::sin(0.5 * t);
    return (t * std::sin(t) - 2.0 * s * s) / (t * t);
}

} // namespace detail

inline double pouch_height(double lc, double t) {
    detail::check_half_angle(t);
    if (t == 0.0) return 0.0;
    const double s = std::sin(0.5 * t);
    return lc * 2.0 * s * s / t;
}

inline double pouch_chord(double lc, double t) {
    detail::check_half_angle(t);
    if (t == 0.0) return lc;
    return lc * std::sin(t) / t;
}

inline double pouch_area(double lc, double t) {
    detail::check_half_angle(t);
    // t - sin t cos t = (x - sin x)/2 with x = 2t
    return 2.0 * lc * lc * t * detail::x_minus_sin_over_cube(2.0 * t);
}

inline double pouch_radius(double lc, double t) {
    detail::check_half_angle(t);
    if (t == 0.0) return std::numeric_limits<double>::infinity();
    return lc / (2.0 * t);
}

inline double pouch_height_derivative(double lc, double t) {
    detail::check_half_angle(t);
    return lc * detail::height_slope_factor(t);
}

inline double pouch_area_derivative(double lc, double t) {
    detail::check_half_angle(t);
    return lc * lc * std::cos(t) * detail::sin_minus_tcos_over_cube(t);
}

inline PouchSection pouch_geometry(double lc, double t) {
    return PouchSection{t, pouch_height(lc, t), pouch_chord(lc, t), pouch_area(lc, t), pouch_radius(lc, t)};
}

inline double max_pouch_height(double lc) { return 2.0 * lc / kPi; }

/// Arc half-angle for a given pouch height, Newton with a bisection guard.
/// `guess` warm-starts the iteration when the caller tracks a slowly varying height.
inline double half_angle_from_height(double lc, double h, double guess = -1.0) {
    const double hmax = max_pouch_height(lc);
    if (h <= 0.0) return 0.0;
    if (h >= hmax) return kHalfPi;
    double lo = 0.0, hi = kHalfPi;
    double t = (guess > 0.0 && guess < kHalfPi) ? guess : std::min(2.0 * h / lc, kHalfPi * 0.999);
    for (int it = 0; it < 100; ++it) {
        const double f = pouch_height(lc, t) - h;
        if (f > 0.0) hi = t; else lo = t;
        const double step = f / pouch_height_derivative(lc, t);
        double next = t - step;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - t) <= 1e-15 * std::max(1.0, t)) return next;
        t = next;
        if (hi - lo <= 1e-16) break;
    }
    return t;
}

/// Arc half-angle at which the cross-section holds `fraction` of its full area.
inline double half_angle_from_area_fraction(double fraction) {
    if (fraction <= 0.0) return 0.0;
    if (fraction >= 1.0) return kHalfPi;
    const double full = 1.0 / kPi;   // A(pi/2) / Lc^2
    const double target = fraction * full;
    double lo = 0.0, hi = kHalfPi;
    double t = 3.0 * target;
    if (t >= kHalfPi) t = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double f = pouch_area(1.0, t) - target;
        if (f > 0.0) hi = t; else lo = t;
        const double dfdt = pouch_area_derivative(1.0, t);
        double next = dfdt > 0.0 ? t - f / dfdt : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - t) <= 1e-15 * std::max(1.0, t)) return next;
        t = next;
        if (hi - lo <= 1e-16) break;
    }
    return t;
}

inline double area_fraction(double t) { return pouch_area(1.0, t) * kPi; }

// ---------------------------------------------------------------------------
// Actuator-level quantities.

inline double cell_volume(const ActuatorDesign& d, double t) {
    return d.n_cells * pouch_area(d.cell_length(), t) * d.width * d.effective_width_factor;
}

inline double cell_volume_derivative(const ActuatorDesign& d, double t) {
    return d.n_cells * pouch_area_derivative(d.cell_length(), t) * d.width * d.effective_width_factor;
}

inline double full_volume(const ActuatorDesign& d) { return cell_volume(d, kHalfPi); }

/// Effective distance from the shoulder pivot to where the pouch stack bears on
/// the arm. The arm rests on the proximal cell, so the distance grows with cell
/// length: d = offset + kappa * Lc / 2.
struct ContactGeometry {
    double offset = 0.03025;
    double kappa = 0.7;

    double distance(const ActuatorDesign& d) const { return offset + kappa * d.cell_length() / 2.0; }
};

struct WedgeAngle {
    double angle;
    bool saturated;
};

/// Shoulder angle opened by a stack of height h under a wedge of contact distance d.
inline WedgeAngle wedge_angle(double h, double d) {
    if (!(d > 0.0)) throw std::invalid_argument("wedge_angle: contact distance must be positive");
    if (h >= 2.0 * d) return {kPi, true};
    return {2.0 * std::asin(h / (2.0 * d)), false};
}

inline WedgeAngle shoulder_angle_from_fill(const ActuatorDesign& design, double t, double d) {
    return wedge_angle(pouch_height(design.cell_length(), t), d);
}

/// d(theta)/d(t); throws when the wedge is saturated.
inline double shoulder_angle_derivative(const ActuatorDesign& design, double t, double d) {
    const double lc = design.cell_length();
    const double h = pouch_height(lc, t);
    const double disc = 4.0 * d * d - h * h;
    if (!(disc > 0.0)) throw std::domain_error("shoulder_angle_derivative: wedge saturated");
    return 2.0 * pouch_height_derivative(lc, t) / std::sqrt(disc);
}

/// Quasi-static joint torque by virtual work, tau = P dV/dtheta.
inline double lift_torque(const ActuatorDesign& design, double t, double pressure, double d) {
    if (pressure < 0.0) throw std::invalid_argument("lift_torque: pressure must be non-negative");
    const double dtheta = shoulder_angle_derivative(design, t, d);
    if (!(dtheta > 0.0)) throw std::domain_error("lift_torque: d(theta)/d(t) vanishes");
    return pressure * cell_volume_derivative(design, t) / dtheta;
}

inline double hoop_stress(const ActuatorDesign& design, double t, double pressure,
                          const FabricMaterial& mat = nylon_oxford()) {
    if (pressure < 0.0) throw std::invalid_argument("hoop_stress: pressure must be non-negative");
    if (pressure == 0.0) return 0.0;
    return pressure * pouch_radius(design.cell_length(), t) / mat.wall_thickness;
}

} // namespace pouchsim

#endif // POUCHSIM_ACTUATOR_HPP
