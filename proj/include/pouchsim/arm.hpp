#ifndef POUCHSIM_ARM_HPP
#define POUCHSIM_ARM_HPP

#include <cmath>
#include <stdexcept>

#include "pouchsim/actuator.hpp"
#include "pouchsim/units.hpp"

namespace pouchsim {

/// Infant upper arm on a shoulder constrained to abduction/adduction.
struct ArmModel {
    double arm_length = 0.165;
    double mass = 0.30;
    double com_distance = 0.45 * 0.165;
    double inertia = 1.15 * 0.30 * (0.45 * 0.165) * (0.45 * 0.165);
    double damping = 0.12;
    ContactGeometry contact{};

    double gravity_torque(double theta) const { return mass * kGravity * com_distance * std::sin(theta); }

    void validate() const {
        if (!(arm_length > 0.0 && mass > 0.0 && com_distance > 0.0 && inertia > 0.0 && damping >= 0.0)) {
            throw std::invalid_argument("ArmModel: parameters must be positive");
        }
        if (!(com_distance < arm_length)) throw std::invalid_argument("ArmModel: com_distance must be < arm_length");
        if (inertia < mass * com_distance * com_distance * (1.0 - 1e-12)) {
            throw std::invalid_argument("ArmModel: inertia below the point-mass bound");
        }
        if (!(contact.offset > 0.0 && contact.kappa >= 0.0)) {
            throw std::invalid_argument("ArmModel: contact geometry must be positive");
        }
    }
};

/// Arm with derived inertial terms for a given length and mass.
inline ArmModel make_arm(double length, double mass, double com_ratio = 0.45, double inertia_ratio = 1.15) {
    ArmModel a;
    a.arm_length = length;
    a.mass = mass;
    a.com_distance = com_ratio * length;
    a.inertia = inertia_ratio * mass * a.com_distance * a.com_distance;
    return a;
}

} // namespace pouchsim

#endif // POUCHSIM_ARM_HPP
