#ifndef POUCHSIM_TRAJECTORY_HPP
#define POUCHSIM_TRAJECTORY_HPP

#include <cmath>
#include <vector>

namespace pouchsim {

struct TrajectorySample {
    double t;
    double theta;
    double omega;
    double x;
    double y;
};

/// Shoulder angle and end-effector position on a uniform grid; (x, y) is
/// measured from the hanging pose.
struct Trajectory {
    double sample_rate = 60.0;
    std::vector<TrajectorySample> samples;

    std::size_t size() const { return samples.size(); }
    bool empty() const { return samples.empty(); }
};

inline TrajectorySample make_sample(double t, double theta, double omega, double arm_length) {
    return {t, theta, omega, arm_length * std::sin(theta), arm_length * (1.0 - std::cos(theta))};
}

} // namespace pouchsim

#endif // POUCHSIM_TRAJECTORY_HPP
