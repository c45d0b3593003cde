#ifndef POUCHSIM_KINEMATICS_HPP
#define POUCHSIM_KINEMATICS_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "pouchsim/trajectory.hpp"

namespace pouchsim {

struct CvRecord {
    double mean;
    double sd;
    double cv;
};

/// Sample mean, SD (n-1) and their ratio.
inline CvRecord cv(const std::vector<double>& samples) {
    const std::size_t n = samples.size();
    if (n < 2) throw std::invalid_argument("cv: need at least two samples");
    double mean = 0.0;
    for (double x : samples) mean += x;
    mean /= static_cast<double>(n);
    if (mean == 0.0) throw std::domain_error("cv: mean is zero, coefficient of variation undefined");
    double ss = 0.0;
    for (double x : samples) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    return {mean, sd, sd / std::abs(mean)};
}

inline double path_length(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw std::invalid_argument("path_length: coordinate length mismatch");
    if (x.size() < 2) throw std::invalid_argument("path_length: need at least two samples");
    double total = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) total += std::hypot(x[i] - x[i - 1], y[i] - y[i - 1]);
    return total;
}

inline double path_length(const Trajectory& traj) {
    std::vector<double> x, y;
    x.reserve(traj.size());
    y.reserve(traj.size());
    for (const auto& s : traj.samples) {
        x.push_back(s.x);
        y.push_back(s.y);
    }
    return path_length(x, y);
}

inline std::size_t argmax(const std::vector<double>& v) {
    if (v.empty()) throw std::invalid_argument("argmax: empty input");
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

/// Shoulder angle recovered from an end-effector position relative to the hanging pose.
inline double angle_from_marker(double x, double y, double arm_length) {
    return std::atan2(x, arm_length - y);
}

/// Half-open index ranges [0, split] and [split, n) of a movement split at its peak.
struct PhaseSplit {
    std::size_t peak;
    std::size_t size;

    template <typename T>
    std::vector<T> abduction(const std::vector<T>& v) const {
        return std::vector<T>(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(peak + 1));
    }
    template <typename T>
    std::vector<T> adduction(const std::vector<T>& v) const {
        return std::vector<T>(v.begin() + static_cast<std::ptrdiff_t>(peak), v.end());
    }
};

inline PhaseSplit split_at_peak(const std::vector<double>& angle) { return {argmax(angle), angle.size()}; }

} // namespace pouchsim

#endif // POUCHSIM_KINEMATICS_HPP
