#ifndef POUCHSIM_METRICS_HPP
#define POUCHSIM_METRICS_HPP

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "pouchsim/filter.hpp"
#include "pouchsim/kinematics.hpp"
#include "pouchsim/rig.hpp"
#include "pouchsim/sparc.hpp"
#include "pouchsim/units.hpp"

namespace pouchsim {

struct ImuSample {
    double t, gx, gy, gz, ax, ay, az;
};

struct MarkerSample {
    double t, x, y;
};

/// Synchronised IMU and marker streams of one trial.
struct MotionLog {
    double sample_rate = 60.0;
    std::vector<ImuSample> imu;
    std::vector<MarkerSample> marker;
};

struct AnalysisOptions {
    double filter_cutoff = 5.0;
    double arm_length = 0.165;
    SparcOptions sparc{};
};

struct PhaseMetrics {
    std::optional<double> smoothness;  // SPARC of the resultant angular speed
    SmoothnessTriple axes;
    double path_length = 0.0;
    double duration = 0.0;
};

struct MotionMetrics {
    double max_angle = 0.0;
    double time_of_max_angle = 0.0;
    double path_length = 0.0;
    PhaseMetrics abduction;
    PhaseMetrics adduction;
};

/// IMU on the distal forearm: gyro about the abduction axis (z), accelerometer
/// along the arm (x) and tangential (y), specific force including gravity.
inline MotionLog motion_log_from_trial(const TrialRecord& rec, double arm_length) {
    MotionLog log;
    log.sample_rate = rec.trajectory.sample_rate;
    const auto& s = rec.trajectory.samples;
    const std::size_t n = s.size();
    const double h = 1.0 / log.sample_rate;
    for (std::size_t i = 0; i < n; ++i) {
        double alpha = 0.0;
        if (n >= 2) {
            if (i == 0) alpha = (s[1].omega - s[0].omega) / h;
            else if (i + 1 == n) alpha = (s[n - 1].omega - s[n - 2].omega) / h;
            else alpha = (s[i + 1].omega - s[i - 1].omega) / (2.0 * h);
        }
        const double th = s[i].theta, om = s[i].omega;
        log.imu.push_back({s[i].t, 0.0, 0.0, om, -arm_length * om * om - kGravity * std::cos(th),
                           arm_length * alpha + kGravity * std::sin(th), 0.0});
        log.marker.push_back({s[i].t, s[i].x, s[i].y});
    }
    return log;
}

namespace detail {

inline PhaseMetrics phase_metrics(const std::vector<double>& gx, const std::vector<double>& gy,
                                  const std::vector<double>& gz, const std::vector<double>& x,
                                  const std::vector<double>& y, double fs, const SparcOptions& opt) {
    PhaseMetrics m;
    m.duration = static_cast<double>(x.size() - 1) / fs;
    m.path_length = x.size() >= 2 ? path_length(x, y) : 0.0;
    std::vector<double> speed(gx.size());
    for (std::size_t i = 0; i < gx.size(); ++i) speed[i] = std::sqrt(gx[i] * gx[i] + gy[i] * gy[i] + gz[i] * gz[i]);
    m.smoothness = sparc_if_moving(speed, fs, opt);
    m.axes = sparc_per_axis(gx, gy, gz, fs, opt);
    return m;
}

} // namespace detail

/// Filter the gyro, split the movement at its peak angle, and compute
/// smoothness, path length and maximum angle.
inline MotionMetrics analyze_motion(const MotionLog& log, const AnalysisOptions& opt = {}) {
    const std::size_t n = log.marker.size();
    if (n < 4 || log.imu.size() != n) throw std::invalid_argument("analyze_motion: need >= 4 aligned IMU and marker samples");
    const double fs = log.sample_rate;
    std::vector<double> gx(n), gy(n), gz(n), x(n), y(n), angle(n);
    for (std::size_t i = 0; i < n; ++i) {
        gx[i] = log.imu[i].gx;
        gy[i] = log.imu[i].gy;
        gz[i] = log.imu[i].gz;
        x[i] = log.marker[i].x;
        y[i] = log.marker[i].y;
        angle[i] = angle_from_marker(x[i], y[i], opt.arm_length);
    }
    gx = butterworth2_zero_lag(gx, fs, opt.filter_cutoff);
    gy = butterworth2_zero_lag(gy, fs, opt.filter_cutoff);
    gz = butterworth2_zero_lag(gz, fs, opt.filter_cutoff);

    MotionMetrics m;
    const PhaseSplit split = split_at_peak(angle);
    m.max_angle = angle[split.peak];
    m.time_of_max_angle = log.marker[split.peak].t;
    m.path_length = path_length(x, y);
    m.abduction = detail::phase_metrics(split.abduction(gx), split.abduction(gy), split.abduction(gz),
                                        split.abduction(x), split.abduction(y), fs, opt.sparc);
    m.adduction = detail::phase_metrics(split.adduction(gx), split.adduction(gy), split.adduction(gz),
                                        split.adduction(x), split.adduction(y), fs, opt.sparc);
    return m;
}

} // namespace pouchsim

#endif // POUCHSIM_METRICS_HPP
