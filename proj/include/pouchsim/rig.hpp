#ifndef POUCHSIM_RIG_HPP
#define POUCHSIM_RIG_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "pouchsim/actuator.hpp"
#include "pouchsim/arm.hpp"
#include "pouchsim/pneumatics.hpp"
#include "pouchsim/trajectory.hpp"
#include "pouchsim/units.hpp"

namespace pouchsim {

struct NoiseModel {
    double cv_flow = 0.05;
    double cv_contact = 0.02;
    double instability_gain = 0.15;

    static NoiseModel none() { return {0.0, 0.0, 0.0}; }

    void validate() const {
        if (!(cv_flow >= 0.0 && cv_contact >= 0.0 && instability_gain >= 0.0)) {
            throw std::invalid_argument("NoiseModel: all parameters must be >= 0");
        }
    }
};

struct TrialOptions {
    double capacity = 1.0;                    // usable fill fraction at this duty
    double force_pose = deg_to_rad(5.0);      // isometric load-cell pose
    double force_window = 1.0;                // s of pumping before the force reading
    double dt = 1e-3;
    double sample_rate = 60.0;
    double capacity_smoothing = 2e-3;         // soft-min width, fraction of full volume
    double initial_angle = 0.0;               // rad, released from rest
};

struct TrialFlags {
    bool cutoff_engaged = false;
    bool saturated = false;
    bool diverged = false;
};

/// Work balance of the abduction/adduction run, tallied at the integrator step.
struct EnergyAudit {
    double actuator_work = 0.0;  // J, integral of actuator torque times angular speed
    double damping_loss = 0.0;   // J
    double kinetic = 0.0;        // J, at the end of the run
    double potential = 0.0;      // J, gravity, relative to the hanging pose

    double residual() const { return actuator_work - damping_loss - kinetic - potential; }
};

struct TrialRecord {
    std::string design_id;
    int n_cells = 0;
    double width = 0.0;
    double duty = 0.0;
    PhaseSchedule schedule;
    std::uint64_t rng_seed = 0;
    int trial_index = 0;
    double flow_scale = 1.0;
    double contact_scale = 1.0;
    double torque_scale = 1.0;
    Trajectory trajectory;
    std::vector<double> pressure;   // Pa, on the trajectory grid
    std::vector<double> torque;     // N m, actuator torque on the trajectory grid
    std::vector<double> volume;     // m^3, pouch volume available at the current pose (before torque_scale)
    std::vector<double> force_time; // s, isometric test grid
    std::vector<double> force;      // N
    double static_force = 0.0;
    double max_angle = 0.0;
    double time_of_max_angle = 0.0;
    double cutoff_time = -1.0;      // s from start, negative if the cutoff never engaged
    double inflate_end = 0.0;
    double hold_end = 0.0;
    double deflate_end = 0.0;
    EnergyAudit energy;
    TrialFlags flags;
    std::string diagnostics;
};

class DivergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Pouch volume available at shoulder angle theta: the wedge-limited
/// geometric volume, soft-capped at the usable capacity.
class PouchWedge {
public:
    PouchWedge(const ActuatorDesign& design, double contact_distance, double capacity, double smoothing)
        : lc_(design.cell_length()),
          d_(contact_distance),
          scale_(design.n_cells * design.width * design.effective_width_factor),
          v_full_(full_volume(design)),
          cap_(std::clamp(capacity, 0.0, 1.0) * v_full_),
          eps_(smoothing * v_full_),
          h_max_(max_pouch_height(lc_)) {
        c0_ = eps_ > 0.0 ? 0.5 * (cap_ - std::hypot(cap_, eps_)) : 0.0;
    }

    struct Value {
        double volume;
        double slope;  // dV/dtheta
    };

    Value geometric(double theta) const {
        // below the hanging pose the pouch is squeezed against the torso
        if (theta <= 0.0) {
            const double slope0 = scale_ * (2.0 / 3.0) * lc_ * d_;
            return {slope0 * theta, slope0};
        }
        const double h = 2.0 * d_ * std::sin(0.5 * std::min(theta, kPi));
        if (h >= h_max_) return {v_full_, 0.0};
        guess_ = half_angle_from_height(lc_, h, guess_);
        const double t = guess_;
        const double v = scale_ * pouch_area(lc_, t);
        const double dv = scale_ * pouch_area_derivative(lc_, t) * d_ * std::cos(0.5 * theta) / pouch_height_derivative(lc_, t);
        return {v, dv};
    }

    Value available(double theta) const {
        const Value g = geometric(theta);
        if (eps_ <= 0.0) return g.volume < cap_ ? g : Value{cap_, 0.0};
        const double diff = g.volume - cap_;
        const double s = std::hypot(diff, eps_);
        return {0.5 * (g.volume + cap_ - s) - c0_, 0.5 * (1.0 - diff / s) * g.slope};
    }

    double full() const { return v_full_; }
    double contact_distance() const { return d_; }

private:
    double lc_, d_, scale_, v_full_, cap_, eps_, h_max_, c0_;
    mutable double guess_ = -1.0;
};

/// Load-cell force at the constrained pose theta0: actuator torque over arm length.
inline double measure_static_force(const ActuatorDesign& design, double pressure, const ArmModel& arm,
                                   double theta0 = deg_to_rad(5.0)) {
    if (pressure < 0.0) throw std::invalid_argument("measure_static_force: pressure must be non-negative");
    const PouchWedge w(design, arm.contact.distance(design), 1.0, 0.0);
    return pressure * w.geometric(theta0).slope / arm.arm_length;
}

namespace detail {

struct TrialDraws {
    double flow_scale;
    double contact_scale;
    double torque_scale;
};

inline TrialDraws draw_trial(const ActuatorDesign& design, const NoiseModel& noise, double capacity, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n01(0.0, 1.0);
    const double z_flow = n01(rng);
    const double z_contact = n01(rng);
    const double z_inst = n01(rng);
    // aspect of the stack at its terminal fill relative to the strip width
    const double t_term = half_angle_from_area_fraction(capacity);
    const double aspect = pouch_height(design.cell_length(), t_term) / design.width;
    TrialDraws d;
    d.flow_scale = std::max(0.05, 1.0 + noise.cv_flow * z_flow);
    d.contact_scale = std::max(0.05, 1.0 + noise.cv_contact * z_contact);
    d.torque_scale = std::max(0.05, 1.0 + noise.instability_gain * aspect * z_inst);
    return d;
}

} // namespace detail

/// One abduction/adduction trial plus its isometric force reading.
inline TrialRecord simulate_trial(const ActuatorDesign& design, const ArmModel& arm, const PumpConfig& pump,
                                  const PhaseSchedule& schedule, const NoiseModel& noise, std::uint64_t seed,
                                  const TrialOptions& opt = {}) {
    design.validate();
    arm.validate();
    pump.validate();
    schedule.validate();
    noise.validate();
    if (!(opt.dt > 0.0 && opt.dt <= 0.010 && opt.sample_rate > 0.0 && opt.force_window > 0.0 &&
          std::abs(opt.initial_angle) < kPi)) {
        throw std::invalid_argument("simulate_trial: invalid trial options");
    }

    TrialRecord rec;
    rec.design_id = design.id();
    rec.n_cells = design.n_cells;
    rec.width = design.width;
    rec.duty = pump.duty;
    rec.schedule = schedule;
    rec.rng_seed = seed;
    rec.inflate_end = schedule.inflate_time;
    rec.hold_end = schedule.inflate_time + schedule.hold_time;
    rec.deflate_end = schedule.total();

    const auto draws = detail::draw_trial(design, noise, opt.capacity, seed);
    rec.flow_scale = draws.flow_scale;
    rec.contact_scale = draws.contact_scale;
    rec.torque_scale = draws.torque_scale;

    PumpConfig pc = pump;
    pc.q_max *= draws.flow_scale;
    const double c = pump.capacitance();
    // the capacitance belongs to the pouch and line, so it must not move with the pump draw
    pc.pressurization_time = pump.pressurization_time / draws.flow_scale;
    ArmModel trial_arm = arm;
    trial_arm.contact.offset *= draws.contact_scale;
    trial_arm.contact.kappa *= draws.contact_scale;
    const double d = trial_arm.contact.distance(design);
    const PouchWedge wedge(design, d, opt.capacity, opt.capacity_smoothing);
    const double v_full = wedge.full();
    rec.flags.saturated = max_pouch_height(design.cell_length()) >= 2.0 * d;

    const double dt = opt.dt;
    const double sample_dt = 1.0 / opt.sample_rate;

    // Isometric force test at the constrained pose.
    {
        const double slope = wedge.geometric(opt.force_pose).slope;
        const double u0 = wedge.geometric(opt.force_pose).volume / v_full;
        PneumaticState s;
        s.valve = ValveMode::inflate;
        const auto n_steps = static_cast<long>(std::llround(opt.force_window / dt));
        long next_sample = 0;
        auto emit = [&](double t, double p) {
            rec.force_time.push_back(t);
            rec.force.push_back(p * slope * draws.torque_scale / arm.arm_length);
        };
        emit(0.0, 0.0);
        next_sample = 1;
        for (long i = 1; i <= n_steps; ++i) {
            const double p_prev = s.gauge_pressure;
            s = advance(s, pc, v_full, dt, u0).state;
            const double t1 = static_cast<double>(i) * dt;
            while (next_sample * sample_dt <= t1 + 1e-12 && next_sample * sample_dt <= opt.force_window + 1e-12) {
                const double ts = next_sample * sample_dt;
                const double a = (ts - (t1 - dt)) / dt;
                emit(ts, p_prev + a * (s.gauge_pressure - p_prev));
                ++next_sample;
            }
        }
        rec.static_force = s.gauge_pressure * slope * draws.torque_scale / arm.arm_length;
    }

    // Abduction / hold / adduction.
    const double inertia = arm.inertia;
    double theta = opt.initial_angle, omega = 0.0;
    PneumaticState ps;
    double air = 0.0;
    auto pressure_at = [&](double th) {
        const auto v = wedge.available(th);
        const double p = std::clamp(c * (air - v.volume), 0.0, pc.max_pressure);
        return std::pair<double, double>{p, v.slope};
    };
    auto actuator_torque = [&](double th) {
        const auto [p, slope] = pressure_at(th);
        return p * slope * draws.torque_scale;
    };
    auto accel = [&](double th, double om) {
        return (actuator_torque(th) - arm.gravity_torque(th) - arm.damping * om) / inertia;
    };
    auto power = [&](double th, double om) { return actuator_torque(th) * om; };

    const auto n_steps = static_cast<long>(std::llround(schedule.total() / dt));
    rec.trajectory.sample_rate = opt.sample_rate;
    auto record = [&](double ts, double th, double om, double p, double tau, double v) {
        rec.trajectory.samples.push_back(make_sample(ts, th, om, arm.arm_length));
        rec.pressure.push_back(p);
        rec.torque.push_back(tau);
        rec.volume.push_back(v);
    };
    record(0.0, theta, 0.0, 0.0, 0.0, wedge.available(theta).volume);
    long next_sample = 1;
    double prev_theta = theta, prev_omega = omega, prev_p = 0.0, prev_tau = 0.0, prev_v = rec.volume.front();
    for (long i = 0; i < n_steps; ++i) {
        const double t0 = static_cast<double>(i) * dt;
        ps.valve = schedule.mode_at(t0 + 0.5 * dt);
        air = air_volume(ps, v_full, c);

        const double k1t = omega, k1w = accel(theta, omega);
        const double k2t = omega + 0.5 * dt * k1w, k2w = accel(theta + 0.5 * dt * k1t, omega + 0.5 * dt * k1w);
        const double k3t = omega + 0.5 * dt * k2w, k3w = accel(theta + 0.5 * dt * k2t, omega + 0.5 * dt * k2w);
        const double k4t = omega + dt * k3w, k4w = accel(theta + dt * k3t, omega + dt * k3w);
        const double th2 = theta + 0.5 * dt * k1t, th3 = theta + 0.5 * dt * k2t, th4 = theta + dt * k3t;
        rec.energy.actuator_work +=
            dt / 6.0 * (power(theta, k1t) + 2.0 * power(th2, k2t) + 2.0 * power(th3, k3t) + power(th4, k4t));
        rec.energy.damping_loss +=
            arm.damping * dt / 6.0 * (k1t * k1t + 2.0 * k2t * k2t + 2.0 * k3t * k3t + k4t * k4t);
        theta += dt / 6.0 * (k1t + 2.0 * k2t + 2.0 * k3t + k4t);
        omega += dt / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);

        if (!std::isfinite(theta) || std::abs(theta) > kPi) {
            std::ostringstream msg;
            msg << "integrator diverged at t=" << t0 + dt << " s: theta=" << theta << " rad, omega=" << omega
                << " rad/s, design=" << rec.design_id << ", duty=" << pump.duty << ", seed=" << seed;
            throw DivergenceError(msg.str());
        }

        const auto vnow = wedge.available(theta);
        const StepResult sr = advance(ps, pc, v_full, dt, vnow.volume / v_full);
        if (sr.cutoff_time >= 0.0 && rec.cutoff_time < 0.0) rec.cutoff_time = t0 + sr.cutoff_time;
        ps = sr.state;
        rec.flags.cutoff_engaged = rec.flags.cutoff_engaged || ps.cutoff_engaged;
        air = air_volume(ps, v_full, c);
        const auto [p_now, slope_now] = pressure_at(theta);
        const double tau_now = p_now * slope_now * draws.torque_scale;
        const double v_now = vnow.volume;

        const double t1 = t0 + dt;
        while (next_sample * sample_dt <= t1 + 1e-12) {
            const double ts = next_sample * sample_dt;
            const double a = (ts - t0) / dt;
            record(ts, prev_theta + a * (theta - prev_theta), prev_omega + a * (omega - prev_omega),
                   prev_p + a * (p_now - prev_p), prev_tau + a * (tau_now - prev_tau), prev_v + a * (v_now - prev_v));
            ++next_sample;
        }
        prev_theta = theta;
        prev_omega = omega;
        prev_p = p_now;
        prev_tau = tau_now;
        prev_v = v_now;
    }

    rec.energy.kinetic = 0.5 * inertia * omega * omega;
    rec.energy.potential = arm.mass * kGravity * arm.com_distance * (std::cos(opt.initial_angle) - std::cos(theta));

    rec.max_angle = 0.0;
    for (const auto& s : rec.trajectory.samples) {
        if (s.theta > rec.max_angle) {
            rec.max_angle = s.theta;
            rec.time_of_max_angle = s.t;
        }
    }
    return rec;
}

// ---------------------------------------------------------------------------
// Calibration of the wedge contact and the per-duty terminal fills against
// measured maximum shoulder angles.

struct AngleTargets {
    std::vector<int> cell_counts;
    std::vector<double> duties;                   // percent
    std::vector<std::vector<double>> angles;      // rad, [design][duty]

    /// Mean maximum shoulder angles of the 50.8 mm 1- and 2-cell actuators at 50/75/100% duty.
    static AngleTargets reference() {
        AngleTargets t;
        t.cell_counts = {1, 2};
        t.duties = {50.0, 75.0, 100.0};
        t.angles = {{deg_to_rad(41.92), deg_to_rad(53.40), deg_to_rad(63.89)},
                    {deg_to_rad(34.43), deg_to_rad(39.87), deg_to_rad(41.89)}};
        return t;
    }

    void validate() const {
        if (cell_counts.empty() || duties.empty()) throw std::invalid_argument("AngleTargets: empty");
        if (cell_counts.size() * duties.size() < 2) throw std::invalid_argument("AngleTargets: need several targets");
        if (angles.size() != cell_counts.size()) throw std::invalid_argument("AngleTargets: row count mismatch");
        for (const auto& row : angles) {
            if (row.size() != duties.size()) throw std::invalid_argument("AngleTargets: column count mismatch");
            for (double a : row) {
                if (!(a > 0.0 && a < kPi)) throw std::invalid_argument("AngleTargets: angles must be in (0, pi)");
            }
        }
    }
};

struct RigFitOptions {
    double kappa = 0.7;
    double d_min = 0.04;
    double d_max = 0.15;
    double failure_threshold = deg_to_rad(8.0);
    double width = kWidths[0];
    double width_factor = pocket_equivalent_width_factor(0.009, 0.1524);
};

struct RigFit {
    ContactGeometry contact;
    std::vector<int> cell_counts;
    std::vector<double> duties;
    std::vector<double> distances;                 // per design
    std::vector<double> fills;                     // per duty, volume fraction
    std::vector<std::vector<double>> model_angles; // rad
    std::vector<std::vector<double>> residuals;    // rad, model - target
    double max_abs_residual = 0.0;
    bool calibration_failed = false;
    std::string report;

    int cells_within(double tol) const {
        int n = 0;
        for (const auto& row : residuals) {
            for (double r : row) n += std::abs(r) <= tol ? 1 : 0;
        }
        return n;
    }

    /// Terminal fill for an arbitrary duty, linear between calibrated duties.
    double fill_for_duty(double duty) const {
        if (fills.empty()) return 1.0;
        if (duty <= duties.front()) return fills.front();
        if (duty >= duties.back()) return fills.back();
        for (std::size_t k = 1; k < duties.size(); ++k) {
            if (duty <= duties[k]) {
                const double a = (duty - duties[k - 1]) / (duties[k] - duties[k - 1]);
                return fills[k - 1] + a * (fills[k] - fills[k - 1]);
            }
        }
        return fills.back();
    }
};

inline double wedge_angle_at_fill(int n_cells, double fill, double d, double inflatable_length = 0.1524) {
    const double lc = inflatable_length / n_cells;
    return wedge_angle(pouch_height(lc, half_angle_from_area_fraction(fill)), d).angle;
}

namespace detail {

inline double best_fill(const std::vector<double>& distances, const std::vector<int>& cells,
                        const std::vector<double>& targets, double* sse_out) {
    auto sse = [&](double phi) {
        double s = 0.0;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            const double e = wedge_angle_at_fill(cells[i], phi, distances[i]) - targets[i];
            s += e * e;
        }
        return s;
    };
    boost::uintmax_t iters = 300;
    const auto r = boost::math::tools::brent_find_minima(sse, 0.0, 1.0, 52, iters);
    if (sse_out) *sse_out = r.second;
    return r.first;
}

} // namespace detail

/// Least-squares contact offset and per-duty terminal fills for a set of
/// target angles; residuals above the failure threshold are reported.
inline RigFit fit_rig_parameters(const AngleTargets& targets, const RigFitOptions& opt = {}) {
    targets.validate();
    std::vector<double> half_lengths;
    for (int n : targets.cell_counts) {
        if (n < 1 || n > 4) throw std::invalid_argument("fit_rig_parameters: cell count out of range");
        half_lengths.push_back(opt.kappa * make_design(n, opt.width, opt.width_factor).cell_length() / 2.0);
    }
    const double a_lo = std::max(1e-6, opt.d_min - *std::min_element(half_lengths.begin(), half_lengths.end()));
    const double a_hi = opt.d_max - *std::max_element(half_lengths.begin(), half_lengths.end());
    if (!(a_hi > a_lo)) throw std::invalid_argument("fit_rig_parameters: empty contact-distance range");

    const std::size_t nd = targets.cell_counts.size();
    const std::size_t nk = targets.duties.size();
    auto distances_for = [&](double a) {
        std::vector<double> d(nd);
        for (std::size_t i = 0; i < nd; ++i) d[i] = a + half_lengths[i];
        return d;
    };
    auto column = [&](std::size_t k) {
        std::vector<double> c(nd);
        for (std::size_t i = 0; i < nd; ++i) c[i] = targets.angles[i][k];
        return c;
    };
    auto total_sse = [&](double a) {
        const auto d = distances_for(a);
        double s = 0.0;
        for (std::size_t k = 0; k < nk; ++k) {
            double part = 0.0;
            detail::best_fill(d, targets.cell_counts, column(k), &part);
            s += part;
        }
        return s;
    };

    constexpr int kGrid = 120;
    int best_i = 0;
    double best_v = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= kGrid; ++i) {
        const double v = total_sse(a_lo + (a_hi - a_lo) * i / kGrid);
        if (v < best_v) {
            best_v = v;
            best_i = i;
        }
    }
    const double lo = a_lo + (a_hi - a_lo) * std::max(best_i - 1, 0) / kGrid;
    const double hi = a_lo + (a_hi - a_lo) * std::min(best_i + 1, kGrid) / kGrid;
    boost::uintmax_t iters = 300;
    const auto r = boost::math::tools::brent_find_minima(total_sse, lo, hi, 52, iters);

    RigFit fit;
    fit.contact = ContactGeometry{r.first, opt.kappa};
    fit.cell_counts = targets.cell_counts;
    fit.duties = targets.duties;
    fit.distances = distances_for(r.first);
    fit.model_angles.assign(nd, std::vector<double>(nk));
    fit.residuals.assign(nd, std::vector<double>(nk));
    for (std::size_t k = 0; k < nk; ++k) {
        fit.fills.push_back(detail::best_fill(fit.distances, targets.cell_counts, column(k), nullptr));
    }
    std::ostringstream rep;
    for (std::size_t i = 0; i < nd; ++i) {
        for (std::size_t k = 0; k < nk; ++k) {
            fit.model_angles[i][k] = wedge_angle_at_fill(targets.cell_counts[i], fit.fills[k], fit.distances[i]);
            fit.residuals[i][k] = fit.model_angles[i][k] - targets.angles[i][k];
            fit.max_abs_residual = std::max(fit.max_abs_residual, std::abs(fit.residuals[i][k]));
            if (std::abs(fit.residuals[i][k]) > opt.failure_threshold) {
                fit.calibration_failed = true;
                rep << "calibration failure: " << targets.cell_counts[i] << "-cell at " << targets.duties[k]
                    << "% duty misses by " << rad_to_deg(fit.residuals[i][k]) << " deg\n";
            }
        }
    }
    fit.report = rep.str();
    return fit;
}

} // namespace pouchsim

#endif // POUCHSIM_RIG_HPP
