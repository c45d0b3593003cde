#ifndef POUCHSIM_PNEUMATICS_HPP
#define POUCHSIM_PNEUMATICS_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "pouchsim/actuator.hpp"
#include "pouchsim/units.hpp"

namespace pouchsim {

enum class ValveMode { inflate, hold, vent };

inline const char* to_string(ValveMode m) {
    switch (m) {
    case ValveMode::inflate: return "inflate";
    case ValveMode::hold: return "hold";
    case ValveMode::vent: return "vent";
    }
    return "?";
}

inline constexpr double kPressureEnvelope = 7.5 * kPascalPerPsi;

struct PumpConfig {
    double q_max = lpm_to_m3s(2.0);
    double duty = 100.0;            // percent
    double duty_deadband = 20.0;    // percent
    double flow_efficiency = 0.948;
    double max_pressure = kPressureEnvelope;
    double cutoff_pressure = psi_to_pa(6.5);
    double pressurization_time = 1.0;  // s, 0 -> cutoff_pressure at full duty and unit efficiency

    /// Pa per m^3 of air pushed into a full pouch.
    double capacitance() const {
        return max_pressure * std::log(max_pressure / (max_pressure - cutoff_pressure)) / (q_max * pressurization_time);
    }

    void validate() const {
        if (!(duty >= 0.0 && duty <= 100.0)) throw std::invalid_argument("PumpConfig: duty must be in [0, 100]");
        if (!(flow_efficiency > 0.0 && flow_efficiency <= 1.0)) {
            throw std::invalid_argument("PumpConfig: flow_efficiency must be in (0, 1]");
        }
        if (!(q_max > 0.0 && pressurization_time > 0.0 && duty_deadband >= 0.0)) {
            throw std::invalid_argument("PumpConfig: q_max and pressurization_time must be positive");
        }
        if (!(cutoff_pressure > 0.0 && cutoff_pressure < max_pressure && max_pressure <= kPressureEnvelope * (1 + 1e-12))) {
            throw std::invalid_argument("PumpConfig: need 0 < cutoff_pressure < max_pressure <= 7.5 psi");
        }
    }
};

struct PneumaticState {
    ValveMode valve = ValveMode::hold;
    double fill_fraction = 0.0;   // air volume / full pouch volume
    double gauge_pressure = 0.0;  // Pa
    bool cutoff_engaged = false;
    double inflow_volume = 0.0;   // cumulative, m^3
    double outflow_volume = 0.0;  // cumulative, m^3 (venting and relief)

    bool operator==(const PneumaticState&) const = default;
};

struct PhaseSchedule {
    double inflate_time = 5.0;
    double hold_time = 1.0;
    double deflate_time = 5.0;

    double total() const { return inflate_time + hold_time + deflate_time; }

    ValveMode mode_at(double t) const {
        if (t < inflate_time) return ValveMode::inflate;
        if (t < inflate_time + hold_time) return ValveMode::hold;
        return ValveMode::vent;
    }

    bool on_protocol_grid() const {
        auto on_grid = [](double x) { return x >= 1.0 && x <= 5.0 && std::abs(x - std::round(x)) < 1e-12; };
        return on_grid(inflate_time) && on_grid(deflate_time);
    }

    void validate() const {
        if (!(inflate_time > 0.0 && hold_time >= 0.0 && deflate_time > 0.0)) {
            throw std::invalid_argument("PhaseSchedule: inflate and deflate times must be positive, hold non-negative");
        }
    }
};

/// Pump volume rate at full duty-cycle scaling, ignoring back-pressure.
inline double pump_rate(const PumpConfig& cfg) {
    if (cfg.duty < cfg.duty_deadband) return 0.0;
    return cfg.flow_efficiency * cfg.q_max * (cfg.duty / 100.0);
}

inline double effective_flow(const PumpConfig& cfg, const PneumaticState& state) {
    if (state.cutoff_engaged) return 0.0;
    const double q = pump_rate(cfg) * (1.0 - state.gauge_pressure / cfg.max_pressure);
    return std::max(q, 0.0);
}

inline double air_volume(const PneumaticState& s, double v_full, double capacitance) {
    return s.fill_fraction * v_full + s.gauge_pressure / capacitance;
}

struct StepResult {
    PneumaticState state;
    double cutoff_time = -1.0;  // offset into the step at which the cutoff engaged, if it did
};

namespace detail {

// Splits the air content between pouch volume (up to capacity) and pressure;
// anything above the envelope leaves through the relief path.
inline void repartition(PneumaticState& s, double air, double v_full, double capacity, double c, double p_max) {
    air = std::max(air, 0.0);
    const double cap = capacity * v_full;
    if (air <= cap) {
        s.fill_fraction = air / v_full;
        s.gauge_pressure = 0.0;
        return;
    }
    s.fill_fraction = capacity;
    s.gauge_pressure = c * (air - cap);
    if (s.gauge_pressure > p_max) {
        s.outflow_volume += (s.gauge_pressure - p_max) / c;
        s.gauge_pressure = p_max;
    }
}

} // namespace detail

/// Exact advance of the two-phase fill model over dt: linear fill up to the
/// usable capacity, then exponential pressurisation against the capacitance
/// with the back-pressure derated pump; venting removes air linearly.
inline StepResult advance(const PneumaticState& state, const PumpConfig& cfg, double v_full, double dt,
                          double capacity = 1.0) {
    if (!(dt > 0.0 && dt <= 0.010)) throw std::invalid_argument("pneumatics step: dt must be in (0, 10 ms]");
    if (!(v_full > 0.0)) throw std::invalid_argument("pneumatics step: pouch volume must be positive");
    const double c = cfg.capacitance();
    const double p_max = cfg.max_pressure;
    const double u = std::clamp(capacity, 0.0, 1.0);
    StepResult r{state};
    PneumaticState& s = r.state;
    double air = air_volume(s, v_full, c);
    detail::repartition(s, air, v_full, u, c, p_max);
    air = air_volume(s, v_full, c);

    if (s.valve == ValveMode::hold) return r;

    if (s.valve == ValveMode::vent) {
        s.cutoff_engaged = false;
        const double out = std::min(air, pump_rate(cfg) * dt);
        s.outflow_volume += out;
        detail::repartition(s, air - out, v_full, u, c, p_max);
        return r;
    }

    if (!s.cutoff_engaged && s.gauge_pressure >= cfg.cutoff_pressure) {
        s.cutoff_engaged = true;
        r.cutoff_time = 0.0;
    }
    const double k = pump_rate(cfg);
    if (s.cutoff_engaged || k <= 0.0) return r;

    double remaining = dt;
    const double cap = u * v_full;
    if (s.gauge_pressure <= 0.0) {
        const double t_fill = (cap - air) / k;
        if (remaining <= t_fill) {
            s.inflow_volume += k * remaining;
            detail::repartition(s, air + k * remaining, v_full, u, c, p_max);
            return r;
        }
        s.inflow_volume += cap - air;
        air = cap;
        remaining -= t_fill;
    }
    const double p0 = c * (air - cap);
    const double tau = p_max / (c * k);
    const double t_cut = tau * std::log((p_max - p0) / (p_max - cfg.cutoff_pressure));
    double p1;
    if (t_cut <= remaining) {
        p1 = cfg.cutoff_pressure;
        s.cutoff_engaged = true;
        r.cutoff_time = dt - remaining + t_cut;
    } else {
        p1 = p_max - (p_max - p0) * std::exp(-remaining / tau);
    }
    s.inflow_volume += (p1 - p0) / c;
    detail::repartition(s, cap + p1 / c, v_full, u, c, p_max);
    return r;
}

inline PneumaticState step(const PneumaticState& state, const ActuatorDesign& design, const PumpConfig& cfg,
                           double dt, double capacity = 1.0) {
    return advance(state, cfg, full_volume(design), dt, capacity).state;
}

/// Time from an empty pouch until the automatic cutoff engages, or +inf if it
/// does not within t_max.
inline double full_inflation_time(const ActuatorDesign& design, const PumpConfig& cfg, double capacity = 1.0,
                                  double dt = 1e-3, double t_max = 60.0) {
    const double v_full = full_volume(design);
    PneumaticState s;
    s.valve = ValveMode::inflate;
    const auto n = static_cast<long>(std::ceil(t_max / dt));
    for (long i = 0; i < n; ++i) {
        StepResult r = advance(s, cfg, v_full, dt, capacity);
        if (r.cutoff_time >= 0.0) return static_cast<double>(i) * dt + r.cutoff_time;
        s = r.state;
    }
    return std::numeric_limits<double>::infinity();
}

struct InflationObservation {
    ActuatorDesign design;
    double duty;           // percent
    double capacity;       // usable fill fraction at this duty
    double observed_time;  // s
};

struct FlowCalibration {
    double flow_efficiency = 0.0;
    std::vector<double> simulated;
    std::vector<double> relative_residual;  // (simulated - observed) / observed
    double max_abs_relative_residual = 0.0;
    double sum_squared_error = 0.0;
};

inline std::vector<double> simulate_inflation_times(const std::vector<InflationObservation>& obs, PumpConfig cfg,
                                                    double eta) {
    cfg.flow_efficiency = eta;
    std::vector<double> out;
    out.reserve(obs.size());
    for (const auto& o : obs) {
        cfg.duty = o.duty;
        out.push_back(full_inflation_time(o.design, cfg, o.capacity));
    }
    return out;
}

/// Least-squares pump efficiency for a set of observed full-inflation times.
inline FlowCalibration calibrate_flow_efficiency(const std::vector<InflationObservation>& obs,
                                                 const PumpConfig& base = {}) {
    if (obs.size() < 2) throw std::invalid_argument("calibrate_flow_efficiency: need at least two observations");
    for (const auto& o : obs) {
        if (!(std::isfinite(o.observed_time) && o.observed_time > 0.0)) {
            throw std::invalid_argument("calibrate_flow_efficiency: observed times must be positive and finite");
        }
        if (!(o.duty >= base.duty_deadband && o.duty <= 100.0)) {
            throw std::invalid_argument("calibrate_flow_efficiency: duty below the pump deadband");
        }
        if (!(o.capacity > 0.0 && o.capacity <= 1.0)) {
            throw std::invalid_argument("calibrate_flow_efficiency: capacity must be in (0, 1]");
        }
    }
    auto sse = [&](double eta) {
        const auto sim = simulate_inflation_times(obs, base, eta);
        double s = 0.0;
        for (std::size_t i = 0; i < obs.size(); ++i) {
            const double e = sim[i] - obs[i].observed_time;
            s += e * e;
        }
        return std::isfinite(s) ? s : std::numeric_limits<double>::max();
    };
    boost::uintmax_t iters = 500;
    const auto best = boost::math::tools::brent_find_minima(sse, 1e-3, 1.0, 40, iters);
    FlowCalibration out;
    out.flow_efficiency = best.first;
    out.sum_squared_error = best.second;
    out.simulated = simulate_inflation_times(obs, base, best.first);
    for (std::size_t i = 0; i < obs.size(); ++i) {
        const double rr = (out.simulated[i] - obs[i].observed_time) / obs[i].observed_time;
        out.relative_residual.push_back(rr);
        out.max_abs_relative_residual = std::max(out.max_abs_relative_residual, std::abs(rr));
    }
    return out;
}

} // namespace pouchsim

#endif // POUCHSIM_PNEUMATICS_HPP
