#ifndef POUCHSIM_CONFIG_HPP
#define POUCHSIM_CONFIG_HPP

#include <cstdint>
#include <cstdlib>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <toml.hpp>

#include "pouchsim/actuator.hpp"
#include "pouchsim/arm.hpp"
#include "pouchsim/metrics.hpp"
#include "pouchsim/pneumatics.hpp"
#include "pouchsim/rig.hpp"
#include "pouchsim/screening.hpp"

namespace pouchsim {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    // [arm]
    double arm_length = 0.165;
    double arm_mass = 0.30;
    double com_ratio = 0.45;
    double inertia_ratio = 1.15;
    double damping = 0.12;
    double contact_offset = 0.03025;
    double contact_kappa = 0.7;
    // [actuator]
    double width_factor = pocket_equivalent_width_factor(0.009, 0.1524);
    // [pump]
    double q_max_lpm = 2.0;
    double duty_deadband = 20.0;
    double flow_efficiency = 0.966;
    double max_psi = 7.5;
    double cutoff_psi = 6.5;
    double pressurization_time = 1.0;
    // [noise]
    NoiseModel noise{};
    // [schedule]
    PhaseSchedule schedule{};
    // [trial]
    double force_pose_deg = 5.0;
    double force_window = 1.0;
    double dt = 1e-3;
    double sample_rate = 60.0;
    double capacity_smoothing = 2e-3;
    // [battery]
    std::vector<int> cell_counts{1, 2};
    double battery_width_mm = 50.8;
    std::vector<double> duties{50.0, 75.0, 100.0};
    std::vector<double> terminal_fills{0.7840, 0.9050, 0.9706};
    int trials_per_condition = 30;
    std::uint64_t master_seed = 20240917;
    bool calibrate = true;
    // [screen]
    double theta_target_deg = 45.0;
    double supply_psi = 7.5;
    double safety_factor = 2.0;
    // [analysis]
    double filter_cutoff = 5.0;
    double sparc_f_max = 10.0;
    double sparc_threshold = 0.05;
    int sparc_pad_factor = 4;
    // [output]
    std::string output_dir = "out";

    ArmModel arm() const {
        ArmModel a = make_arm(arm_length, arm_mass, com_ratio, inertia_ratio);
        a.damping = damping;
        a.contact = ContactGeometry{contact_offset, contact_kappa};
        return a;
    }

    PumpConfig pump(double duty = 100.0) const {
        PumpConfig p;
        p.q_max = lpm_to_m3s(q_max_lpm);
        p.duty = duty;
        p.duty_deadband = duty_deadband;
        p.flow_efficiency = flow_efficiency;
        p.max_pressure = psi_to_pa(max_psi);
        p.cutoff_pressure = psi_to_pa(cutoff_psi);
        p.pressurization_time = pressurization_time;
        return p;
    }

    TrialOptions trial_options(double capacity) const {
        TrialOptions o;
        o.capacity = capacity;
        o.force_pose = deg_to_rad(force_pose_deg);
        o.force_window = force_window;
        o.dt = dt;
        o.sample_rate = sample_rate;
        o.capacity_smoothing = capacity_smoothing;
        return o;
    }

    ScreeningTargets screening() const {
        ScreeningTargets t;
        t.theta_target = deg_to_rad(theta_target_deg);
        t.supply_pressure = psi_to_pa(supply_psi);
        t.safety_factor = safety_factor;
        return t;
    }

    AnalysisOptions analysis() const {
        AnalysisOptions a;
        a.filter_cutoff = filter_cutoff;
        a.arm_length = arm_length;
        a.sparc = SparcOptions{sparc_threshold, sparc_f_max, sparc_pad_factor};
        return a;
    }

    ActuatorDesign battery_design(int n_cells) const { return make_design(n_cells, battery_width_mm * 1e-3, width_factor); }

    void validate() const {
        try {
            arm().validate();
            pump().validate();
            noise.validate();
            schedule.validate();
            for (int n : cell_counts) battery_design(n);
        } catch (const std::exception& e) {
            throw ConfigError(e.what());
        }
        if (duties.empty() || cell_counts.empty()) throw ConfigError("battery: duties and cell_counts must be non-empty");
        for (double d : duties) {
            if (!(d >= 0.0 && d <= 100.0)) throw ConfigError("battery: duty values must lie in [0, 100]");
        }
        for (std::size_t i = 1; i < duties.size(); ++i) {
            if (!(duties[i] > duties[i - 1])) throw ConfigError("battery: duties must be strictly increasing");
        }
        if (!calibrate && terminal_fills.size() != duties.size()) {
            throw ConfigError("battery: terminal_fills needs one entry per duty when calibrate = false");
        }
        for (double f : terminal_fills) {
            if (!(f > 0.0 && f <= 1.0)) throw ConfigError("battery: terminal_fills must lie in (0, 1]");
        }
        if (trials_per_condition < 1) throw ConfigError("battery: trials_per_condition must be >= 1");
        if (!(dt > 0.0 && dt <= 0.010)) throw ConfigError("trial: dt_s must be in (0, 0.01]");
        if (!(sample_rate > 0.0 && force_window > 0.0 && capacity_smoothing >= 0.0)) {
            throw ConfigError("trial: sample_rate_hz and force_window_s must be positive");
        }
        if (!(theta_target_deg > 0.0 && theta_target_deg < 180.0)) throw ConfigError("screen: theta_target_deg must be in (0, 180)");
        if (!(supply_psi > 0.0 && safety_factor > 0.0)) throw ConfigError("screen: supply_psi and safety_factor must be positive");
        if (!(filter_cutoff > 0.0 && filter_cutoff < sample_rate / 2.0)) {
            throw ConfigError("analysis: filter_cutoff_hz must be below the Nyquist frequency");
        }
        if (!(sparc_f_max > 0.0 && sparc_threshold > 0.0 && sparc_threshold < 1.0 && sparc_pad_factor >= 1)) {
            throw ConfigError("analysis: invalid SPARC parameters");
        }
        if (output_dir.empty()) throw ConfigError("output: dir must not be empty");
    }
};

namespace detail {

using Setter = std::function<void(RunConfig&, const toml::node&)>;

inline double as_double(const toml::node& n, const std::string& name) {
    if (auto v = n.value<double>()) return *v;
    throw ConfigError(name + ": expected a number");
}

inline Setter set_double(double RunConfig::*field) {
    return [field](RunConfig& c, const toml::node& n) { c.*field = as_double(n, ""); };
}

template <typename F>
Setter set_with(F f) {
    return [f](RunConfig& c, const toml::node& n) { f(c, n); };
}

inline std::int64_t as_int(const toml::node& n) {
    if (auto v = n.value<std::int64_t>()) return *v;
    throw ConfigError("expected an integer");
}

template <typename T>
std::vector<T> as_array(const toml::node& n) {
    const auto* arr = n.as_array();
    if (!arr) throw ConfigError("expected an array");
    std::vector<T> out;
    for (const auto& e : *arr) {
        if constexpr (std::is_integral_v<T>) out.push_back(static_cast<T>(as_int(e)));
        else out.push_back(as_double(e, ""));
    }
    return out;
}

inline const std::map<std::string, std::map<std::string, Setter>>& config_schema() {
    static const std::map<std::string, std::map<std::string, Setter>> schema = {
        {"arm",
         {{"length_m", set_double(&RunConfig::arm_length)},
          {"mass_kg", set_double(&RunConfig::arm_mass)},
          {"com_ratio", set_double(&RunConfig::com_ratio)},
          {"inertia_ratio", set_double(&RunConfig::inertia_ratio)},
          {"damping", set_double(&RunConfig::damping)},
          {"contact_offset_m", set_double(&RunConfig::contact_offset)},
          {"contact_kappa", set_double(&RunConfig::contact_kappa)}}},
        {"actuator", {{"effective_width_factor", set_double(&RunConfig::width_factor)}}},
        {"pump",
         {{"q_max_lpm", set_double(&RunConfig::q_max_lpm)},
          {"duty_deadband_pct", set_double(&RunConfig::duty_deadband)},
          {"flow_efficiency", set_double(&RunConfig::flow_efficiency)},
          {"max_psi", set_double(&RunConfig::max_psi)},
          {"cutoff_psi", set_double(&RunConfig::cutoff_psi)},
          {"pressurization_time_s", set_double(&RunConfig::pressurization_time)}}},
        {"noise",
         {{"cv_flow", set_with([](RunConfig& c, const toml::node& n) { c.noise.cv_flow = as_double(n, "cv_flow"); })},
          {"cv_contact", set_with([](RunConfig& c, const toml::node& n) { c.noise.cv_contact = as_double(n, "cv_contact"); })},
          {"instability_gain",
           set_with([](RunConfig& c, const toml::node& n) { c.noise.instability_gain = as_double(n, "instability_gain"); })}}},
        {"schedule",
         {{"inflate_s", set_with([](RunConfig& c, const toml::node& n) { c.schedule.inflate_time = as_double(n, "inflate_s"); })},
          {"hold_s", set_with([](RunConfig& c, const toml::node& n) { c.schedule.hold_time = as_double(n, "hold_s"); })},
          {"deflate_s", set_with([](RunConfig& c, const toml::node& n) { c.schedule.deflate_time = as_double(n, "deflate_s"); })}}},
        {"trial",
         {{"force_pose_deg", set_double(&RunConfig::force_pose_deg)},
          {"force_window_s", set_double(&RunConfig::force_window)},
          {"dt_s", set_double(&RunConfig::dt)},
          {"sample_rate_hz", set_double(&RunConfig::sample_rate)},
          {"capacity_smoothing", set_double(&RunConfig::capacity_smoothing)}}},
        {"battery",
         {{"cell_counts", set_with([](RunConfig& c, const toml::node& n) { c.cell_counts = as_array<int>(n); })},
          {"width_mm", set_double(&RunConfig::battery_width_mm)},
          {"duties", set_with([](RunConfig& c, const toml::node& n) { c.duties = as_array<double>(n); })},
          {"terminal_fills", set_with([](RunConfig& c, const toml::node& n) { c.terminal_fills = as_array<double>(n); })},
          {"trials_per_condition",
           set_with([](RunConfig& c, const toml::node& n) { c.trials_per_condition = static_cast<int>(as_int(n)); })},
          {"master_seed", set_with([](RunConfig& c, const toml::node& n) {
               const auto v = as_int(n);
               if (v < 0) throw ConfigError("expected a non-negative integer");
               c.master_seed = static_cast<std::uint64_t>(v);
           })},
          {"calibrate", set_with([](RunConfig& c, const toml::node& n) {
               if (auto b = n.value<bool>()) c.calibrate = *b;
               else throw ConfigError("expected a boolean");
           })}}},
        {"screen",
         {{"theta_target_deg", set_double(&RunConfig::theta_target_deg)},
          {"supply_psi", set_double(&RunConfig::supply_psi)},
          {"safety_factor", set_double(&RunConfig::safety_factor)}}},
        {"analysis",
         {{"filter_cutoff_hz", set_double(&RunConfig::filter_cutoff)},
          {"sparc_f_max_hz", set_double(&RunConfig::sparc_f_max)},
          {"sparc_threshold", set_double(&RunConfig::sparc_threshold)},
          {"sparc_pad_factor",
           set_with([](RunConfig& c, const toml::node& n) { c.sparc_pad_factor = static_cast<int>(as_int(n)); })}}},
        {"output", {{"dir", set_with([](RunConfig& c, const toml::node& n) {
                          if (auto s = n.value<std::string>()) c.output_dir = *s;
                          else throw ConfigError("expected a string");
                      })}}},
    };
    return schema;
}

inline void apply(RunConfig& cfg, const std::string& section, const std::string& key, const toml::node& value,
                  const std::string& origin) {
    const auto& schema = config_schema();
    const auto s = schema.find(section);
    if (s == schema.end()) throw ConfigError(origin + ": unknown section [" + section + "]");
    const auto k = s->second.find(key);
    if (k == s->second.end()) throw ConfigError(origin + ": unknown key '" + key + "' in [" + section + "]");
    try {
        k->second(cfg, value);
    } catch (const ConfigError& e) {
        throw ConfigError(origin + ": " + section + "." + key + ": " + e.what());
    }
}

inline std::string upper(std::string s) {
    for (auto& ch : s) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    return s;
}

} // namespace detail

inline void apply_toml(RunConfig& cfg, const toml::table& tbl, const std::string& origin) {
    for (auto&& [section, node] : tbl) {
        const auto* sub = node.as_table();
        if (!sub) throw ConfigError(origin + ": top-level key '" + std::string(section.str()) + "' must be a table");
        for (auto&& [key, value] : *sub) detail::apply(cfg, std::string(section.str()), std::string(key.str()), value, origin);
    }
}

/// Overrides of the form POUCHSIM_<SECTION>_<KEY>=<toml value>, e.g.
/// POUCHSIM_BATTERY_MASTER_SEED=7 or POUCHSIM_BATTERY_DUTIES="[50, 100]".
/// `getenv` is injectable for tests.
inline void apply_env_overrides(RunConfig& cfg, const std::function<const char*(const char*)>& getenv_fn) {
    for (const auto& [section, keys] : detail::config_schema()) {
        for (const auto& [key, setter] : keys) {
            const std::string var = "POUCHSIM_" + detail::upper(section) + "_" + detail::upper(key);
            const char* raw = getenv_fn(var.c_str());
            if (!raw) continue;
            toml::table parsed;
            try {
                parsed = toml::parse("v = " + std::string(raw));
            } catch (const toml::parse_error&) {
                // bare words are taken as strings
                parsed = toml::table{{"v", std::string(raw)}};
            }
            detail::apply(cfg, section, key, *parsed.get("v"), var);
        }
    }
}

inline RunConfig load_config(const std::string& path,
                             const std::function<const char*(const char*)>& getenv_fn = [](const char* n) {
                                 return static_cast<const char*>(std::getenv(n));
                             }) {
    RunConfig cfg;
    if (!path.empty()) {
        try {
            const toml::table tbl = toml::parse_file(path);
            apply_toml(cfg, tbl, path);
        } catch (const toml::parse_error& e) {
            std::ostringstream msg;
            msg << path << ": " << e.description() << " (line " << e.source().begin.line << ")";
            throw ConfigError(msg.str());
        }
    }
    apply_env_overrides(cfg, getenv_fn);
    cfg.validate();
    return cfg;
}

} // namespace pouchsim

#endif // POUCHSIM_CONFIG_HPP
