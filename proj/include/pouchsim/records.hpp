#ifndef POUCHSIM_RECORDS_HPP
#define POUCHSIM_RECORDS_HPP

#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "pouchsim/metrics.hpp"
#include "pouchsim/rig.hpp"

namespace pouchsim {

inline constexpr int kRecordSchemaVersion = 1;

using json = nlohmann::json;

/// "1c-50.80/d100/t07"
inline std::string record_id(const std::string& design_id, double duty, int trial_index) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s/d%g/t%02d", design_id.c_str(), duty, trial_index);
    return buf;
}

inline std::string record_id(const TrialRecord& r) { return record_id(r.design_id, r.duty, r.trial_index); }

inline json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

inline std::optional<double> optional_from(const json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<double>();
}

inline json phase_to_json(const PhaseMetrics& p) {
    return json{{"sparc", optional_json(p.smoothness)},
                {"sparc_x", optional_json(p.axes.s_x)},
                {"sparc_y", optional_json(p.axes.s_y)},
                {"sparc_z", optional_json(p.axes.s_z)},
                {"path_length_m", p.path_length},
                {"duration_s", p.duration}};
}

inline PhaseMetrics phase_from_json(const json& j) {
    PhaseMetrics p;
    p.smoothness = optional_from(j.at("sparc"));
    p.axes = {optional_from(j.at("sparc_x")), optional_from(j.at("sparc_y")), optional_from(j.at("sparc_z"))};
    p.path_length = j.at("path_length_m").get<double>();
    p.duration = j.at("duration_s").get<double>();
    return p;
}

inline json metrics_to_json(const MotionMetrics& m) {
    return json{{"max_angle_rad", m.max_angle},
                {"time_of_max_angle_s", m.time_of_max_angle},
                {"path_length_m", m.path_length},
                {"abduction", phase_to_json(m.abduction)},
                {"adduction", phase_to_json(m.adduction)}};
}

inline MotionMetrics metrics_from_json(const json& j) {
    MotionMetrics m;
    m.max_angle = j.at("max_angle_rad").get<double>();
    m.time_of_max_angle = j.at("time_of_max_angle_s").get<double>();
    m.path_length = j.at("path_length_m").get<double>();
    m.abduction = phase_from_json(j.at("abduction"));
    m.adduction = phase_from_json(j.at("adduction"));
    return m;
}

/// A trial record as persisted, with the metrics computed from it.
struct StoredTrial {
    TrialRecord record;
    std::optional<MotionMetrics> metrics;  // empty for diverged trials
};

inline json trial_to_json(const StoredTrial& st) {
    const TrialRecord& r = st.record;
    json traj = json::object();
    std::vector<double> t, th, om, x, y;
    for (const auto& s : r.trajectory.samples) {
        t.push_back(s.t);
        th.push_back(s.theta);
        om.push_back(s.omega);
        x.push_back(s.x);
        y.push_back(s.y);
    }
    traj["sample_rate_hz"] = r.trajectory.sample_rate;
    traj["t"] = t;
    traj["theta"] = th;
    traj["omega"] = om;
    traj["x"] = x;
    traj["y"] = y;
    json j;
    j["schema_version"] = kRecordSchemaVersion;
    j["id"] = record_id(r);
    j["design"] = r.design_id;
    j["n_cells"] = r.n_cells;
    j["width_m"] = r.width;
    j["duty_pct"] = r.duty;
    j["trial_index"] = r.trial_index;
    j["rng_seed"] = r.rng_seed;
    j["schedule"] = {{"inflate_s", r.schedule.inflate_time}, {"hold_s", r.schedule.hold_time}, {"deflate_s", r.schedule.deflate_time}};
    j["perturbation"] = {{"flow_scale", r.flow_scale}, {"contact_scale", r.contact_scale}, {"torque_scale", r.torque_scale}};
    j["flags"] = {{"cutoff_engaged", r.flags.cutoff_engaged}, {"saturated", r.flags.saturated}, {"diverged", r.flags.diverged}};
    j["diagnostics"] = r.diagnostics;
    j["max_angle_rad"] = r.max_angle;
    j["time_of_max_angle_s"] = r.time_of_max_angle;
    j["static_force_n"] = r.static_force;
    j["cutoff_time_s"] = r.cutoff_time;
    j["phases"] = {{"inflate_end_s", r.inflate_end}, {"hold_end_s", r.hold_end}, {"deflate_end_s", r.deflate_end}};
    j["energy_j"] = {{"actuator_work", r.energy.actuator_work},
                     {"damping_loss", r.energy.damping_loss},
                     {"kinetic", r.energy.kinetic},
                     {"potential", r.energy.potential}};
    j["trajectory"] = traj;
    j["pressure_pa"] = r.pressure;
    j["torque_nm"] = r.torque;
    j["volume_m3"] = r.volume;
    j["force"] = {{"t", r.force_time}, {"newton", r.force}};
    j["metrics"] = st.metrics ? metrics_to_json(*st.metrics) : json(nullptr);
    return j;
}

inline StoredTrial trial_from_json(const json& j) {
    if (!j.contains("schema_version") || j.at("schema_version").get<int>() != kRecordSchemaVersion) {
        throw std::runtime_error("record: unsupported or missing schema_version");
    }
    StoredTrial st;
    TrialRecord& r = st.record;
    r.design_id = j.at("design").get<std::string>();
    r.n_cells = j.at("n_cells").get<int>();
    r.width = j.at("width_m").get<double>();
    r.duty = j.at("duty_pct").get<double>();
    r.trial_index = j.at("trial_index").get<int>();
    r.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    const auto& sc = j.at("schedule");
    r.schedule = {sc.at("inflate_s").get<double>(), sc.at("hold_s").get<double>(), sc.at("deflate_s").get<double>()};
    const auto& pe = j.at("perturbation");
    r.flow_scale = pe.at("flow_scale").get<double>();
    r.contact_scale = pe.at("contact_scale").get<double>();
    r.torque_scale = pe.at("torque_scale").get<double>();
    const auto& fl = j.at("flags");
    r.flags = {fl.at("cutoff_engaged").get<bool>(), fl.at("saturated").get<bool>(), fl.at("diverged").get<bool>()};
    r.diagnostics = j.at("diagnostics").get<std::string>();
    r.max_angle = j.at("max_angle_rad").get<double>();
    r.time_of_max_angle = j.at("time_of_max_angle_s").get<double>();
    r.static_force = j.at("static_force_n").get<double>();
    r.cutoff_time = j.at("cutoff_time_s").get<double>();
    const auto& ph = j.at("phases");
    r.inflate_end = ph.at("inflate_end_s").get<double>();
    r.hold_end = ph.at("hold_end_s").get<double>();
    r.deflate_end = ph.at("deflate_end_s").get<double>();
    const auto& en = j.at("energy_j");
    r.energy = {en.at("actuator_work").get<double>(), en.at("damping_loss").get<double>(), en.at("kinetic").get<double>(),
                en.at("potential").get<double>()};
    const auto& tr = j.at("trajectory");
    r.trajectory.sample_rate = tr.at("sample_rate_hz").get<double>();
    const auto t = tr.at("t").get<std::vector<double>>();
    const auto th = tr.at("theta").get<std::vector<double>>();
    const auto om = tr.at("omega").get<std::vector<double>>();
    const auto x = tr.at("x").get<std::vector<double>>();
    const auto y = tr.at("y").get<std::vector<double>>();
    if (th.size() != t.size() || om.size() != t.size() || x.size() != t.size() || y.size() != t.size()) {
        throw std::runtime_error("record " + j.value("id", std::string("?")) + ": trajectory arrays differ in length");
    }
    for (std::size_t i = 0; i < t.size(); ++i) r.trajectory.samples.push_back({t[i], th[i], om[i], x[i], y[i]});
    r.pressure = j.at("pressure_pa").get<std::vector<double>>();
    r.torque = j.at("torque_nm").get<std::vector<double>>();
    r.volume = j.at("volume_m3").get<std::vector<double>>();
    r.force_time = j.at("force").at("t").get<std::vector<double>>();
    r.force = j.at("force").at("newton").get<std::vector<double>>();
    if (!j.at("metrics").is_null()) st.metrics = metrics_from_json(j.at("metrics"));
    return st;
}

inline void write_records(std::ostream& out, const std::vector<StoredTrial>& trials) {
    for (const auto& t : trials) out << trial_to_json(t).dump() << '\n';
}

inline std::vector<StoredTrial> read_records(std::istream& in) {
    std::vector<StoredTrial> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            out.push_back(trial_from_json(json::parse(line)));
        } catch (const std::exception& e) {
            throw std::runtime_error("records line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

inline std::vector<StoredTrial> read_records(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open records file '" + path + "'");
    return read_records(in);
}

} // namespace pouchsim

#endif // POUCHSIM_RECORDS_HPP
