#ifndef POUCHSIM_BATTERY_HPP
#define POUCHSIM_BATTERY_HPP

#include <algorithm>
#include <atomic>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "pouchsim/anova.hpp"
#include "pouchsim/config.hpp"
#include "pouchsim/kinematics.hpp"
#include "pouchsim/metrics.hpp"
#include "pouchsim/pneumatics.hpp"
#include "pouchsim/records.hpp"
#include "pouchsim/rig.hpp"
#include "pouchsim/seeds.hpp"
#include "pouchsim/tukey.hpp"

namespace pouchsim {

/// Mean full-inflation times of the 50.8 mm 1- and 2-cell actuators at 50/75/100% duty.
inline std::vector<std::vector<double>> reference_inflation_times() { return {{4.5, 3.5, 2.7}, {3.5, 2.5, 2.0}}; }

struct Calibration {
    bool performed = false;
    std::optional<RigFit> rig;
    std::optional<FlowCalibration> flow;
    std::vector<InflationObservation> observations;
    ContactGeometry contact;
    double flow_efficiency = 0.0;
    std::vector<double> fills;  // per configured duty
};

/// Fits contact geometry and terminal fills to the reference angles, then the
/// pump efficiency to the reference inflation times, and applies both to cfg.
inline Calibration calibrate(RunConfig& cfg) {
    Calibration cal;
    if (!cfg.calibrate) {
        cal.contact = ContactGeometry{cfg.contact_offset, cfg.contact_kappa};
        cal.flow_efficiency = cfg.flow_efficiency;
        cal.fills = cfg.terminal_fills;
        return cal;
    }
    cal.performed = true;
    RigFitOptions fo;
    fo.kappa = cfg.contact_kappa;
    fo.width = cfg.battery_width_mm * 1e-3;
    fo.width_factor = cfg.width_factor;
    const AngleTargets targets = AngleTargets::reference();
    cal.rig = fit_rig_parameters(targets, fo);
    const auto times = reference_inflation_times();
    for (std::size_t i = 0; i < targets.cell_counts.size(); ++i) {
        for (std::size_t k = 0; k < targets.duties.size(); ++k) {
            cal.observations.push_back({cfg.battery_design(targets.cell_counts[i]), targets.duties[k], cal.rig->fills[k], times[i][k]});
        }
    }
    cal.flow = calibrate_flow_efficiency(cal.observations, cfg.pump());
    cal.contact = cal.rig->contact;
    cal.flow_efficiency = cal.flow->flow_efficiency;
    for (double d : cfg.duties) cal.fills.push_back(cal.rig->fill_for_duty(d));
    cfg.contact_offset = cal.contact.offset;
    cfg.flow_efficiency = cal.flow_efficiency;
    cfg.terminal_fills = cal.fills;
    return cal;
}

struct BatteryTask {
    int design_index;
    int duty_index;
    int trial_index;
    std::uint64_t seed;
};

inline std::vector<BatteryTask> battery_tasks(const RunConfig& cfg) {
    std::vector<BatteryTask> tasks;
    const int nd = static_cast<int>(cfg.cell_counts.size());
    const int nk = static_cast<int>(cfg.duties.size());
    for (int i = 0; i < nd; ++i) {
        for (int k = 0; k < nk; ++k) {
            for (int j = 0; j < cfg.trials_per_condition; ++j) {
                const auto idx = static_cast<std::uint64_t>((i * nk + k) * cfg.trials_per_condition + j);
                tasks.push_back({i, k, j, derive_seed(cfg.master_seed, idx)});
            }
        }
    }
    return tasks;
}

inline StoredTrial run_task(const RunConfig& cfg, const BatteryTask& task) {
    const ActuatorDesign design = cfg.battery_design(cfg.cell_counts[static_cast<std::size_t>(task.design_index)]);
    const double duty = cfg.duties[static_cast<std::size_t>(task.duty_index)];
    const double fill = cfg.terminal_fills[static_cast<std::size_t>(task.duty_index)];
    StoredTrial st;
    try {
        st.record = simulate_trial(design, cfg.arm(), cfg.pump(duty), cfg.schedule, cfg.noise, task.seed,
                                   cfg.trial_options(fill));
        st.record.trial_index = task.trial_index;
        st.metrics = analyze_motion(motion_log_from_trial(st.record, cfg.arm_length), cfg.analysis());
    } catch (const DivergenceError& e) {
        st.record = TrialRecord{};
        st.record.design_id = design.id();
        st.record.n_cells = design.n_cells;
        st.record.width = design.width;
        st.record.duty = duty;
        st.record.schedule = cfg.schedule;
        st.record.rng_seed = task.seed;
        st.record.trial_index = task.trial_index;
        st.record.flags.diverged = true;
        st.record.diagnostics = e.what();
        st.metrics.reset();
    }
    return st;
}

/// Runs every task on `jobs` worker threads; results come back in task order.
inline std::vector<StoredTrial> run_battery(const RunConfig& cfg, int jobs) {
    const auto tasks = battery_tasks(cfg);
    std::vector<StoredTrial> out(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t i = next++; i < tasks.size(); i = next++) out[i] = run_task(cfg, tasks[i]);
    };
    const int n = std::max(1, std::min<int>(jobs, static_cast<int>(tasks.size())));
    std::vector<std::thread> pool;
    for (int w = 1; w < n; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    return out;
}

// ---------------------------------------------------------------------------
// Summary statistics over a battery.

struct ConditionStats {
    std::string design_id;
    int n_cells = 0;
    double duty = 0.0;
    std::size_t n = 0;
    std::size_t diverged = 0;
    std::optional<CvRecord> max_angle_deg;
    std::optional<CvRecord> force;
    std::optional<CvRecord> path_abduction;
    std::optional<CvRecord> path_adduction;
    std::optional<CvRecord> sparc_abduction;
    std::optional<CvRecord> sparc_adduction;
    std::vector<std::string> ids;
};

struct MetricAnova {
    std::string metric;
    std::optional<AnovaTable> table;
    std::vector<TukeyPair> duty_tukey;  // groups are the duties, pooled over cell counts
    std::string note;
};

struct BatterySummary {
    std::vector<int> cell_counts;
    std::vector<double> duties;
    std::vector<ConditionStats> conditions;  // [design][duty] flattened
    std::vector<MetricAnova> anovas;
};

using MetricGetter = std::function<std::optional<double>(const StoredTrial&)>;

inline std::vector<std::pair<std::string, MetricGetter>> battery_metrics() {
    auto m = [](auto f) -> MetricGetter {
        return [f](const StoredTrial& t) -> std::optional<double> {
            if (!t.metrics) return std::nullopt;
            return f(t);
        };
    };
    return {
        {"max_angle_deg", m([](const StoredTrial& t) { return std::optional<double>(rad_to_deg(t.metrics->max_angle)); })},
        {"static_force_n", m([](const StoredTrial& t) { return std::optional<double>(t.record.static_force); })},
        {"path_length_abduction_m", m([](const StoredTrial& t) { return std::optional<double>(t.metrics->abduction.path_length); })},
        {"path_length_adduction_m", m([](const StoredTrial& t) { return std::optional<double>(t.metrics->adduction.path_length); })},
        {"sparc_abduction", m([](const StoredTrial& t) { return t.metrics->abduction.smoothness; })},
        {"sparc_adduction", m([](const StoredTrial& t) { return t.metrics->adduction.smoothness; })},
    };
}

inline std::optional<CvRecord> safe_cv(const std::vector<double>& v) {
    if (v.size() < 2) return std::nullopt;
    try {
        return cv(v);
    } catch (const std::domain_error&) {
        return std::nullopt;
    }
}

inline BatterySummary summarize(const std::vector<StoredTrial>& trials, const std::vector<int>& cell_counts,
                                const std::vector<double>& duties) {
    BatterySummary s;
    s.cell_counts = cell_counts;
    s.duties = duties;
    const auto metrics = battery_metrics();
    // values[metric][design][duty]
    std::vector<BalancedData> values(metrics.size(), BalancedData(cell_counts.size(), std::vector<std::vector<double>>(duties.size())));
    for (std::size_t i = 0; i < cell_counts.size(); ++i) {
        for (std::size_t k = 0; k < duties.size(); ++k) {
            ConditionStats c;
            c.n_cells = cell_counts[i];
            c.duty = duties[k];
            for (const auto& t : trials) {
                if (t.record.n_cells != cell_counts[i] || t.record.duty != duties[k]) continue;
                c.design_id = t.record.design_id;
                c.ids.push_back(record_id(t.record));
                ++c.n;
                if (t.record.flags.diverged) {
                    ++c.diverged;
                    continue;
                }
                for (std::size_t m = 0; m < metrics.size(); ++m) {
                    if (auto v = metrics[m].second(t)) values[m][i][k].push_back(*v);
                }
            }
            c.max_angle_deg = safe_cv(values[0][i][k]);
            c.force = safe_cv(values[1][i][k]);
            c.path_abduction = safe_cv(values[2][i][k]);
            c.path_adduction = safe_cv(values[3][i][k]);
            c.sparc_abduction = safe_cv(values[4][i][k]);
            c.sparc_adduction = safe_cv(values[5][i][k]);
            s.conditions.push_back(std::move(c));
        }
    }
    for (std::size_t m = 0; m < metrics.size(); ++m) {
        MetricAnova a;
        a.metric = metrics[m].first;
        try {
            a.table = two_way_anova(values[m]);
            if (a.table->error.mean_sq > 0.0 && duties.size() >= 2) {
                std::vector<double> duty_means(duties.size(), 0.0);
                for (std::size_t k = 0; k < duties.size(); ++k) {
                    double sum = 0.0;
                    std::size_t cnt = 0;
                    for (std::size_t i = 0; i < cell_counts.size(); ++i) {
                        for (double v : values[m][i][k]) {
                            sum += v;
                            ++cnt;
                        }
                    }
                    duty_means[k] = sum / static_cast<double>(cnt);
                }
                const double per_group = static_cast<double>(cell_counts.size() * values[m][0][0].size());
                a.duty_tukey = tukey_hsd(duty_means, a.table->error.mean_sq, per_group, a.table->error.df);
            }
        } catch (const std::invalid_argument& e) {
            a.note = e.what();
        }
        s.anovas.push_back(std::move(a));
    }
    return s;
}

} // namespace pouchsim

#endif // POUCHSIM_BATTERY_HPP
