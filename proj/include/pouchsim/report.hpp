#ifndef POUCHSIM_REPORT_HPP
#define POUCHSIM_REPORT_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pouchsim/battery.hpp"
#include "pouchsim/screening.hpp"

namespace pouchsim {

inline std::string fmt(double v, int prec = 4) {
    if (std::isnan(v)) return "n/a";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", prec, v);
    return buf;
}

inline std::string fmt_g(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline std::string mean_sd(const std::optional<CvRecord>& c, int prec = 2) {
    if (!c) return "n/a";
    return fmt(c->mean, prec) + " ± " + fmt(c->sd, prec);
}

inline std::string p_value(const std::optional<double>& p) {
    if (!p) return "n/a";
    return *p < 0.001 ? "<0.001" : fmt(*p, 3);
}

// ---------------------------------------------------------------------------
// Screening.

inline std::string screening_csv(const std::vector<ScreeningResult>& rows) {
    std::ostringstream o;
    o << "rank,design,n_cells,width_mm,feasible,reason,contact_distance_m,max_thickness_m,max_angle_deg,"
         "required_pressure_pa,hoop_stress_pa,stress_margin,lift_torque_margin_nm\n";
    for (const auto& r : rows) {
        o << r.rank << ',' << r.design.id() << ',' << r.design.n_cells << ',' << fmt(r.design.width * 1e3, 2) << ','
          << (r.feasible ? 1 : 0) << ',' << to_string(r.reason) << ',' << fmt_g(r.contact_distance) << ','
          << fmt_g(r.max_thickness) << ',' << fmt_g(rad_to_deg(r.max_angle)) << ',' << fmt_g(r.required_pressure_at_target)
          << ',' << fmt_g(r.hoop_stress_at_target) << ',' << fmt_g(r.stress_margin) << ',' << fmt_g(r.lift_torque_margin)
          << '\n';
    }
    return o.str();
}

inline std::string screening_markdown(const std::vector<ScreeningResult>& rows, const ScreeningTargets& t) {
    std::ostringstream o;
    o << "# Design screening\n\n";
    o << "Target shoulder angle " << fmt(rad_to_deg(t.theta_target), 1) << " deg, supply " << fmt(pa_to_psi(t.supply_pressure), 2)
      << " psi, safety factor " << fmt(t.safety_factor, 2) << " on yield.\n\n";
    o << "| rank | design | feasible | reason | max angle (deg) | required P (kPa) | hoop stress (MPa) | stress margin | torque margin (N m) |\n";
    o << "|---:|---|:---:|---|---:|---:|---:|---:|---:|\n";
    for (const auto& r : rows) {
        o << "| " << r.rank << " | " << r.design.id() << " | " << (r.feasible ? "yes" : "no") << " | " << to_string(r.reason)
          << " | " << fmt(rad_to_deg(r.max_angle), 1) << " | " << fmt(r.required_pressure_at_target / 1e3, 2) << " | "
          << fmt(r.hoop_stress_at_target / 1e6, 4) << " | " << fmt(r.stress_margin, 4) << " | " << fmt(r.lift_torque_margin, 4)
          << " |\n";
    }
    o << "\nFeasible designs: " << count_feasible(rows) << " of " << rows.size() << ".\n";
    return o.str();
}

// ---------------------------------------------------------------------------
// Battery.

inline std::string anova_markdown(const MetricAnova& a, const std::vector<double>& duties) {
    std::ostringstream o;
    o << "### " << a.metric << "\n\n";
    if (!a.table) {
        o << "ANOVA not computed: " << a.note << "\n\n";
        return o.str();
    }
    const AnovaTable& t = *a.table;
    o << "| effect | SS | df | MS | F | p |\n|---|---:|---:|---:|---:|---:|\n";
    auto row = [&](const char* name, const AnovaEffect& e, bool tested) {
        o << "| " << name << " | " << fmt_g(e.sum_sq) << " | " << e.df << " | " << fmt_g(e.mean_sq) << " | "
          << (tested ? (e.f ? fmt(*e.f, 2) : std::string("undefined")) : std::string("")) << " | "
          << (tested ? p_value(e.p) : std::string("")) << " |\n";
    };
    row("cells", t.factor_a, true);
    row("duty", t.factor_b, true);
    row("cells x duty", t.interaction, true);
    row("error", t.error, false);
    o << "\n";
    if (!a.duty_tukey.empty()) {
        o << "Tukey HSD on duty (pooled over cell counts):\n\n| pair | mean difference | q | p |\n|---|---:|---:|---:|\n";
        for (const auto& p : a.duty_tukey) {
            o << "| " << fmt(duties[p.i], 0) << " vs " << fmt(duties[p.j], 0) << " | " << fmt_g(p.mean_difference) << " | "
              << fmt(p.q, 2) << " | " << p_value(p.p) << " |\n";
        }
        o << "\n";
    }
    return o.str();
}

inline std::string battery_markdown(const BatterySummary& s, const Calibration& cal, const RunConfig& cfg) {
    std::ostringstream o;
    o << "# Trial battery\n\n";
    o << "Master seed " << cfg.master_seed << ", " << cfg.trials_per_condition << " trials per condition, schedule "
      << fmt(cfg.schedule.inflate_time, 1) << " s inflate / " << fmt(cfg.schedule.hold_time, 1) << " s hold / "
      << fmt(cfg.schedule.deflate_time, 1) << " s deflate.\n\n";
    o << "Arm: length " << fmt(cfg.arm_length, 3) << " m, mass " << fmt(cfg.arm_mass, 3) << " kg, com "
      << fmt(cfg.com_ratio * cfg.arm_length, 4) << " m, inertia " << fmt_g(cfg.arm().inertia) << " kg m^2, damping "
      << fmt(cfg.damping, 3) << " N m s/rad.\n\n";
    o << "## Calibration\n\n";
    if (cal.performed) {
        o << "Contact offset " << fmt(cal.contact.offset, 5) << " m (kappa " << fmt(cal.contact.kappa, 2)
          << "), pump efficiency " << fmt(cal.flow_efficiency, 4) << ".\n\n";
        o << "| cells | duty | target angle (deg) | model angle (deg) | residual (deg) | terminal fill | observed inflation (s) | simulated (s) |\n";
        o << "|---:|---:|---:|---:|---:|---:|---:|---:|\n";
        const auto& fit = *cal.rig;
        std::size_t obs = 0;
        for (std::size_t i = 0; i < fit.cell_counts.size(); ++i) {
            for (std::size_t k = 0; k < fit.duties.size(); ++k, ++obs) {
                o << "| " << fit.cell_counts[i] << " | " << fmt(fit.duties[k], 0) << " | "
                  << fmt(rad_to_deg(fit.model_angles[i][k] - fit.residuals[i][k]), 2) << " | "
                  << fmt(rad_to_deg(fit.model_angles[i][k]), 2) << " | " << fmt(rad_to_deg(fit.residuals[i][k]), 2) << " | "
                  << fmt(fit.fills[k], 4) << " | " << fmt(cal.observations[obs].observed_time, 2) << " | "
                  << fmt(cal.flow->simulated[obs], 3) << " |\n";
            }
        }
        if (fit.calibration_failed) o << "\n**Calibration failure**\n\n```\n" << fit.report << "```\n";
        o << "\n";
    } else {
        o << "Not calibrated; configured contact offset " << fmt(cal.contact.offset, 5) << " m, efficiency "
          << fmt(cal.flow_efficiency, 4) << ".\n\n";
    }
    o << "## Per-condition results (mean ± SD, CV)\n\n";
    o << "| design | duty | n | diverged | max angle (deg) | CV | force (N) | CV | path abd (m) | path add (m) | SPARC abd | SPARC add |\n";
    o << "|---|---:|---:|---:|---:|---:|---:|---:|---:|---:|---:|---:|\n";
    for (const auto& c : s.conditions) {
        o << "| " << c.design_id << " | " << fmt(c.duty, 0) << " | " << c.n << " | " << c.diverged << " | "
          << mean_sd(c.max_angle_deg) << " | " << (c.max_angle_deg ? fmt(c.max_angle_deg->cv, 3) : "n/a") << " | "
          << mean_sd(c.force) << " | " << (c.force ? fmt(c.force->cv, 3) : "n/a") << " | " << mean_sd(c.path_abduction, 4)
          << " | " << mean_sd(c.path_adduction, 4) << " | " << mean_sd(c.sparc_abduction) << " | "
          << mean_sd(c.sparc_adduction) << " |\n";
    }
    o << "\nRecord ids per condition run from `<design>/d<duty>/t00` to `t" << (cfg.trials_per_condition - 1) << "`.\n\n";
    o << "## Two-way ANOVA (cells x duty)\n\n";
    for (const auto& a : s.anovas) o << anova_markdown(a, s.duties);
    return o.str();
}

// ---------------------------------------------------------------------------
// SVG plots.

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    bool markers = false;
};

inline std::string svg_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                            const std::vector<PlotSeries>& series) {
    constexpr double W = 640, H = 480, L = 70, R = 20, T = 40, B = 60;
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : series) {
        for (double v : s.x) { x0 = std::min(x0, v); x1 = std::max(x1, v); }
        for (double v : s.y) { y0 = std::min(y0, v); y1 = std::max(y1, v); }
    }
    if (!(x1 >= x0)) { x0 = 0; x1 = 1; }
    if (!(y1 >= y0)) { y0 = 0; y1 = 1; }
    if (x1 - x0 < 1e-12) { x0 -= 0.5; x1 += 0.5; }
    if (y1 - y0 < 1e-12) { y0 -= 0.5; y1 += 0.5; }
    auto px = [&](double v) { return L + (v - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double v) { return H - B - (v - y0) / (y1 - y0) * (H - T - B); };
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"};
    std::ostringstream o;
    char buf[128];
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << title << "</text>\n";
    o << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = x0 + (x1 - x0) * i / 4.0, yv = y0 + (y1 - y0) * i / 4.0;
        std::snprintf(buf, sizeof buf, "%.4g", xv);
        o << "<text x=\"" << px(xv) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << buf << "</text>\n";
        std::snprintf(buf, sizeof buf, "%.4g", yv);
        o << "<text x=\"" << L - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">" << buf << "</text>\n";
    }
    o << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 18 << "\" text-anchor=\"middle\">" << xlabel << "</text>\n";
    o << "<text transform=\"translate(16," << (T + H - B) / 2 << ") rotate(-90)\" text-anchor=\"middle\">" << ylabel << "</text>\n";
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* c = colors[k % 8];
        if (s.markers) {
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3\" fill=\"%s\"/>\n", px(s.x[i]), py(s.y[i]), c);
                o << buf;
            }
        } else if (!s.x.empty()) {
            o << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1\" stroke-opacity=\"0.6\" points=\"";
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(s.x[i]), py(s.y[i]));
                o << buf;
            }
            o << "\"/>\n";
        }
        if (!s.label.empty()) {
            o << "<text x=\"" << L + 10 << "\" y=\"" << T + 16 + 14 * static_cast<double>(k) << "\" fill=\"" << c << "\">"
              << s.label << "</text>\n";
        }
    }
    o << "</svg>\n";
    return o.str();
}

/// Files produced from a set of records: name -> contents.
using FileSet = std::map<std::string, std::string>;

inline std::string condition_tag(const std::string& design_id, double duty) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_d%g", design_id.c_str(), duty);
    return buf;
}

/// Trajectory overlays per condition, force-versus-duty and path-length
/// summaries, as CSV plus SVG, and a markdown index.
inline FileSet build_report(const std::vector<StoredTrial>& trials) {
    FileSet files;
    std::vector<std::pair<std::string, double>> conditions;
    for (const auto& t : trials) {
        const auto key = std::make_pair(t.record.design_id, t.record.duty);
        if (std::find(conditions.begin(), conditions.end(), key) == conditions.end()) conditions.push_back(key);
    }
    std::sort(conditions.begin(), conditions.end());

    std::ostringstream md;
    md << "# Trial report\n\n" << trials.size() << " records, " << conditions.size() << " conditions.\n\n";
    md << "## Trajectory overlays\n\n";

    std::ostringstream force_csv, path_csv;
    force_csv << "design,duty_pct,n,mean_force_n,sd_force_n,cv\n";
    path_csv << "id,design,duty_pct,path_abduction_m,path_adduction_m,path_total_m\n";
    std::map<std::string, PlotSeries> force_series;
    std::vector<PlotSeries> path_series;

    for (const auto& [design, duty] : conditions) {
        const std::string tag = condition_tag(design, duty);
        std::ostringstream csv;
        csv << "id,t,x,y\n";
        std::vector<PlotSeries> curves;
        std::vector<double> forces;
        PlotSeries path_points{design + " @ " + fmt(duty, 0) + "%", {}, {}, true};
        for (const auto& t : trials) {
            if (t.record.design_id != design || t.record.duty != duty) continue;
            const std::string id = record_id(t.record);
            PlotSeries c;
            for (const auto& s : t.record.trajectory.samples) {
                csv << id << ',' << fmt_g(s.t) << ',' << fmt_g(s.x) << ',' << fmt_g(s.y) << '\n';
                c.x.push_back(s.x);
                c.y.push_back(s.y);
            }
            curves.push_back(std::move(c));
            if (t.record.flags.diverged || !t.metrics) continue;
            forces.push_back(t.record.static_force);
            const MotionMetrics& m = *t.metrics;
            path_csv << id << ',' << design << ',' << fmt_g(duty) << ',' << fmt_g(m.abduction.path_length) << ','
                     << fmt_g(m.adduction.path_length) << ',' << fmt_g(m.path_length) << '\n';
            path_points.x.push_back(static_cast<double>(path_series.size()) + 0.5);
            path_points.y.push_back(m.path_length);
        }
        if (!curves.empty()) curves.front().label = std::to_string(curves.size()) + " trial(s)";
        files["trajectories_" + tag + ".csv"] = csv.str();
        files["trajectories_" + tag + ".svg"] =
            svg_plot("End-effector path, " + design + " at " + fmt(duty, 0) + "% duty", "x (m)", "y (m)", curves);
        md << "- `trajectories_" << tag << ".svg` (" << curves.size() << " curves)\n";

        const auto stats = safe_cv(forces);
        force_csv << design << ',' << fmt_g(duty) << ',' << forces.size() << ','
                  << (forces.empty() ? "" : fmt_g(stats ? stats->mean : forces.front())) << ','
                  << (stats ? fmt_g(stats->sd) : "") << ',' << (stats ? fmt_g(stats->cv) : "") << '\n';
        if (!forces.empty()) {
            auto& fs = force_series[design];
            fs.label = design;
            fs.x.push_back(duty);
            fs.y.push_back(stats ? stats->mean : forces.front());
        }
        path_series.push_back(std::move(path_points));
    }
    std::vector<PlotSeries> force_plot;
    for (auto& [k, v] : force_series) force_plot.push_back(v);
    files["force_vs_duty.csv"] = force_csv.str();
    files["force_vs_duty.svg"] = svg_plot("Static end-effector force", "duty cycle (%)", "force (N)", force_plot);
    files["path_length.csv"] = path_csv.str();
    files["path_length.svg"] = svg_plot("Path length per trial", "condition", "path length (m)", path_series);

    md << "\n## Force versus duty\n\n| design | duty | n | force (N) | CV |\n|---|---:|---:|---:|---:|\n";
    std::istringstream fin(force_csv.str());
    std::string line;
    std::getline(fin, line);
    while (std::getline(fin, line)) {
        std::vector<std::string> f;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) f.push_back(cell);
        f.resize(6);
        auto num = [](const std::string& v, int prec) { return v.empty() ? std::string("n/a") : fmt(std::stod(v), prec); };
        md << "| " << f[0] << " | " << f[1] << " | " << f[2] << " | " << num(f[3], 2) << " ± " << num(f[4], 2) << " | "
           << num(f[5], 3) << " |\n";
    }
    md << "\nPlot data: `force_vs_duty.csv`, `path_length.csv`; figures: `force_vs_duty.svg`, `path_length.svg`.\n";
    files["report.md"] = md.str();
    return files;
}

} // namespace pouchsim

#endif // POUCHSIM_REPORT_HPP
