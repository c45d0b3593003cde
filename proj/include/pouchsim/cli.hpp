#ifndef POUCHSIM_CLI_HPP
#define POUCHSIM_CLI_HPP

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pouchsim/battery.hpp"
#include "pouchsim/config.hpp"
#include "pouchsim/csv.hpp"
#include "pouchsim/records.hpp"
#include "pouchsim/report.hpp"
#include "pouchsim/screening.hpp"

namespace pouchsim {

enum ExitCode : int { kExitOk = 0, kExitAssertion = 1, kExitUsage = 2 };

namespace cli_detail {

struct CommonOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    int jobs = 1;
    std::string out;
};

inline void add_common(CLI::App* sub, CommonOptions& o) {
    sub->add_option("--config", o.config, "TOML configuration file")->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "master seed (overrides the config)");
    sub->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out", o.out, "output directory (overrides the config)");
}

inline RunConfig resolve(const CommonOptions& o) {
    RunConfig cfg = load_config(o.config);
    if (o.seed) cfg.master_seed = *o.seed;
    if (!o.out.empty()) cfg.output_dir = o.out;
    return cfg;
}

inline void write_file(const std::filesystem::path& p, const std::string& content) {
    std::filesystem::create_directories(p.parent_path().empty() ? std::filesystem::path(".") : p.parent_path());
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write '" + p.string() + "'");
    f << content;
}

inline int cmd_screen(const CommonOptions& common, std::optional<double> theta_target, bool assert_selection,
                      std::ostream& out, std::ostream& err) {
    RunConfig cfg = resolve(common);
    if (theta_target) {
        cfg.theta_target_deg = *theta_target;
        cfg.validate();
    }
    ArmModel arm = cfg.arm();
    if (cfg.calibrate) {
        RigFitOptions fo;
        fo.kappa = cfg.contact_kappa;
        fo.width = cfg.battery_width_mm * 1e-3;
        fo.width_factor = cfg.width_factor;
        arm.contact = fit_rig_parameters(AngleTargets::reference(), fo).contact;
    }
    const ScreeningTargets targets = cfg.screening();
    const auto rows = screen_designs(design_space(cfg.width_factor), targets, arm);
    const std::filesystem::path dir(cfg.output_dir);
    write_file(dir / "screening.csv", screening_csv(rows));
    const std::string md = screening_markdown(rows, targets);
    write_file(dir / "screening.md", md);
    out << md;
    if (assert_selection) {
        const std::set<std::string> expected{"1c-50.80", "2c-50.80"};
        std::set<std::string> top;
        for (const auto& r : rows) {
            if (r.feasible && r.rank <= 2) top.insert(r.design.id());
        }
        if (top != expected) {
            err << "selection assertion failed: top-2 feasible designs are {";
            for (const auto& t : top) err << ' ' << t;
            err << " }, expected { 1c-50.80 2c-50.80 }\n";
            return kExitAssertion;
        }
        out << "\nselection assertion passed: top-2 = {1c-50.80, 2c-50.80}\n";
    }
    return kExitOk;
}

inline int cmd_battery(const CommonOptions& common, std::ostream& out, std::ostream& err) {
    RunConfig cfg = resolve(common);
    const auto start = std::chrono::steady_clock::now();
    const Calibration cal = calibrate(cfg);
    if (cal.rig && cal.rig->calibration_failed) err << cal.rig->report;
    const auto trials = run_battery(cfg, common.jobs);
    const std::filesystem::path dir(cfg.output_dir);
    std::ostringstream records;
    write_records(records, trials);
    write_file(dir / "records.jsonl", records.str());
    const BatterySummary summary = summarize(trials, cfg.cell_counts, cfg.duties);
    const std::string md = battery_markdown(summary, cal, cfg);
    write_file(dir / "battery.md", md);
    std::size_t diverged = 0;
    for (const auto& t : trials) diverged += t.record.flags.diverged ? 1 : 0;
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out << md << "\n" << trials.size() << " records written to " << (dir / "records.jsonl").string() << " (" << diverged
        << " diverged) in " << fmt(secs, 2) << " s\n";
    return kExitOk;
}

inline int cmd_analyze(const CommonOptions& common, const std::vector<std::string>& imu_paths,
                       const std::vector<std::string>& marker_paths, std::ostream& out, std::ostream& err) {
    RunConfig cfg = resolve(common);
    if (imu_paths.empty() || imu_paths.size() != marker_paths.size()) {
        err << "analyze: pass one --marker file for every --imu file\n";
        return kExitUsage;
    }
    const AnalysisOptions opt = cfg.analysis();
    json report = json::array();
    std::vector<double> angles, paths;
    std::ostringstream md;
    md << "# Motion analysis\n\n";
    md << "| trial | max angle (deg) | path length (m) | SPARC abd | SPARC add | abd S_x | abd S_y | abd S_z | add S_x | add S_y | add S_z |\n";
    md << "|---|---:|---:|---:|---:|---:|---:|---:|---:|---:|---:|\n";
    auto o = [](const std::optional<double>& v) { return v ? fmt(*v, 3) : std::string("undefined"); };
    for (std::size_t i = 0; i < imu_paths.size(); ++i) {
        IngestResult in = ingest_motion(read_imu_csv(imu_paths[i]), read_marker_csv(marker_paths[i]));
        for (const auto& w : in.warnings) err << "warning: " << imu_paths[i] << ": " << w << "\n";
        const MotionMetrics m = analyze_motion(in.log, opt);
        angles.push_back(rad_to_deg(m.max_angle));
        paths.push_back(m.path_length);
        json j = metrics_to_json(m);
        j["imu"] = imu_paths[i];
        j["marker"] = marker_paths[i];
        j["sample_rate_hz"] = in.log.sample_rate;
        j["warnings"] = in.warnings;
        report.push_back(j);
        md << "| " << std::filesystem::path(imu_paths[i]).filename().string() << " | " << fmt(rad_to_deg(m.max_angle), 2)
           << " | " << fmt(m.path_length, 4) << " | " << o(m.abduction.smoothness) << " | " << o(m.adduction.smoothness)
           << " | " << o(m.abduction.axes.s_x) << " | " << o(m.abduction.axes.s_y) << " | " << o(m.abduction.axes.s_z)
           << " | " << o(m.adduction.axes.s_x) << " | " << o(m.adduction.axes.s_y) << " | " << o(m.adduction.axes.s_z)
           << " |\n";
    }
    json summary = json::object();
    if (angles.size() >= 2) {
        md << "\n| metric | mean | SD | CV |\n|---|---:|---:|---:|\n";
        auto add = [&](const char* name, const std::vector<double>& v) {
            const auto c = safe_cv(v);
            if (!c) {
                md << "| " << name << " | n/a | n/a | undefined |\n";
                summary[name] = nullptr;
                return;
            }
            md << "| " << name << " | " << fmt(c->mean, 4) << " | " << fmt(c->sd, 4) << " | " << fmt(c->cv, 4) << " |\n";
            summary[name] = {{"mean", c->mean}, {"sd", c->sd}, {"cv", c->cv}};
        };
        add("max_angle_deg", angles);
        add("path_length_m", paths);
    }
    const std::filesystem::path dir(cfg.output_dir);
    write_file(dir / "analysis.json", json{{"trials", report}, {"across_trials", summary}}.dump(2) + "\n");
    write_file(dir / "analysis.md", md.str());
    out << md.str();
    return kExitOk;
}

inline std::string file_stem(const std::string& record_id) {
    std::string s = record_id;
    for (auto& ch : s) {
        if (ch == '/') ch = '_';
    }
    return s;
}

inline int cmd_report(const CommonOptions& common, const std::string& records_path, bool export_csv, std::ostream& out) {
    RunConfig cfg = resolve(common);
    const std::filesystem::path dir(cfg.output_dir);
    const std::string path = records_path.empty() ? (dir / "records.jsonl").string() : records_path;
    if (!std::filesystem::exists(path)) throw std::runtime_error("records file '" + path + "' not found");
    const auto trials = read_records(path);
    if (trials.empty()) throw std::runtime_error("records file '" + path + "' holds no records");
    const FileSet files = build_report(trials);
    for (const auto& [name, content] : files) write_file(dir / name, content);
    if (export_csv) {
        for (const auto& t : trials) {
            if (t.record.flags.diverged) continue;
            const MotionLog log = motion_log_from_trial(t.record, cfg.arm_length);
            const std::string stem = file_stem(record_id(t.record));
            std::ostringstream imu, marker;
            write_imu_csv(imu, log.imu);
            write_marker_csv(marker, log.marker);
            write_file(dir / "csv" / (stem + "_imu.csv"), imu.str());
            write_file(dir / "csv" / (stem + "_marker.csv"), marker.str());
        }
    }
    out << files.at("report.md") << "\n" << files.size() << " files written to " << dir.string() << "\n";
    return kExitOk;
}

} // namespace cli_detail

/// Entry point of the pouchsim command line; returns the process exit code.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Pouch actuator simulator: design screening, trial battery, motion analysis and reports"};
    app.require_subcommand(1);
    cli_detail::CommonOptions common;

    auto* screen = app.add_subcommand("screen", "rank the 20 actuator variants");
    cli_detail::add_common(screen, common);
    std::optional<double> theta_target;
    bool assert_selection = false;
    screen->add_option("--theta-target", theta_target, "target shoulder angle in degrees");
    screen->add_flag("--assert-selection", assert_selection, "exit 1 unless the top-2 are the 1- and 2-cell 50.8 mm designs");

    auto* battery = app.add_subcommand("battery", "run the seeded 2 x 3 x 30 trial battery");
    cli_detail::add_common(battery, common);

    auto* analyze = app.add_subcommand("analyze", "metrics from IMU and marker CSV files");
    cli_detail::add_common(analyze, common);
    std::vector<std::string> imu, marker;
    analyze->add_option("--imu", imu, "IMU csv (t,gx,gy,gz,ax,ay,az)")->required();
    analyze->add_option("--marker", marker, "marker csv (t,x,y)")->required();

    auto* report = app.add_subcommand("report", "plots and tables from persisted records");
    cli_detail::add_common(report, common);
    std::string records;
    report->add_option("--records", records, "records.jsonl (default <out>/records.jsonl)");
    bool export_csv = false;
    report->add_flag("--export-csv", export_csv, "also write per-trial IMU and marker CSV files under <out>/csv");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << app.help();
        return kExitUsage;
    }

    try {
        if (screen->parsed()) return cli_detail::cmd_screen(common, theta_target, assert_selection, out, err);
        if (battery->parsed()) return cli_detail::cmd_battery(common, out, err);
        if (analyze->parsed()) return cli_detail::cmd_analyze(common, imu, marker, out, err);
        if (report->parsed()) return cli_detail::cmd_report(common, records, export_csv, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const SchemaError& e) {
        err << "schema error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}

} // namespace pouchsim

#endif // POUCHSIM_CLI_HPP
