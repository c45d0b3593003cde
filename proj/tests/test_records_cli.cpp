#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "pouchsim/pouchsim.hpp"

using namespace pouchsim;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("pouchsim_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void spit(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

struct CliRun {
    int code;
    std::string out, err;
};

CliRun cli(std::vector<std::string> args) {
    args.insert(args.begin(), "pouchsim");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string default_config() { return std::string(POUCHSIM_SOURCE_DIR) + "/configs/default.toml"; }

// A short battery: three trials per condition, otherwise the defaults.
fs::path small_config(const fs::path& dir) {
    const fs::path p = dir / "small.toml";
    spit(p, "[battery]\ntrials_per_condition = 3\n");
    return p;
}

const std::vector<StoredTrial>& small_battery() {
    static const std::vector<StoredTrial> trials = [] {
        RunConfig cfg;
        cfg.trials_per_condition = 3;
        calibrate(cfg);
        return run_battery(cfg, 1);
    }();
    return trials;
}

void check_metrics_close(const MotionMetrics& a, const MotionMetrics& b, double tol) {
    CHECK_THAT(a.max_angle, WithinAbs(b.max_angle, tol));
    CHECK_THAT(a.time_of_max_angle, WithinAbs(b.time_of_max_angle, tol));
    CHECK_THAT(a.path_length, WithinAbs(b.path_length, tol));
    for (const auto* p : {&a.abduction, &a.adduction}) {
        const auto* q = p == &a.abduction ? &b.abduction : &b.adduction;
        REQUIRE(p->smoothness.has_value() == q->smoothness.has_value());
        if (p->smoothness) CHECK_THAT(*p->smoothness, WithinAbs(*q->smoothness, tol));
        REQUIRE(p->axes.s_z.has_value() == q->axes.s_z.has_value());
        if (p->axes.s_z) CHECK_THAT(*p->axes.s_z, WithinAbs(*q->axes.s_z, tol));
        CHECK(p->axes.s_x.has_value() == q->axes.s_x.has_value());
        CHECK_THAT(p->path_length, WithinAbs(q->path_length, tol));
    }
}

} // namespace

TEST_CASE("records round-trip through JSON lines", "[records]") {
    const auto& trials = small_battery();
    REQUIRE(trials.size() == 18);
    std::stringstream buf;
    write_records(buf, trials);
    const std::string first = buf.str();
    const auto back = read_records(buf);
    REQUIRE(back.size() == trials.size());
    for (std::size_t i = 0; i < trials.size(); ++i) {
        const auto& a = trials[i].record;
        const auto& b = back[i].record;
        CHECK(record_id(a) == record_id(b));
        CHECK(a.rng_seed == b.rng_seed);
        CHECK(a.max_angle == b.max_angle);
        CHECK(a.force == b.force);
        CHECK(a.energy.actuator_work == b.energy.actuator_work);
        REQUIRE(a.trajectory.samples.size() == b.trajectory.samples.size());
        for (std::size_t k = 0; k < a.trajectory.samples.size(); ++k) {
            CHECK(a.trajectory.samples[k].theta == b.trajectory.samples[k].theta);
        }
        REQUIRE(back[i].metrics.has_value());
        check_metrics_close(*trials[i].metrics, *back[i].metrics, 0.0);
    }
    std::ostringstream again;
    write_records(again, back);
    CHECK(again.str() == first);
    CHECK(record_id("1c-50.80", 100.0, 7) == "1c-50.80/d100/t07");
}

TEST_CASE("corrupt records name the offending line", "[records]") {
    const auto& trials = small_battery();
    std::ostringstream good;
    write_records(good, {trials[0], trials[1]});
    std::string text = good.str() + "{\"schema_version\": 1, \"design\": \n";
    std::istringstream in(text);
    CHECK_THROWS_WITH(read_records(in), ContainsSubstring("line 3"));

    json j = trial_to_json(trials[0]);
    CHECK(j.at("schema_version") == kRecordSchemaVersion);
    j["schema_version"] = kRecordSchemaVersion + 1;
    std::istringstream future(j.dump() + "\n");
    CHECK_THROWS_WITH(read_records(future), ContainsSubstring("line 1"));
    CHECK_THROWS(read_records(std::string("/nonexistent/records.jsonl")));
}

TEST_CASE("IMU and marker CSV round-trip", "[csv]") {
    const auto log = motion_log_from_trial(small_battery()[4].record, 0.165);
    std::stringstream imu, marker;
    write_imu_csv(imu, log.imu);
    write_marker_csv(marker, log.marker);
    const auto imu_back = read_imu_csv(imu);
    const auto marker_back = read_marker_csv(marker);
    REQUIRE(imu_back.size() == log.imu.size());
    for (std::size_t i = 0; i < imu_back.size(); ++i) {
        CHECK_THAT(imu_back[i].gz, WithinAbs(log.imu[i].gz, 1e-9));
        CHECK_THAT(imu_back[i].ax, WithinAbs(log.imu[i].ax, 1e-9));
        CHECK_THAT(marker_back[i].x, WithinAbs(log.marker[i].x, 1e-9));
        CHECK_THAT(marker_back[i].y, WithinAbs(log.marker[i].y, 1e-9));
    }
    const auto in = ingest_motion(imu_back, marker_back);
    CHECK(in.warnings.empty());
    CHECK_THAT(in.log.sample_rate, WithinAbs(60.0, 1e-9));
}

TEST_CASE("CSV schema errors name row and column", "[csv]") {
    std::istringstream empty("");
    CHECK_THROWS_AS(read_marker_csv(empty), SchemaError);
    std::istringstream header("t,x\n0,1\n");
    CHECK_THROWS_WITH(read_marker_csv(header), ContainsSubstring("row 1"));
    std::istringstream text("t,x,y\n0,0,0\n0.1,abc,0\n");
    CHECK_THROWS_WITH(read_marker_csv(text), ContainsSubstring("row 3") && ContainsSubstring("column 'x'"));
    std::istringstream columns("t,gx,gy,gz,ax,ay,az\n0,0,0,0,0,0,0\n0.1,0,0,0,0,0\n");
    CHECK_THROWS_WITH(read_imu_csv(columns), ContainsSubstring("row 3"));
    std::istringstream backwards("t,x,y\n0,0,0\n0.2,0,0\n0.1,0,0\n");
    CHECK_THROWS_WITH(read_marker_csv(backwards), ContainsSubstring("row 4") && ContainsSubstring("column 't'"));
    std::istringstream nan("t,x,y\n0,0,0\n0.1,nan,0\n");
    CHECK_THROWS_AS(read_marker_csv(nan), SchemaError);
    CHECK_THROWS_AS(read_imu_csv(std::string("/nonexistent/imu.csv")), SchemaError);
}

TEST_CASE("jittered timestamps are resampled with a warning", "[csv]") {
    std::vector<ImuSample> imu;
    std::vector<MarkerSample> marker;
    for (int i = 0; i < 120; ++i) {
        const double t = i / 60.0 + (i % 2 ? 0.002 : 0.0);
        imu.push_back({t, 0.0, 0.0, std::sin(t), 0.0, 0.0, 0.0});
        marker.push_back({t, 0.1 * t, 0.0});
    }
    const auto r = ingest_motion(imu, marker);
    REQUIRE_FALSE(r.warnings.empty());
    CHECK_THAT(r.warnings[0], ContainsSubstring("resampled"));
    for (std::size_t i = 1; i < r.log.marker.size(); ++i) {
        CHECK_THAT(r.log.marker[i].t - r.log.marker[i - 1].t, WithinAbs(1.0 / r.log.sample_rate, 1e-12));
        // a linear signal survives linear interpolation exactly
        CHECK_THAT(r.log.marker[i].x, WithinAbs(0.1 * r.log.marker[i].t, 1e-12));
    }
    std::vector<MarkerSample> late = marker;
    for (auto& m : late) m.t += 100.0;
    CHECK_THROWS_AS(ingest_motion(imu, late), SchemaError);
}

TEST_CASE("metrics from exported CSV files match the in-memory analysis", "[csv][oracle]") {
    const RunConfig cfg;
    for (std::size_t i : {0u, 7u, 17u}) {
        const auto& st = small_battery()[i];
        const auto log = motion_log_from_trial(st.record, cfg.arm_length);
        std::stringstream imu, marker;
        write_imu_csv(imu, log.imu);
        write_marker_csv(marker, log.marker);
        const auto in = ingest_motion(read_imu_csv(imu), read_marker_csv(marker));
        REQUIRE(in.warnings.empty());
        const auto from_files = analyze_motion(in.log, cfg.analysis());
        REQUIRE(st.metrics.has_value());
        check_metrics_close(from_files, *st.metrics, 1e-9);
    }
}

TEST_CASE("shipped configuration equals the built-in defaults", "[config]") {
    const RunConfig a = load_config(default_config(), [](const char*) -> const char* { return nullptr; });
    const RunConfig b;
    CHECK(a.arm_length == b.arm_length);
    CHECK(a.arm_mass == b.arm_mass);
    CHECK(a.com_ratio == b.com_ratio);
    CHECK(a.inertia_ratio == b.inertia_ratio);
    CHECK(a.damping == b.damping);
    CHECK(a.contact_offset == b.contact_offset);
    CHECK(a.contact_kappa == b.contact_kappa);
    CHECK(a.width_factor == b.width_factor);
    CHECK(a.q_max_lpm == b.q_max_lpm);
    CHECK(a.duty_deadband == b.duty_deadband);
    CHECK(a.flow_efficiency == b.flow_efficiency);
    CHECK(a.max_psi == b.max_psi);
    CHECK(a.cutoff_psi == b.cutoff_psi);
    CHECK(a.pressurization_time == b.pressurization_time);
    CHECK(a.noise.cv_flow == b.noise.cv_flow);
    CHECK(a.noise.cv_contact == b.noise.cv_contact);
    CHECK(a.noise.instability_gain == b.noise.instability_gain);
    CHECK(a.schedule.inflate_time == b.schedule.inflate_time);
    CHECK(a.schedule.hold_time == b.schedule.hold_time);
    CHECK(a.schedule.deflate_time == b.schedule.deflate_time);
    CHECK(a.force_pose_deg == b.force_pose_deg);
    CHECK(a.force_window == b.force_window);
    CHECK(a.dt == b.dt);
    CHECK(a.sample_rate == b.sample_rate);
    CHECK(a.capacity_smoothing == b.capacity_smoothing);
    CHECK(a.cell_counts == b.cell_counts);
    CHECK(a.battery_width_mm == b.battery_width_mm);
    CHECK(a.duties == b.duties);
    CHECK(a.terminal_fills == b.terminal_fills);
    CHECK(a.trials_per_condition == b.trials_per_condition);
    CHECK(a.master_seed == b.master_seed);
    CHECK(a.calibrate == b.calibrate);
    CHECK(a.theta_target_deg == b.theta_target_deg);
    CHECK(a.supply_psi == b.supply_psi);
    CHECK(a.safety_factor == b.safety_factor);
    CHECK(a.filter_cutoff == b.filter_cutoff);
    CHECK(a.sparc_f_max == b.sparc_f_max);
    CHECK(a.sparc_threshold == b.sparc_threshold);
    CHECK(a.sparc_pad_factor == b.sparc_pad_factor);
    CHECK(a.output_dir == b.output_dir);
}

TEST_CASE("configuration errors are explicit", "[config]") {
    const auto dir = scratch("config");
    const auto none = [](const char*) -> const char* { return nullptr; };
    spit(dir / "unknown.toml", "[arm]\nlenght_m = 0.2\n");
    CHECK_THROWS_WITH(load_config((dir / "unknown.toml").string(), none), ContainsSubstring("lenght_m"));
    spit(dir / "section.toml", "[pumps]\nq_max_lpm = 2.0\n");
    CHECK_THROWS_WITH(load_config((dir / "section.toml").string(), none), ContainsSubstring("[pumps]"));
    spit(dir / "malformed.toml", "[arm]\nmass_kg = 0.3\n\nlength_m = = 1\n");
    CHECK_THROWS_WITH(load_config((dir / "malformed.toml").string(), none), ContainsSubstring("line 4"));
    spit(dir / "type.toml", "[battery]\ntrials_per_condition = \"many\"\n");
    CHECK_THROWS_AS(load_config((dir / "type.toml").string(), none), ConfigError);
    spit(dir / "range.toml", "[analysis]\nfilter_cutoff_hz = 40.0\n");
    CHECK_THROWS_AS(load_config((dir / "range.toml").string(), none), ConfigError);
}

TEST_CASE("environment overrides the file", "[config]") {
    const std::map<std::string, std::string> env{{"POUCHSIM_BATTERY_MASTER_SEED", "7"},
                                                 {"POUCHSIM_BATTERY_DUTIES", "[50, 100]"},
                                                 {"POUCHSIM_OUTPUT_DIR", "elsewhere"}};
    const auto lookup = [&](const char* n) -> const char* {
        const auto it = env.find(n);
        return it == env.end() ? nullptr : it->second.c_str();
    };
    const RunConfig cfg = load_config(default_config(), lookup);
    CHECK(cfg.master_seed == 7);
    CHECK(cfg.duties == std::vector<double>{50.0, 100.0});
    CHECK(cfg.output_dir == "elsewhere");
    const auto bad = [](const char* n) -> const char* {
        return std::string(n) == "POUCHSIM_ARM_MASS_KG" ? "heavy" : nullptr;
    };
    CHECK_THROWS_WITH(load_config("", bad), ContainsSubstring("POUCHSIM_ARM_MASS_KG"));
}

TEST_CASE("CLI exit codes", "[cli]") {
    const auto dir = scratch("exit");
    CHECK(cli({"screen", "--assert-selection", "--out", dir.string()}).code == 0);
    CHECK(fs::exists(dir / "screening.csv"));
    CHECK(fs::exists(dir / "screening.md"));
    CHECK(cli({"screen", "--assert-selection", "--theta-target", "80", "--out", dir.string()}).code == 1);
    spit(dir / "bad.toml", "[arm]\nmass_kg = -1\n");
    CHECK(cli({"screen", "--config", (dir / "bad.toml").string()}).code == 2);
    CHECK(cli({"screen", "--config", (dir / "missing.toml").string()}).code == 2);
    CHECK(cli({"screen", "--bogus"}).code == 2);
    CHECK(cli({}).code == 2);
    CHECK(cli({"report", "--records", (dir / "nothing.jsonl").string(), "--out", dir.string()}).code == 2);
    spit(dir / "empty.jsonl", "");
    CHECK(cli({"report", "--records", (dir / "empty.jsonl").string(), "--out", dir.string()}).code == 2);
    CHECK(cli({"analyze", "--imu", (dir / "missing.csv").string(), "--marker", (dir / "missing.csv").string(),
               "--out", dir.string()})
              .code == 2);
    CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("CLI battery and report are deterministic", "[cli]") {
    const auto dir = scratch("battery");
    const auto cfg = small_config(dir);
    const auto a = cli({"battery", "--config", cfg.string(), "--out", (dir / "a").string()});
    const auto b = cli({"battery", "--config", cfg.string(), "--out", (dir / "b").string(), "--jobs", "2"});
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    const std::string records = slurp(dir / "a" / "records.jsonl");
    CHECK(records == slurp(dir / "b" / "records.jsonl"));
    CHECK(slurp(dir / "a" / "battery.md") == slurp(dir / "b" / "battery.md"));
    CHECK(std::count(records.begin(), records.end(), '\n') == 18);

    const auto c = cli({"battery", "--config", cfg.string(), "--out", (dir / "c").string(), "--seed", "99"});
    REQUIRE(c.code == 0);
    CHECK(slurp(dir / "c" / "records.jsonl") != records);

    REQUIRE(cli({"report", "--config", cfg.string(), "--out", (dir / "a").string(), "--export-csv"}).code == 0);
    REQUIRE(cli({"report", "--config", cfg.string(), "--out", (dir / "b").string()}).code == 0);
    int trajectory_files = 0;
    for (const auto& e : fs::directory_iterator(dir / "a")) {
        const auto name = e.path().filename().string();
        if (name.rfind("trajectories_", 0) == 0 && e.path().extension() == ".csv") ++trajectory_files;
        if (e.is_regular_file()) CHECK(slurp(e.path()) == slurp(dir / "b" / name));
    }
    CHECK(trajectory_files == 6);
    for (const char* f : {"report.md", "force_vs_duty.csv", "force_vs_duty.svg", "path_length.csv", "path_length.svg"}) {
        CHECK(fs::exists(dir / "a" / f));
    }

    // analyze on the exported files reproduces the stored metrics
    const auto stored = read_records((dir / "a" / "records.jsonl").string());
    const auto csv = dir / "a" / "csv";
    auto file = [&](std::size_t i, const char* kind) {
        return (csv / (cli_detail::file_stem(record_id(stored[i].record)) + kind)).string();
    };
    const auto run = cli({"analyze", "--imu", file(5, "_imu.csv"), "--marker", file(5, "_marker.csv"), "--imu",
                          file(6, "_imu.csv"), "--marker", file(6, "_marker.csv"), "--out", (dir / "an").string()});
    REQUIRE(run.code == 0);
    const json report = json::parse(slurp(dir / "an" / "analysis.json"));
    REQUIRE(report.at("trials").size() == 2);
    check_metrics_close(metrics_from_json(report.at("trials")[0]), *stored[5].metrics, 1e-9);
    CHECK(report.at("across_trials").contains("max_angle_deg"));
    CHECK(fs::exists(dir / "an" / "analysis.md"));
}

TEST_CASE("report handles a single record", "[cli]") {
    const auto dir = scratch("single");
    std::ostringstream one;
    write_records(one, {small_battery()[0]});
    spit(dir / "one.jsonl", one.str());
    const auto r = cli({"report", "--records", (dir / "one.jsonl").string(), "--out", dir.string()});
    REQUIRE(r.code == 0);
    CHECK(fs::exists(dir / "report.md"));
    int trajectory_files = 0;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.path().filename().string().rfind("trajectories_", 0) == 0 && e.path().extension() == ".csv") ++trajectory_files;
    }
    CHECK(trajectory_files == 1);
}
