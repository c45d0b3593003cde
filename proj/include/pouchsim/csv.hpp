#ifndef POUCHSIM_CSV_HPP
#define POUCHSIM_CSV_HPP

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pouchsim/metrics.hpp"

namespace pouchsim {

inline const char* const kImuHeader = "t,gx,gy,gz,ax,ay,az";
inline const char* const kMarkerHeader = "t,x,y";

class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trim(std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
    std::size_t i = 0;
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    return s.substr(i);
}

inline std::vector<std::string> split_commas(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

inline std::vector<std::vector<double>> read_table(std::istream& in, const std::string& expected_header,
                                                   const std::string& what) {
    std::string line;
    if (!std::getline(in, line) || trim(line).empty()) {
        throw SchemaError(what + ": empty file, expected header '" + expected_header + "'");
    }
    const auto header = split_commas(trim(line));
    const auto want = split_commas(expected_header);
    if (header != want) throw SchemaError(what + ": row 1: header must be '" + expected_header + "'");
    std::vector<std::vector<double>> rows;
    std::size_t row_no = 1;
    while (std::getline(in, line)) {
        ++row_no;
        if (trim(line).empty()) continue;
        const auto cells = split_commas(trim(line));
        if (cells.size() != want.size()) {
            throw SchemaError(what + ": row " + std::to_string(row_no) + ": expected " + std::to_string(want.size()) +
                              " columns, found " + std::to_string(cells.size()));
        }
        std::vector<double> vals(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const char* begin = cells[c].c_str();
            char* end = nullptr;
            errno = 0;
            vals[c] = std::strtod(begin, &end);
            if (cells[c].empty() || end != begin + cells[c].size() || errno == ERANGE || !std::isfinite(vals[c])) {
                throw SchemaError(what + ": row " + std::to_string(row_no) + ", column '" + want[c] +
                                  "': not a finite number: '" + cells[c] + "'");
            }
        }
        if (!rows.empty() && !(vals[0] > rows.back()[0])) {
            throw SchemaError(what + ": row " + std::to_string(row_no) + ", column 't': timestamps must increase");
        }
        rows.push_back(std::move(vals));
    }
    if (rows.size() < 2) throw SchemaError(what + ": need at least two data rows");
    return rows;
}

inline std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open '" + path + "'");
    return in;
}

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace detail

inline std::vector<ImuSample> read_imu_csv(std::istream& in, const std::string& name = "imu csv") {
    std::vector<ImuSample> out;
    for (const auto& r : detail::read_table(in, kImuHeader, name)) out.push_back({r[0], r[1], r[2], r[3], r[4], r[5], r[6]});
    return out;
}

inline std::vector<MarkerSample> read_marker_csv(std::istream& in, const std::string& name = "marker csv") {
    std::vector<MarkerSample> out;
    for (const auto& r : detail::read_table(in, kMarkerHeader, name)) out.push_back({r[0], r[1], r[2]});
    return out;
}

inline std::vector<ImuSample> read_imu_csv(const std::string& path) {
    auto in = detail::open_input(path);
    return read_imu_csv(in, path);
}

inline std::vector<MarkerSample> read_marker_csv(const std::string& path) {
    auto in = detail::open_input(path);
    return read_marker_csv(in, path);
}

inline void write_imu_csv(std::ostream& out, const std::vector<ImuSample>& rows) {
    out << kImuHeader << '\n';
    for (const auto& r : rows) {
        out << detail::fmt17(r.t) << ',' << detail::fmt17(r.gx) << ',' << detail::fmt17(r.gy) << ','
            << detail::fmt17(r.gz) << ',' << detail::fmt17(r.ax) << ',' << detail::fmt17(r.ay) << ','
            << detail::fmt17(r.az) << '\n';
    }
}

inline void write_marker_csv(std::ostream& out, const std::vector<MarkerSample>& rows) {
    out << kMarkerHeader << '\n';
    for (const auto& r : rows) out << detail::fmt17(r.t) << ',' << detail::fmt17(r.x) << ',' << detail::fmt17(r.y) << '\n';
}

/// Largest relative deviation of the sampling intervals from their mean.
template <typename Sample>
double timestamp_jitter(const std::vector<Sample>& s) {
    const double mean_dt = (s.back().t - s.front().t) / static_cast<double>(s.size() - 1);
    double worst = 0.0;
    for (std::size_t i = 1; i < s.size(); ++i) worst = std::max(worst, std::abs((s[i].t - s[i - 1].t) - mean_dt) / mean_dt);
    return worst;
}

namespace detail {

template <typename Sample, typename Lerp>
std::vector<Sample> resample_uniform(const std::vector<Sample>& s, double t0, double dt, std::size_t n, Lerp lerp) {
    std::vector<Sample> out;
    out.reserve(n);
    std::size_t j = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = t0 + static_cast<double>(i) * dt;
        while (j + 2 < s.size() && s[j + 1].t < t) ++j;
        const double a = std::clamp((t - s[j].t) / (s[j + 1].t - s[j].t), 0.0, 1.0);
        Sample r = lerp(s[j], s[j + 1], a);
        r.t = t;
        out.push_back(r);
    }
    return out;
}

} // namespace detail

struct IngestResult {
    MotionLog log;
    std::vector<std::string> warnings;
};

/// Pairs IMU and marker streams on a common uniform grid. Streams whose
/// intervals deviate by more than 1% are resampled by linear interpolation.
inline IngestResult ingest_motion(std::vector<ImuSample> imu, std::vector<MarkerSample> marker) {
    if (imu.size() < 2 || marker.size() < 2) throw SchemaError("ingest: need at least two samples per stream");
    IngestResult r;
    const bool aligned = imu.size() == marker.size() &&
                         std::equal(imu.begin(), imu.end(), marker.begin(),
                                    [](const ImuSample& a, const MarkerSample& b) { return a.t == b.t; });
    const bool jitter = timestamp_jitter(imu) > 0.01 || timestamp_jitter(marker) > 0.01;
    if (aligned && !jitter) {
        r.log.sample_rate = static_cast<double>(imu.size() - 1) / (imu.back().t - imu.front().t);
        r.log.imu = std::move(imu);
        r.log.marker = std::move(marker);
        return r;
    }
    if (jitter) r.warnings.push_back("timestamps deviate by more than 1% from a uniform grid; resampled");
    if (!aligned) r.warnings.push_back("IMU and marker timestamps differ; both resampled to a common grid");
    const double t0 = std::max(imu.front().t, marker.front().t);
    const double t1 = std::min(imu.back().t, marker.back().t);
    if (!(t1 > t0)) throw SchemaError("ingest: IMU and marker streams do not overlap in time");
    const double dt = (imu.back().t - imu.front().t) / static_cast<double>(imu.size() - 1);
    const auto n = static_cast<std::size_t>(std::floor((t1 - t0) / dt + 1e-9)) + 1;
    r.log.sample_rate = 1.0 / dt;
    r.log.imu = detail::resample_uniform(imu, t0, dt, n, [](const ImuSample& a, const ImuSample& b, double u) {
        auto l = [u](double p, double q) { return p + u * (q - p); };
        return ImuSample{0.0, l(a.gx, b.gx), l(a.gy, b.gy), l(a.gz, b.gz), l(a.ax, b.ax), l(a.ay, b.ay), l(a.az, b.az)};
    });
    r.log.marker = detail::resample_uniform(marker, t0, dt, n, [](const MarkerSample& a, const MarkerSample& b, double u) {
        return MarkerSample{0.0, a.x + u * (b.x - a.x), a.y + u * (b.y - a.y)};
    });
    return r;
}

} // namespace pouchsim

#endif // POUCHSIM_CSV_HPP
