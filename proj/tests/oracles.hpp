// Independent reference computations used by the test suites and the acceptance run.
#ifndef POUCHSIM_TESTS_ORACLES_HPP
#define POUCHSIM_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

namespace oracle {

constexpr double kPi = 3.14159265358979323846;

// ---------------------------------------------------------------------------
// Pouch cross-section traced as a polygon: two circular arcs of length lc
// meeting at the seams. Returns perimeter, enclosed area, height and chord.

struct Section {
    double perimeter, area, height, chord;
};

inline Section polygon_section(double lc, double t, int n = 20000) {
    if (t < 1e-12) return {2.0 * lc, 0.0, 0.0, lc};
    const double r = lc / (2.0 * t);
    const double c = r * std::cos(t);  // centre offset of each arc below/above the chord
    std::vector<double> xs, ys;
    // upper arc from right seam to left seam, centre at (0, -c)
    for (int i = 0; i <= n; ++i) {
        const double a = -t + 2.0 * t * i / n;
        xs.push_back(r * std::sin(a));
        ys.push_back(-c + r * std::cos(a));
    }
    // lower arc back, centre at (0, +c)
    for (int i = 1; i < n; ++i) {
        const double a = t - 2.0 * t * i / n;
        xs.push_back(r * std::sin(a));
        ys.push_back(c - r * std::cos(a));
    }
    double per = 0.0, area = 0.0, top = 0.0, bottom = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const std::size_t j = (i + 1) % xs.size();
        per += std::hypot(xs[j] - xs[i], ys[j] - ys[i]);
        area += xs[i] * ys[j] - xs[j] * ys[i];
        top = std::max(top, ys[i]);
        bottom = std::min(bottom, ys[i]);
    }
    const auto seam = static_cast<std::size_t>(n);
    return {per, 0.5 * std::abs(area), top - bottom, std::hypot(xs[seam] - xs[0], ys[seam] - ys[0])};
}

// Richardson extrapolation of the polygon values, removing the O(1/n^2) chord error.
inline Section refined_section(double lc, double t) {
    const Section a = polygon_section(lc, t, 4000);
    const Section b = polygon_section(lc, t, 8000);
    auto r = [](double x, double y) { return (4.0 * y - x) / 3.0; };
    return {r(a.perimeter, b.perimeter), r(a.area, b.area), b.height, b.chord};
}

// ---------------------------------------------------------------------------
// SPARC by direct summation of the DFT at each bin.

inline double sparc_naive(const std::vector<double>& v, double fs, double threshold, double f_max, int pad) {
    std::size_t nfft = 1;
    while (nfft < static_cast<std::size_t>(pad) * v.size()) nfft <<= 1;
    const double df = fs / static_cast<double>(nfft);
    double dc = 0.0;
    for (double x : v) dc += x;
    std::vector<double> mag;
    std::vector<double> freq;
    for (std::size_t k = 0; k <= nfft / 2; ++k) {
        const double f = df * static_cast<double>(k);
        if (f > f_max + 1e-12) break;
        long double re = 0.0L, im = 0.0L;
        for (std::size_t n = 0; n < v.size(); ++n) {
            const long double ang = -2.0L * 3.14159265358979323846264338L * static_cast<long double>(k) *
                                    static_cast<long double>(n) / static_cast<long double>(nfft);
            re += v[n] * std::cos(ang);
            im += v[n] * std::sin(ang);
        }
        mag.push_back(static_cast<double>(std::sqrt(re * re + im * im)) / std::abs(dc));
        freq.push_back(f);
    }
    std::size_t last = 0;
    for (std::size_t k = 0; k < mag.size(); ++k) {
        if (mag[k] >= threshold) last = k;
    }
    if (last == 0) return 0.0;
    const double fc = freq[last];
    double arc = 0.0;
    for (std::size_t k = 1; k <= last; ++k) {
        arc += std::hypot((freq[k] - freq[k - 1]) / fc, mag[k] - mag[k - 1]);
    }
    return -arc;
}

/// Minimum-jerk speed profile over [0, duration] sampled at fs, peak scaled to `peak`.
inline std::vector<double> min_jerk_speed(double duration, double fs, double peak = 1.0) {
    const int n = static_cast<int>(std::lround(duration * fs)) + 1;
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double s = static_cast<double>(i) / (n - 1);
        v[static_cast<std::size_t>(i)] = peak * 16.0 * s * s * (1.0 - s) * (1.0 - s);
    }
    return v;
}

// ---------------------------------------------------------------------------
// Two-way ANOVA straight from the definitions: every sum of squares is a sum
// of squared deviations of the relevant means, no computational shortcuts.

struct Anova {
    double ss_a, ss_b, ss_ab, ss_e, ss_t;
    double df_a, df_b, df_ab, df_e;
    double f_a, f_b, f_ab;
};

inline Anova anova_definitional(const std::vector<std::vector<std::vector<double>>>& y) {
    const std::size_t a = y.size(), b = y[0].size(), r = y[0][0].size();
    double grand = 0.0;
    for (auto& row : y)
        for (auto& cell : row)
            for (double v : cell) grand += v;
    grand /= static_cast<double>(a * b * r);
    std::vector<double> ma(a, 0.0), mb(b, 0.0);
    std::vector<std::vector<double>> mc(a, std::vector<double>(b, 0.0));
    for (std::size_t i = 0; i < a; ++i)
        for (std::size_t j = 0; j < b; ++j) {
            for (double v : y[i][j]) mc[i][j] += v / static_cast<double>(r);
        }
    for (std::size_t i = 0; i < a; ++i)
        for (std::size_t j = 0; j < b; ++j) {
            ma[i] += mc[i][j] / static_cast<double>(b);
            mb[j] += mc[i][j] / static_cast<double>(a);
        }
    Anova o{};
    for (std::size_t i = 0; i < a; ++i)
        for (std::size_t j = 0; j < b; ++j)
            for (double v : y[i][j]) {
                o.ss_a += (ma[i] - grand) * (ma[i] - grand);
                o.ss_b += (mb[j] - grand) * (mb[j] - grand);
                const double inter = mc[i][j] - ma[i] - mb[j] + grand;
                o.ss_ab += inter * inter;
                o.ss_e += (v - mc[i][j]) * (v - mc[i][j]);
                o.ss_t += (v - grand) * (v - grand);
            }
    o.df_a = static_cast<double>(a - 1);
    o.df_b = static_cast<double>(b - 1);
    o.df_ab = o.df_a * o.df_b;
    o.df_e = static_cast<double>(a * b * (r - 1));
    const double mse = o.ss_e / o.df_e;
    o.f_a = o.ss_a / o.df_a / mse;
    o.f_b = o.ss_b / o.df_b / mse;
    o.f_ab = o.ss_ab / o.df_ab / mse;
    return o;
}

// ---------------------------------------------------------------------------
// F distribution CDF by quadrature of its density.

inline double f_pdf(double x, double d1, double d2) {
    if (x <= 0.0) return 0.0;
    const double lg = std::lgamma(0.5 * (d1 + d2)) - std::lgamma(0.5 * d1) - std::lgamma(0.5 * d2);
    const double logp = lg + 0.5 * d1 * std::log(d1 / d2) + (0.5 * d1 - 1.0) * std::log(x) -
                        0.5 * (d1 + d2) * std::log1p(d1 * x / d2);
    return std::exp(logp);
}

inline double f_cdf_quadrature(double x, double d1, double d2) {
    if (x <= 0.0) return 0.0;
    boost::math::quadrature::tanh_sinh<double> ts;
    // integrate the smaller tail for accuracy
    const double lower = ts.integrate([&](double u) { return f_pdf(u, d1, d2); }, 0.0, x, 1e-14);
    if (lower < 0.5) return lower;
    const double upper = ts.integrate([&](double u) { return f_pdf(u, d1, d2); }, x,
                                      std::numeric_limits<double>::infinity(), 1e-14);
    return 1.0 - upper;
}

// ---------------------------------------------------------------------------
// Studentized range tail probability by simulation.

struct MonteCarlo {
    double p;
    double standard_error;
};

inline MonteCarlo studentized_range_sf_mc(double q, int k, double df, long draws, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    std::chi_squared_distribution<double> chi(df);
    long hits = 0;
    for (long i = 0; i < draws; ++i) {
        double lo = 1e300, hi = -1e300;
        for (int g = 0; g < k; ++g) {
            const double v = z(rng);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        const double s = std::sqrt(chi(rng) / df);
        if ((hi - lo) / s >= q) ++hits;
    }
    const double p = static_cast<double>(hits) / static_cast<double>(draws);
    return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(draws))};
}

} // namespace oracle

#endif // POUCHSIM_TESTS_ORACLES_HPP
