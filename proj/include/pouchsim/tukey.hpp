#ifndef POUCHSIM_TUKEY_HPP
#define POUCHSIM_TUKEY_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

namespace pouchsim {

namespace detail {

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

inline double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * 3.14159265358979323846); }

/// P(range of k standard normals <= w).
inline double normal_range_cdf(double w, int k) {
    if (w <= 0.0) return 0.0;
    using GL = boost::math::quadrature::gauss<double, 20>;
    auto f = [&](double z) {
        const double inner = normal_cdf(z) - normal_cdf(z - w);
        return normal_pdf(z) * std::pow(std::max(inner, 0.0), k - 1);
    };
    double total = 0.0;
    for (int panel = -9; panel < 9; ++panel) {
        const double a = std::max(-8.5, static_cast<double>(panel));
        const double b = std::min(8.5, static_cast<double>(panel + 1));
        if (b > a) total += GL::integrate(f, a, b);
    }
    return std::min(1.0, k * total);
}

} // namespace detail

/// CDF of the studentized range for k groups and df error degrees of freedom.
inline double studentized_range_cdf(double q, int k, double df) {
    if (k < 2) throw std::invalid_argument("studentized_range_cdf: need k >= 2");
    if (!(df > 0.0)) throw std::invalid_argument("studentized_range_cdf: df must be positive");
    if (q <= 0.0) return 0.0;
    if (std::isinf(q)) return 1.0;
    // s = chi_df / sqrt(df) written as s = exp(u); log-density of u
    const double log_norm = 0.5 * df * std::log(0.5 * df) - std::lgamma(0.5 * df) + std::log(2.0);
    auto integrand = [&](double u) {
        const double s = std::exp(u);
        const double log_g = log_norm + df * u - 0.5 * df * s * s;
        return std::exp(log_g) * detail::normal_range_cdf(q * s, k);
    };
    const double spread = 1.0 / std::sqrt(df);
    const double lo = -std::max(36.0 / df + 0.5, 6.0 * spread);
    const double hi = std::max(6.0 * spread, 0.25);
    const int panels = std::max(2, static_cast<int>(std::ceil((hi - lo) / spread)));
    using GL = boost::math::quadrature::gauss<double, 64>;
    double total = 0.0;
    for (int i = 0; i < panels; ++i) {
        const double a = lo + (hi - lo) * i / panels;
        const double b = lo + (hi - lo) * (i + 1) / panels;
        total += GL::integrate(integrand, a, b);
    }
    return std::clamp(total, 0.0, 1.0);
}

struct TukeyPair {
    std::size_t i;
    std::size_t j;
    double mean_difference;
    double q;
    double p;
};

/// Pairwise Tukey HSD comparisons for equal group sizes.
inline std::vector<TukeyPair> tukey_hsd(const std::vector<double>& group_means, double mse, double n_per_group,
                                        double df_error) {
    if (group_means.size() < 2) throw std::invalid_argument("tukey_hsd: need at least two groups");
    if (!(mse > 0.0)) throw std::invalid_argument("tukey_hsd: mse must be positive");
    if (!(n_per_group > 0.0 && df_error > 0.0)) throw std::invalid_argument("tukey_hsd: sizes must be positive");
    const int k = static_cast<int>(group_means.size());
    const double se = std::sqrt(mse / n_per_group);
    std::vector<TukeyPair> out;
    for (std::size_t i = 0; i < group_means.size(); ++i) {
        for (std::size_t j = i + 1; j < group_means.size(); ++j) {
            const double diff = group_means[i] - group_means[j];
            const double q = std::abs(diff) / se;
            out.push_back({i, j, diff, q, 1.0 - studentized_range_cdf(q, k, df_error)});
        }
    }
    return out;
}

} // namespace pouchsim

#endif // POUCHSIM_TUKEY_HPP
