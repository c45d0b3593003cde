#ifndef POUCHSIM_ANOVA_HPP
#define POUCHSIM_ANOVA_HPP

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "pouchsim/special.hpp"

namespace pouchsim {

struct AnovaEffect {
    double sum_sq = 0.0;
    double df = 0.0;
    double mean_sq = 0.0;
    std::optional<double> f;  // empty when the error mean square is zero
    std::optional<double> p;
};

struct AnovaTable {
    AnovaEffect factor_a;
    AnovaEffect factor_b;
    AnovaEffect interaction;
    AnovaEffect error;
    double total_sum_sq = 0.0;
    std::size_t n = 0;
};

/// data[i][j][r]: level i of factor A, level j of factor B, replicate r.
using BalancedData = std::vector<std::vector<std::vector<double>>>;

inline std::size_t replicates_of(const BalancedData& data) {
    if (data.size() < 2) throw std::invalid_argument("two_way_anova: factor A needs at least two levels");
    const std::size_t b = data[0].size();
    if (b < 2) throw std::invalid_argument("two_way_anova: factor B needs at least two levels");
    const std::size_t r = data[0][0].size();
    if (r < 2) throw std::invalid_argument("two_way_anova: need at least two replicates per cell");
    for (const auto& row : data) {
        if (row.size() != b) throw std::invalid_argument("two_way_anova: unbalanced design (factor B levels)");
        for (const auto& cell : row) {
            if (cell.size() != r) throw std::invalid_argument("two_way_anova: unbalanced design (replicates)");
        }
    }
    return r;
}

/// Two-way ANOVA with interaction for a balanced design.
inline AnovaTable two_way_anova(const BalancedData& data) {
    const std::size_t r = replicates_of(data);
    const std::size_t na = data.size();
    const std::size_t nb = data[0].size();
    const double n = static_cast<double>(na * nb * r);

    double grand = 0.0;
    for (const auto& row : data)
        for (const auto& cell : row)
            for (double x : cell) grand += x;
    grand /= n;

    // means of deviations from the grand mean keep the sums well conditioned
    std::vector<std::vector<double>> cell_mean(na, std::vector<double>(nb, 0.0));
    std::vector<double> mean_a(na, 0.0), mean_b(nb, 0.0);
    for (std::size_t i = 0; i < na; ++i) {
        for (std::size_t j = 0; j < nb; ++j) {
            double s = 0.0;
            for (double x : data[i][j]) s += x - grand;
            cell_mean[i][j] = s / static_cast<double>(r);
            mean_a[i] += cell_mean[i][j] / static_cast<double>(nb);
            mean_b[j] += cell_mean[i][j] / static_cast<double>(na);
        }
    }

    AnovaTable t;
    t.n = na * nb * r;
    double ss_a = 0.0, ss_b = 0.0, ss_ab = 0.0, ss_e = 0.0, ss_t = 0.0;
    for (std::size_t i = 0; i < na; ++i) ss_a += mean_a[i] * mean_a[i];
    for (std::size_t j = 0; j < nb; ++j) ss_b += mean_b[j] * mean_b[j];
    ss_a *= static_cast<double>(nb * r);
    ss_b *= static_cast<double>(na * r);
    for (std::size_t i = 0; i < na; ++i) {
        for (std::size_t j = 0; j < nb; ++j) {
            const double inter = cell_mean[i][j] - mean_a[i] - mean_b[j];
            ss_ab += static_cast<double>(r) * inter * inter;
            for (double x : data[i][j]) {
                const double dev = x - grand;
                ss_e += (dev - cell_mean[i][j]) * (dev - cell_mean[i][j]);
                ss_t += dev * dev;
            }
        }
    }

    t.factor_a = {ss_a, static_cast<double>(na - 1), 0.0, {}, {}};
    t.factor_b = {ss_b, static_cast<double>(nb - 1), 0.0, {}, {}};
    t.interaction = {ss_ab, static_cast<double>((na - 1) * (nb - 1)), 0.0, {}, {}};
    t.error = {ss_e, static_cast<double>(na * nb * (r - 1)), 0.0, {}, {}};
    t.total_sum_sq = ss_t;
    for (AnovaEffect* e : {&t.factor_a, &t.factor_b, &t.interaction, &t.error}) e->mean_sq = e->sum_sq / e->df;
    if (t.error.mean_sq > 0.0) {
        for (AnovaEffect* e : {&t.factor_a, &t.factor_b, &t.interaction}) {
            e->f = e->mean_sq / t.error.mean_sq;
            e->p = f_sf(*e->f, e->df, t.error.df);
        }
    }
    return t;
}

} // namespace pouchsim

#endif // POUCHSIM_ANOVA_HPP
