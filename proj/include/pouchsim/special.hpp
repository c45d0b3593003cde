#ifndef POUCHSIM_SPECIAL_HPP
#define POUCHSIM_SPECIAL_HPP

#include <cmath>
#include <stdexcept>

#include <boost/math/special_functions/beta.hpp>

namespace pouchsim {

/// CDF of the F distribution through the regularized incomplete beta function.
inline double f_cdf(double x, double df1, double df2) {
    if (!(df1 > 0.0 && df2 > 0.0)) throw std::domain_error("f_cdf: degrees of freedom must be positive");
    if (std::isnan(x)) throw std::domain_error("f_cdf: x is NaN");
    if (x <= 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    const double u = df1 * x;
    const double z = u / (u + df2);
    if (z < 0.5) return boost::math::ibeta(df1 / 2.0, df2 / 2.0, z);
    // z loses digits near 1, so go through the complement argument instead
    return 1.0 - boost::math::ibeta(df2 / 2.0, df1 / 2.0, df2 / (u + df2));
}

/// Upper tail 1 - F_cdf, evaluated without cancellation.
inline double f_sf(double x, double df1, double df2) {
    if (!(df1 > 0.0 && df2 > 0.0)) throw std::domain_error("f_sf: degrees of freedom must be positive");
    if (x <= 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    const double u = df1 * x;
    return boost::math::ibeta(df2 / 2.0, df1 / 2.0, df2 / (u + df2));
}

} // namespace pouchsim

#endif // POUCHSIM_SPECIAL_HPP
