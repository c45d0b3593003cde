#ifndef POUCHSIM_FILTER_HPP
#define POUCHSIM_FILTER_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "pouchsim/units.hpp"

namespace pouchsim {

/// Second-order Butterworth low-pass, bilinear transform with prewarping.
struct Biquad {
    double b0, b1, b2, a1, a2;

    static Biquad butterworth_lowpass(double fs, double fc) {
        if (!(fs > 0.0 && fc > 0.0)) throw std::invalid_argument("butterworth: rates must be positive");
        if (!(fc < fs / 2.0)) throw std::invalid_argument("butterworth: cutoff must be below Nyquist");
        const double k = std::tan(kPi * fc / fs);
        const double k2 = k * k;
        const double norm = 1.0 / (1.0 + std::sqrt(2.0) * k + k2);
        Biquad q;
        q.b0 = k2 * norm;
        q.b1 = 2.0 * q.b0;
        q.b2 = q.b0;
        q.a1 = 2.0 * (k2 - 1.0) * norm;
        q.a2 = (1.0 - std::sqrt(2.0) * k + k2) * norm;
        return q;
    }

    /// |H(e^jw)| of one pass at frequency f.
    static double magnitude(double fs, double fc, double f) {
        const double r = std::tan(kPi * f / fs) / std::tan(kPi * fc / fs);
        return 1.0 / std::sqrt(1.0 + r * r * r * r);
    }

    double dc_gain() const { return (b0 + b1 + b2) / (1.0 + a1 + a2); }

    /// Direct form II transposed, starting from the steady state for x[0].
    std::vector<double> run(const std::vector<double>& x) const {
        std::vector<double> y(x.size());
        if (x.empty()) return y;
        const double g = dc_gain();
        double z1 = (g - b0) * x[0];
        double z2 = (b2 - a2 * g) * x[0];
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double out = b0 * x[i] + z1;
            z1 = b1 * x[i] - a1 * out + z2;
            z2 = b2 * x[i] - a2 * out;
            y[i] = out;
        }
        return y;
    }
};

namespace detail {

inline std::vector<double> forward_backward(const Biquad& q, const std::vector<double>& signal) {
    const std::size_t n = signal.size();
    const std::size_t pad = std::min<std::size_t>(9, n - 1);
    std::vector<double> ext;
    ext.reserve(n + 2 * pad);
    for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * signal.front() - signal[i]);
    ext.insert(ext.end(), signal.begin(), signal.end());
    for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * signal.back() - signal[n - 1 - i]);

    std::vector<double> fwd = q.run(ext);
    std::reverse(fwd.begin(), fwd.end());
    std::vector<double> back = q.run(fwd);
    std::reverse(back.begin(), back.end());
    return std::vector<double>(back.begin() + static_cast<std::ptrdiff_t>(pad),
                               back.begin() + static_cast<std::ptrdiff_t>(pad + n));
}

} // namespace detail

/// Forward-backward filtering with odd extension at both ends, so the output
/// has no phase lag and the magnitude response is squared. The pass is
/// averaged with its mirror image so that the start-up transients at the two
/// ends match and reversing the input exactly reverses the output.
inline std::vector<double> butterworth2_zero_lag(const std::vector<double>& signal, double fs, double fc = 5.0) {
    const Biquad q = Biquad::butterworth_lowpass(fs, fc);
    const std::size_t n = signal.size();
    if (n < 2) return signal;
    const std::vector<double> a = detail::forward_backward(q, signal);
    std::vector<double> r(signal.rbegin(), signal.rend());
    const std::vector<double> b = detail::forward_backward(q, r);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = 0.5 * (a[i] + b[n - 1 - i]);
    return out;
}

} // namespace pouchsim

#endif // POUCHSIM_FILTER_HPP
