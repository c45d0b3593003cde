#ifndef POUCHSIM_SPARC_HPP
#define POUCHSIM_SPARC_HPP

#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>
#include <vector>

#include <unsupported/Eigen/FFT>

namespace pouchsim {

struct SpeedProfile {
    double sample_rate = 60.0;
    std::vector<double> values;
};

struct SparcOptions {
    double amp_threshold = 0.05;
    double f_max = 10.0;
    int pad_factor = 4;  // transform length is the next power of two >= pad_factor * N
};

struct SmoothnessTriple {
    std::optional<double> s_x, s_y, s_z;  // empty when the axis never moves
};

inline std::size_t sparc_transform_length(std::size_t n, int pad_factor) {
    std::size_t m = 1;
    const std::size_t want = n * static_cast<std::size_t>(pad_factor);
    while (m < want) m <<= 1;
    return m;
}

/// Magnitude spectrum of the zero-padded profile normalised by its DC value.
inline std::vector<double> normalized_spectrum(const std::vector<double>& v, std::size_t nfft) {
    std::vector<double> in(nfft, 0.0);
    std::copy(v.begin(), v.end(), in.begin());
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> out;
    fft.fwd(out, in);
    std::vector<double> mag(nfft);
    const double dc = std::abs(out[0]);
    for (std::size_t i = 0; i < nfft; ++i) mag[i] = std::abs(out[i]) / dc;
    return mag;
}

/// Spectral arc length: negative arc length of the normalised magnitude
/// spectrum over [0, fc], where fc is the highest frequency below f_max whose
/// magnitude still reaches the threshold.
inline double sparc(const SpeedProfile& profile, const SparcOptions& opt = {}) {
    const auto& v = profile.values;
    if (v.size() < 4) throw std::invalid_argument("sparc: need at least 4 samples");
    if (!(profile.sample_rate > 0.0)) throw std::invalid_argument("sparc: sample rate must be positive");
    double peak = 0.0;
    for (double x : v) {
        if (!(x >= 0.0) || !std::isfinite(x)) throw std::invalid_argument("sparc: speeds must be finite and >= 0");
        peak = std::max(peak, x);
    }
    if (peak <= 0.0) throw std::domain_error("sparc: all-zero profile, smoothness undefined");

    const std::size_t nfft = sparc_transform_length(v.size(), opt.pad_factor);
    const std::vector<double> mag = normalized_spectrum(v, nfft);
    const double df = profile.sample_rate / static_cast<double>(nfft);

    std::size_t last_band = 0;
    while (last_band + 1 < nfft / 2 + 1 && (last_band + 1) * df <= opt.f_max) ++last_band;
    std::size_t cut = 0;
    for (std::size_t i = 0; i <= last_band; ++i) {
        if (mag[i] >= opt.amp_threshold) cut = i;
    }
    if (cut == 0) return 0.0;
    const double span = static_cast<double>(cut) * df;
    double arc = 0.0;
    for (std::size_t i = 1; i <= cut; ++i) {
        const double dx = df / span;
        const double dy = mag[i] - mag[i - 1];
        arc += std::sqrt(dx * dx + dy * dy);
    }
    return -arc;
}

/// SPARC of |signal| or nothing when the signal is identically zero.
inline std::optional<double> sparc_if_moving(const std::vector<double>& signal, double fs, const SparcOptions& opt = {}) {
    SpeedProfile p{fs, {}};
    p.values.reserve(signal.size());
    bool moving = false;
    for (double x : signal) {
        p.values.push_back(std::abs(x));
        moving = moving || x != 0.0;
    }
    if (!moving || p.values.size() < 4) return std::nullopt;
    return sparc(p, opt);
}

inline SmoothnessTriple sparc_per_axis(const std::vector<double>& gx, const std::vector<double>& gy,
                                       const std::vector<double>& gz, double fs, const SparcOptions& opt = {}) {
    return {sparc_if_moving(gx, fs, opt), sparc_if_moving(gy, fs, opt), sparc_if_moving(gz, fs, opt)};
}

} // namespace pouchsim

#endif // POUCHSIM_SPARC_HPP
