#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "fansim/experiment.hpp"

namespace testutil {

// Direct DFT probe at one frequency; deliberately brute-force so spectral
// assertions do not depend on the library's FFT/Goertzel paths. Returns the
// amplitude of a sinusoid at freq_hz (unit-amplitude tone -> ~1).
inline double dft_amplitude(std::span<const float> x, double rate, double freq_hz) {
    double re = 0.0, im = 0.0;
    const double w = 2.0 * std::numbers::pi * freq_hz / rate;
    for (std::size_t n = 0; n < x.size(); ++n) {
        re += x[n] * std::cos(w * static_cast<double>(n));
        im -= x[n] * std::sin(w * static_cast<double>(n));
    }
    const double scale = 2.0 / static_cast<double>(x.size());
    return std::sqrt(re * re + im * im) * scale;
}

// Brute-force peak search over a frequency grid.
inline double peak_frequency(std::span<const float> x, double rate, double f_lo, double f_hi,
                             double step) {
    double best_f = f_lo;
    double best_a = -1.0;
    for (double f = f_lo; f <= f_hi; f += step) {
        const double a = dft_amplitude(x, rate, f);
        if (a > best_a) {
            best_a = a;
            best_f = f;
        }
    }
    return best_f;
}

inline double rms(std::span<const float> x) {
    double acc = 0.0;
    for (float v : x) acc += static_cast<double>(v) * static_cast<double>(v);
    return std::sqrt(acc / static_cast<double>(x.size()));
}

// Middle 60% of a buffer, dodging filter edge transients.
inline std::span<const float> middle(const std::vector<float>& x) {
    const std::size_t skip = x.size() / 5;
    return std::span<const float>(x).subspan(skip, x.size() - 2 * skip);
}

inline std::vector<float> make_tone(double freq_hz, double rate, double seconds,
                                    double amplitude = 1.0) {
    const auto n = static_cast<std::size_t>(rate * seconds);
    std::vector<float> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = static_cast<float>(
            amplitude * std::sin(2.0 * std::numbers::pi * freq_hz * static_cast<double>(i) / rate));
    }
    return x;
}

// Compact parameter set (one-second rotor transit, half-second dwell) so
// end-to-end trials stay fast in unit tests.
inline fansim::ExperimentConfig fast_config(fansim::Scheme scheme) {
    fansim::ExperimentConfig cfg;
    cfg.fan.blade_count = 7;
    cfg.fan.rpm_min = 1000.0;
    cfg.fan.rpm_max = 4500.0;
    cfg.fan.slew_rate = 250.0;
    cfg.fan.ref_rpm = 1000.0;
    cfg.fan.ref_amplitude = 0.02;

    cfg.modulation.scheme = scheme;
    cfg.modulation.rpm_zero = 4000.0;
    cfg.modulation.rpm_one = 4250.0;
    cfg.modulation.symbol_duration = 0.5;
    cfg.modulation.carrier_band = {400.0, 600.0};

    cfg.channel.sample_rate = 44100.0;
    cfg.channel.distance_m = 1.0;
    cfg.channel.harmonic_count = 3;
    cfg.channel.harmonic_rolloff = 0.35;
    cfg.channel.broadband_level = 0.0;
    cfg.channel.ambient_noise_amplitude = 0.0;
    cfg.channel.noise_seed = 1;

    cfg.demod.target_rate = 2000.0;
    cfg.demod.window_length = 0.3;
    cfg.demod.hop = 0.05;
    cfg.demod.sync_threshold = 0.75;

    fansim::finalize_demod(cfg);
    cfg.validate();
    return cfg;
}

}  // namespace testutil
