#pragma once

#include <complex>
#include <cstdint>
#include <vector>

// Small self-contained DSP toolkit: Kaiser FIR design, zero-phase filtering,
// arbitrary-ratio bandlimited resampling, radix-2 FFT, Goertzel tone probe,
// and a deterministic Gaussian generator. Everything operates on real
// float sample buffers; design math is done in double.
namespace fansim::dsp {

// ---------------------------------------------------------------------------
// FIR design (Kaiser window method)

// Kaiser beta for a given stopband attenuation (dB).
double kaiser_beta(double atten_db);

// Number of taps needed for the given attenuation and normalized transition
// width (Hz / sample_rate). Always returns an odd count.
int kaiser_tap_count(double atten_db, double transition_hz, double sample_rate);

// Linear-phase lowpass, cutoff in Hz. Odd tap count, unity DC gain.
std::vector<double> design_lowpass(double cutoff_hz, double sample_rate,
                                   double atten_db, double transition_hz);

// Linear-phase bandpass with cutoffs (low_hz, high_hz).
std::vector<double> design_bandpass(double low_hz, double high_hz, double sample_rate,
                                    double atten_db, double transition_hz);

// Convolve and drop the (ntaps-1)/2 group delay so output aligns with input.
// Output has the same length; edges see an implicit zero pad.
std::vector<float> filter_zero_phase(const std::vector<float>& x,
                                     const std::vector<double>& taps);

// ---------------------------------------------------------------------------
// Resampling

// Bandlimited resample from src_rate to dst_rate (any positive ratio with
// dst_rate <= src_rate). Anti-alias cutoff sits at 0.45*dst_rate with the
// stopband from 0.55*dst_rate, so content below 0.45*dst_rate passes flat.
std::vector<float> resample(const std::vector<float>& x, double src_rate, double dst_rate);

// ---------------------------------------------------------------------------
// Spectral tools

// In-place radix-2 FFT; size must be a power of two.
void fft(std::vector<std::complex<double>>& data);

// Next power of two >= n.
std::size_t next_pow2(std::size_t n);

// Power of a single frequency in x (Goertzel). Returns |X(f)|^2 normalized so
// a unit-amplitude sinusoid at f yields ~0.25 (coherent gain of a rectangular
// window), independent of n.
double goertzel_power(const float* x, std::size_t n, double freq_hz, double sample_rate);

// ---------------------------------------------------------------------------
// Deterministic randomness (stable across platforms, unlike <random> dists)

std::uint64_t splitmix64(std::uint64_t& state);

class GaussianRng {
public:
    explicit GaussianRng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

    // Standard normal via Box-Muller on splitmix64 uniforms.
    double next();

    // Uniform in [0, 1).
    double uniform();

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Second-order Butterworth sections used to band-limit synthesized noise.
struct Biquad {
    double b0 = 1, b1 = 0, b2 = 0, a1 = 0, a2 = 0;
    double z1 = 0, z2 = 0;

    double process(double x) {
        double y = b0 * x + z1;
        z1 = b1 * x - a1 * y + z2;
        z2 = b2 * x - a2 * y;
        return y;
    }
};

Biquad butterworth_lowpass(double cutoff_hz, double sample_rate);
Biquad butterworth_highpass(double cutoff_hz, double sample_rate);

}  // namespace fansim::dsp
