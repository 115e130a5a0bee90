#include "fansim/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fansim::dsp {

namespace {

constexpr double kPi = std::numbers::pi;

// Zeroth-order modified Bessel function of the first kind (series expansion).
double bessel_i0(double x) {
    double sum = 1.0;
    double term = 1.0;
    for (int k = 1; k < 64; ++k) {
        term *= (x / (2.0 * k)) * (x / (2.0 * k));
        sum += term;
        if (term < 1e-16 * sum) break;
    }
    return sum;
}

double sinc(double x) {
    if (std::abs(x) < 1e-12) return 1.0;
    return std::sin(kPi * x) / (kPi * x);
}

std::vector<double> kaiser_window(int ntaps, double beta) {
    std::vector<double> w(ntaps);
    const double denom = bessel_i0(beta);
    const double half = (ntaps - 1) / 2.0;
    for (int i = 0; i < ntaps; ++i) {
        double r = (i - half) / half;
        w[i] = bessel_i0(beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / denom;
    }
    return w;
}

}  // namespace

double kaiser_beta(double atten_db) {
    if (atten_db > 50.0) return 0.1102 * (atten_db - 8.7);
    if (atten_db >= 21.0) return 0.5842 * std::pow(atten_db - 21.0, 0.4) + 0.07886 * (atten_db - 21.0);
    return 0.0;
}

int kaiser_tap_count(double atten_db, double transition_hz, double sample_rate) {
    double delta_omega = 2.0 * kPi * transition_hz / sample_rate;
    int n = static_cast<int>(std::ceil((atten_db - 7.95) / (2.285 * delta_omega))) + 1;
    if (n % 2 == 0) ++n;
    return std::max(n, 5);
}

std::vector<double> design_lowpass(double cutoff_hz, double sample_rate,
                                   double atten_db, double transition_hz) {
    const int ntaps = kaiser_tap_count(atten_db, transition_hz, sample_rate);
    const double beta = kaiser_beta(atten_db);
    const auto window = kaiser_window(ntaps, beta);
    const double fc = cutoff_hz / sample_rate;  // cycles per sample
    const int mid = (ntaps - 1) / 2;

    std::vector<double> taps(ntaps);
    double sum = 0.0;
    for (int i = 0; i < ntaps; ++i) {
        taps[i] = 2.0 * fc * sinc(2.0 * fc * (i - mid)) * window[i];
        sum += taps[i];
    }
    for (double& t : taps) t /= sum;  // unity DC gain
    return taps;
}

std::vector<double> design_bandpass(double low_hz, double high_hz, double sample_rate,
                                    double atten_db, double transition_hz) {
    const int ntaps = kaiser_tap_count(atten_db, transition_hz, sample_rate);
    const double beta = kaiser_beta(atten_db);
    const auto window = kaiser_window(ntaps, beta);
    const double f1 = low_hz / sample_rate;
    const double f2 = high_hz / sample_rate;
    const int mid = (ntaps - 1) / 2;

    std::vector<double> taps(ntaps);
    for (int i = 0; i < ntaps; ++i) {
        int k = i - mid;
        taps[i] = (2.0 * f2 * sinc(2.0 * f2 * k) - 2.0 * f1 * sinc(2.0 * f1 * k)) * window[i];
    }
    // Normalize gain at band center.
    const double fm = 0.5 * (f1 + f2);
    double gain_re = 0.0;
    for (int i = 0; i < ntaps; ++i) gain_re += taps[i] * std::cos(2.0 * kPi * fm * (i - mid));
    if (std::abs(gain_re) > 1e-12) {
        for (double& t : taps) t /= gain_re;
    }
    return taps;
}

std::vector<float> filter_zero_phase(const std::vector<float>& x, const std::vector<double>& taps) {
    const int ntaps = static_cast<int>(taps.size());
    const int delay = (ntaps - 1) / 2;
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size());

    std::vector<float> y(x.size(), 0.0f);
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        // y[i] = sum_k taps[k] * x[i + delay - k]
        const std::ptrdiff_t center = i + delay;
        const std::ptrdiff_t k_lo = std::max<std::ptrdiff_t>(0, center - (n - 1));
        const std::ptrdiff_t k_hi = std::min<std::ptrdiff_t>(ntaps - 1, center);
        if (k_lo == 0 && k_hi == ntaps - 1) {
            const float* in = x.data() + (center - (ntaps - 1));
            double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
            int k = 0;
            for (; k + 4 <= ntaps; k += 4) {
                a0 += taps[static_cast<std::size_t>(k)] * in[ntaps - 1 - k];
                a1 += taps[static_cast<std::size_t>(k + 1)] * in[ntaps - 2 - k];
                a2 += taps[static_cast<std::size_t>(k + 2)] * in[ntaps - 3 - k];
                a3 += taps[static_cast<std::size_t>(k + 3)] * in[ntaps - 4 - k];
            }
            for (; k < ntaps; ++k) a0 += taps[static_cast<std::size_t>(k)] * in[ntaps - 1 - k];
            y[static_cast<std::size_t>(i)] = static_cast<float>((a0 + a1) + (a2 + a3));
        } else {
            double acc = 0.0;
            for (std::ptrdiff_t k = k_lo; k <= k_hi; ++k) {
                acc += taps[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(center - k)];
            }
            y[static_cast<std::size_t>(i)] = static_cast<float>(acc);
        }
    }
    return y;
}

std::vector<float> resample(const std::vector<float>& x, double src_rate, double dst_rate) {
    if (dst_rate > src_rate) {
        throw std::domain_error("resample: target rate above source rate");
    }
    if (x.empty()) return {};
    if (dst_rate == src_rate) return x;

    // Polyphase windowed-sinc interpolator. The kernel is a lowpass with
    // cutoff 0.45*dst_rate (passband flat through 0.40*dst_rate, stopband
    // from 0.50*dst_rate), evaluated at input-sample offsets from each output
    // instant. A quantized table of fractional phases keeps the inner loop a
    // plain dot product.
    constexpr double kAtten = 40.0;
    constexpr int kPhases = 512;

    const double fc = 0.45 * dst_rate / src_rate;          // cycles per input sample
    const double transition_hz = 0.10 * dst_rate;
    const double beta = kaiser_beta(kAtten);
    int half = (kaiser_tap_count(kAtten, transition_hz, src_rate) - 1) / 2;
    half = std::max(half, 8);

    const double denom = bessel_i0(beta);
    const int width = 2 * half + 1;
    // table[p][k]: kernel at offset (k - half + p/kPhases) input samples
    std::vector<float> table(static_cast<std::size_t>(kPhases) * width);
    for (int p = 0; p < kPhases; ++p) {
        double frac = static_cast<double>(p) / kPhases;
        for (int k = 0; k < width; ++k) {
            double t = (k - half) - frac;  // offset of input sample relative to output instant
            double r = t / (half + 1.0);
            double win = (std::abs(r) <= 1.0)
                             ? bessel_i0(beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / denom
                             : 0.0;
            table[static_cast<std::size_t>(p) * width + k] =
                static_cast<float>(2.0 * fc * sinc(2.0 * fc * t) * win);
        }
    }
    // Normalize each phase to unity gain so passband stays flat.
    for (int p = 0; p < kPhases; ++p) {
        float* row = table.data() + static_cast<std::size_t>(p) * width;
        double s = 0.0;
        for (int k = 0; k < width; ++k) s += row[k];
        for (int k = 0; k < width; ++k) row[k] = static_cast<float>(row[k] / s);
    }

    const double step = src_rate / dst_rate;  // input samples per output sample
    const std::ptrdiff_t n_in = static_cast<std::ptrdiff_t>(x.size());
    const std::size_t n_out = static_cast<std::size_t>(std::floor((n_in - 1) / step)) + 1;

    std::vector<float> y(n_out);
    for (std::size_t i = 0; i < n_out; ++i) {
        const double pos = i * step;
        const std::ptrdiff_t ipos = static_cast<std::ptrdiff_t>(pos);
        const double frac = pos - ipos;
        int phase = static_cast<int>(frac * kPhases + 0.5);
        std::ptrdiff_t base = ipos;
        if (phase == kPhases) {  // rounded up to the next integer sample
            phase = 0;
            base += 1;
        }
        const float* kern = table.data() + static_cast<std::size_t>(phase) * width;

        const std::ptrdiff_t lo = base - half;
        if (lo >= 0 && lo + width <= n_in) {
            const float* in = x.data() + lo;
            // four partial sums break the accumulator dependency chain
            float a0 = 0.0f, a1 = 0.0f, a2 = 0.0f, a3 = 0.0f;
            int k = 0;
            for (; k + 4 <= width; k += 4) {
                a0 += in[k] * kern[k];
                a1 += in[k + 1] * kern[k + 1];
                a2 += in[k + 2] * kern[k + 2];
                a3 += in[k + 3] * kern[k + 3];
            }
            for (; k < width; ++k) a0 += in[k] * kern[k];
            y[i] = (a0 + a1) + (a2 + a3);
        } else {
            double acc = 0.0;
            for (int k = 0; k < width; ++k) {
                std::ptrdiff_t j = lo + k;
                if (j >= 0 && j < n_in) acc += static_cast<double>(x[static_cast<std::size_t>(j)]) * kern[k];
            }
            y[i] = static_cast<float>(acc);
        }
    }
    return y;
}

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

void fft(std::vector<std::complex<double>>& data) {
    const std::size_t n = data.size();
    if (n == 0 || (n & (n - 1)) != 0) {
        throw std::domain_error("fft: size must be a power of two");
    }
    // bit-reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(data[i], data[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * kPi / static_cast<double>(len);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                std::complex<double> u = data[i + k];
                std::complex<double> v = data[i + k + len / 2] * w;
                data[i + k] = u + v;
                data[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

double goertzel_power(const float* x, std::size_t n, double freq_hz, double sample_rate) {
    const double omega = 2.0 * kPi * freq_hz / sample_rate;
    const double coeff = 2.0 * std::cos(omega);
    double s0 = 0.0, s1 = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        s0 = static_cast<double>(x[i]) + coeff * s1 - s2;
        s2 = s1;
        s1 = s0;
    }
    const double power = s1 * s1 + s2 * s2 - coeff * s1 * s2;
    const double norm = static_cast<double>(n) * static_cast<double>(n);
    return power / norm;
}

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double GaussianRng::uniform() {
    return static_cast<double>(splitmix64(state_) >> 11) * 0x1.0p-53;
}

double GaussianRng::next() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = 0.0;
    do {
        u1 = uniform();
    } while (u1 <= 1e-300);
    const double u2 = uniform();
    const double mag = std::sqrt(-2.0 * std::log(u1));
    spare_ = mag * std::sin(2.0 * kPi * u2);
    has_spare_ = true;
    return mag * std::cos(2.0 * kPi * u2);
}

Biquad butterworth_lowpass(double cutoff_hz, double sample_rate) {
    const double k = std::tan(kPi * cutoff_hz / sample_rate);
    const double q = 1.0 / std::sqrt(2.0);
    const double norm = 1.0 / (1.0 + k / q + k * k);
    Biquad bq;
    bq.b0 = k * k * norm;
    bq.b1 = 2.0 * bq.b0;
    bq.b2 = bq.b0;
    bq.a1 = 2.0 * (k * k - 1.0) * norm;
    bq.a2 = (1.0 - k / q + k * k) * norm;
    return bq;
}

Biquad butterworth_highpass(double cutoff_hz, double sample_rate) {
    const double k = std::tan(kPi * cutoff_hz / sample_rate);
    const double q = 1.0 / std::sqrt(2.0);
    const double norm = 1.0 / (1.0 + k / q + k * k);
    Biquad bq;
    bq.b0 = norm;
    bq.b1 = -2.0 * norm;
    bq.b2 = norm;
    bq.a1 = 2.0 * (k * k - 1.0) * norm;
    bq.a2 = (1.0 - k / q + k * k) * norm;
    return bq;
}

}  // namespace fansim::dsp
