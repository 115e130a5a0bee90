#include "fansim/demodulator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "fansim/dsp.hpp"
#include "fansim/errors.hpp"

namespace fansim {

namespace {

constexpr double kEps = 1e-9;         // slack for window/slot containment
constexpr double kNoiseFloor = 1e-15; // tone power below this counts as "no peak"
constexpr double kLogFloor = 1e-300;

double median_of(std::vector<double>& v) {
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    double m = v[mid];
    if (v.size() % 2 == 0) {
        const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
        m = 0.5 * (m + lower);
    }
    return m;
}

struct SlotStat {
    double value = 0.0;
    double power = 0.0;
};

// Representative measurement for the symbol slot starting at slot_start.
// Prefers the central 60% of windows that sit fully inside the post-transition
// dwell; when the dwell is shorter than a window (T near zero) it falls back
// to the last window inside the slot, i.e. the tail of the chirp where the
// tone has essentially reached its target. Windows below power_floor (set
// relative to the strongest window in the track) are ignored; they carry
// boundary slivers and leakage, not symbols.
std::optional<SlotStat> slot_statistic(const TrackSeries& track, double slot_start,
                                       const DemodConfig& cfg, double power_floor) {
    const double w = track.window_length;
    const double h = track.hop;
    const double slot_end = slot_start + cfg.symbol_period;
    const double steady_begin = slot_start + std::min(cfg.transition_time, cfg.symbol_period);

    const auto first_window_at_or_after = [&](double t) {
        return static_cast<std::ptrdiff_t>(std::ceil((t - kEps) / h));
    };
    const auto last_window_ending_by = [&](double t) {
        return static_cast<std::ptrdiff_t>(std::floor((t - w + kEps) / h));
    };

    std::ptrdiff_t lo = first_window_at_or_after(steady_begin);
    std::ptrdiff_t hi = last_window_ending_by(slot_end);
    lo = std::max<std::ptrdiff_t>(lo, 0);
    hi = std::min<std::ptrdiff_t>(hi, static_cast<std::ptrdiff_t>(track.size()) - 1);

    std::ptrdiff_t count = hi - lo + 1;
    if (count >= 1) {
        // central 60%, trimming transition smear that leaks into the edges
        const std::ptrdiff_t trim = static_cast<std::ptrdiff_t>(static_cast<double>(count) * 0.2);
        lo += trim;
        hi -= trim;
    } else {
        // no window fits the dwell: take the latest window inside the slot
        lo = std::max<std::ptrdiff_t>(first_window_at_or_after(slot_start), 0);
        hi = std::min<std::ptrdiff_t>(last_window_ending_by(slot_end),
                                      static_cast<std::ptrdiff_t>(track.size()) - 1);
        if (hi < lo) return std::nullopt;
        lo = hi;
    }

    std::vector<double> vals;
    std::vector<double> pows;
    vals.reserve(static_cast<std::size_t>(hi - lo + 1));
    for (std::ptrdiff_t j = lo; j <= hi; ++j) {
        const double v = track.values[static_cast<std::size_t>(j)];
        if (std::isnan(v)) continue;
        if (track.power[static_cast<std::size_t>(j)] < power_floor) continue;
        vals.push_back(v);
        pows.push_back(track.power[static_cast<std::size_t>(j)]);
    }
    if (vals.empty()) return std::nullopt;
    return SlotStat{median_of(vals), median_of(pows)};
}

// Windows more than 30 dB below the strongest one carry onset/tail slivers
// or leakage rather than symbols. Legitimate symbol windows stay above this:
// even a 1000/3000 rpm pair only spans (1/3)^5 ~ 0.004 in power.
double track_power_floor(const TrackSeries& track) {
    double max_power = 0.0;
    for (double p : track.power) max_power = std::max(max_power, p);
    return 1e-3 * max_power;
}

// Pearson correlation of a value sequence against the alternating template
// (+1, -1, +1, ...). Near-constant sequences return 0.
double alternation_score(const std::vector<double>& v) {
    const std::size_t n = v.size();
    double mean_v = 0.0, mean_t = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_v += v[i];
        mean_t += (i % 2 == 0) ? 1.0 : -1.0;
    }
    mean_v /= static_cast<double>(n);
    mean_t /= static_cast<double>(n);

    double num = 0.0, den_v = 0.0, den_t = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double tv = ((i % 2 == 0) ? 1.0 : -1.0) - mean_t;
        const double vv = v[i] - mean_v;
        num += vv * tv;
        den_v += vv * vv;
        den_t += tv * tv;
    }
    if (den_v < 1e-30 || den_t < 1e-30) return 0.0;
    return num / std::sqrt(den_v * den_t);
}

double decision_value(double raw, Scheme scheme) {
    return scheme == Scheme::ask ? std::log(std::max(raw, kLogFloor)) : raw;
}

}  // namespace

void DemodConfig::validate(double source_rate) const {
    if (!(target_rate > 0.0)) throw ConfigError("demod: target_rate must be > 0");
    if (target_rate > source_rate) throw ConfigError("demod: target_rate above source rate");
    if (!(band.low_hz > 0.0) || !(band.low_hz < band.high_hz) ||
        !(band.high_hz < 0.5 * target_rate)) {
        throw ConfigError("demod: band must satisfy 0 < low < high < target_rate/2");
    }
    if (!(symbol_period > 0.0)) throw ConfigError("demod: symbol_period must be > 0");
    if (transition_time < 0.0 || transition_time > symbol_period + kEps) {
        throw ConfigError("demod: transition_time must lie in [0, symbol_period]");
    }
    if (!(window_length > 0.0) || !(hop > 0.0)) {
        throw ConfigError("demod: window_length and hop must be > 0");
    }
    if (window_length > symbol_period + kEps) {
        throw ConfigError("demod: window_length must not exceed symbol_period");
    }
    if (expected_f0.has_value() != expected_f1.has_value()) {
        throw ConfigError("demod: tone hints must be given as a pair");
    }
    if (expected_f0 && expected_f1) {
        const double df = std::abs(*expected_f1 - *expected_f0);
        if (df <= 0.0) throw ConfigError("demod: tone hints must differ");
        if (window_length < 2.0 / df) {
            throw ConfigError("demod: window_length too short to resolve the tone hints");
        }
    }
    if (!(sync_threshold > 0.0) || sync_threshold > 1.0) {
        throw ConfigError("demod: sync_threshold must lie in (0, 1]");
    }
}

Waveform decimate(const Waveform& w, double target_rate) {
    if (!(target_rate > 0.0) || target_rate > w.sample_rate) {
        throw std::domain_error("decimate: target rate must be positive and <= source rate");
    }
    Waveform out;
    out.sample_rate = target_rate;
    out.samples = dsp::resample(w.samples, w.sample_rate, target_rate);
    return out;
}

Waveform bandpass(const Waveform& w, double low_hz, double high_hz) {
    const double nyquist = 0.5 * w.sample_rate;
    if (!(low_hz > 0.0) || !(low_hz < high_hz) || !(high_hz < nyquist)) {
        throw std::domain_error("bandpass: require 0 < low < high < rate/2");
    }
    // Cutoffs sit mid-transition so the passband spans [low, high] and the
    // stopbands are reached at 0.5*low and 1.5*high.
    const double fc_low = 0.75 * low_hz;
    const double fc_high = std::min(1.25 * high_hz, 0.98 * nyquist);
    const double transition = std::min(0.5 * low_hz, 0.5 * high_hz);
    const auto taps = dsp::design_bandpass(fc_low, fc_high, w.sample_rate, 60.0, transition);

    Waveform out;
    out.sample_rate = w.sample_rate;
    out.samples = dsp::filter_zero_phase(w.samples, taps);
    return out;
}

TrackSeries band_energy_track(const Waveform& w, const DemodConfig& cfg) {
    const auto ws = static_cast<std::size_t>(std::llround(cfg.window_length * w.sample_rate));
    const auto hs = static_cast<std::size_t>(std::llround(cfg.hop * w.sample_rate));
    if (ws == 0 || hs == 0) throw std::domain_error("band_energy_track: empty window or hop");
    if (ws > w.samples.size()) {
        throw std::domain_error("band_energy_track: window longer than signal");
    }

    std::vector<double> prefix(w.samples.size() + 1, 0.0);
    for (std::size_t i = 0; i < w.samples.size(); ++i) {
        const double s = static_cast<double>(w.samples[i]);
        prefix[i + 1] = prefix[i] + s * s;
    }

    TrackSeries track;
    track.window_length = static_cast<double>(ws) / w.sample_rate;
    track.hop = static_cast<double>(hs) / w.sample_rate;
    const std::size_t count = (w.samples.size() - ws) / hs + 1;
    track.values.resize(count);
    track.power.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t begin = i * hs;
        const double energy = (prefix[begin + ws] - prefix[begin]) / static_cast<double>(ws);
        track.values[i] = energy;
        track.power[i] = energy;
    }
    return track;
}

TrackSeries dominant_frequency_track(const Waveform& w, const DemodConfig& cfg) {
    const auto ws = static_cast<std::size_t>(std::llround(cfg.window_length * w.sample_rate));
    const auto hs = static_cast<std::size_t>(std::llround(cfg.hop * w.sample_rate));
    if (ws == 0 || hs == 0) throw std::domain_error("dominant_frequency_track: empty window or hop");
    if (ws > w.samples.size()) {
        throw std::domain_error("dominant_frequency_track: window longer than signal");
    }

    TrackSeries track;
    track.window_length = static_cast<double>(ws) / w.sample_rate;
    track.hop = static_cast<double>(hs) / w.sample_rate;
    const std::size_t count = (w.samples.size() - ws) / hs + 1;
    track.values.resize(count);
    track.power.resize(count);

    const bool hinted = cfg.expected_f0 && cfg.expected_f1;
    const double nan = std::numeric_limits<double>::quiet_NaN();

    if (hinted) {
        // Discrete-frequency energy comparison at the two expected tones.
        for (std::size_t i = 0; i < count; ++i) {
            const float* win = w.samples.data() + i * hs;
            const double p0 = dsp::goertzel_power(win, ws, *cfg.expected_f0, w.sample_rate);
            const double p1 = dsp::goertzel_power(win, ws, *cfg.expected_f1, w.sample_rate);
            const double peak = std::max(p0, p1);
            if (peak < kNoiseFloor) {
                track.values[i] = nan;
                track.power[i] = peak;
            } else {
                track.values[i] = (p1 >= p0) ? *cfg.expected_f1 : *cfg.expected_f0;
                track.power[i] = peak;
            }
        }
        return track;
    }

    const std::size_t nfft = dsp::next_pow2(ws);
    std::vector<double> hann(ws);
    double window_sum = 0.0;
    for (std::size_t k = 0; k < ws; ++k) {
        hann[k] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(k) /
                                       static_cast<double>(ws - 1));
        window_sum += hann[k];
    }
    const double coherent_gain = window_sum / 2.0;  // peak |X| of a unit tone

    const double bin_hz = w.sample_rate / static_cast<double>(nfft);
    const auto bin_lo = static_cast<std::size_t>(std::ceil(cfg.band.low_hz / bin_hz));
    const auto bin_hi = static_cast<std::size_t>(std::floor(cfg.band.high_hz / bin_hz));

    std::vector<std::complex<double>> buf(nfft);
    for (std::size_t i = 0; i < count; ++i) {
        const float* win = w.samples.data() + i * hs;
        for (std::size_t k = 0; k < ws; ++k) buf[k] = {static_cast<double>(win[k]) * hann[k], 0.0};
        std::fill(buf.begin() + static_cast<std::ptrdiff_t>(ws), buf.end(),
                  std::complex<double>{0.0, 0.0});
        dsp::fft(buf);

        double best = 0.0;
        std::size_t best_bin = bin_lo;
        for (std::size_t b = bin_lo; b <= bin_hi && b < nfft / 2; ++b) {
            const double p = std::norm(buf[b]);
            if (p > best) {
                best = p;
                best_bin = b;
            }
        }
        const double peak_power = best / (coherent_gain * coherent_gain);
        if (peak_power < kNoiseFloor) {
            track.values[i] = nan;
            track.power[i] = peak_power;
        } else {
            track.values[i] = static_cast<double>(best_bin) * bin_hz;
            track.power[i] = peak_power;
        }
    }
    return track;
}

std::optional<SyncResult> detect_preamble(const TrackSeries& track, const DemodConfig& cfg) {
    const double P = cfg.symbol_period;
    if (track.size() == 0 || track.span_end() < 4.0 * P) return std::nullopt;

    const double scan_end = track.span_end() - 4.0 * P;
    const auto n_cand = static_cast<std::size_t>(std::floor(scan_end / track.hop + kEps)) + 1;
    const double floor = track_power_floor(track);

    const auto stats_at = [&](double tau, std::array<SlotStat, 4>& out) {
        for (int k = 0; k < 4; ++k) {
            auto s = slot_statistic(track, tau + k * P, cfg, floor);
            if (!s) return false;
            out[static_cast<std::size_t>(k)] = *s;
        }
        // preamble slots carry the same carrier; wildly uneven power means
        // some slot was measured off the transmission
        double p_min = out[0].power, p_max = out[0].power;
        for (const auto& s : out) {
            p_min = std::min(p_min, s.power);
            p_max = std::max(p_max, s.power);
        }
        return p_min >= 1e-4 * p_max;
    };

    std::vector<double> scores(n_cand, -1.0);
    for (std::size_t i = 0; i < n_cand; ++i) {
        const double tau = static_cast<double>(i) * track.hop;
        std::array<SlotStat, 4> st;
        if (!stats_at(tau, st)) continue;

        std::vector<double> v(4);
        for (int k = 0; k < 4; ++k) v[static_cast<std::size_t>(k)] = decision_value(st[static_cast<std::size_t>(k)].value, cfg.scheme);
        const double score = std::abs(alternation_score(v));
        if (score < cfg.sync_threshold) {
            scores[i] = score;
            continue;
        }

        // A preamble marks the *beginning* of a transmission. If the symbol
        // slot just before this candidate still carries comparable signal and
        // extends the alternation, we are mid-stream, not at a frame start.
        if (auto before = slot_statistic(track, tau - P, cfg, floor)) {
            std::vector<double> pw = {st[0].power, st[1].power, st[2].power, st[3].power};
            const double typical = median_of(pw);
            if (before->power >= 0.25 * typical) {
                std::vector<double> v5(5);
                v5[0] = decision_value(before->value, cfg.scheme);
                for (int k = 0; k < 4; ++k) v5[static_cast<std::size_t>(k + 1)] = v[static_cast<std::size_t>(k)];
                if (std::abs(alternation_score(v5)) >= cfg.sync_threshold) {
                    continue;  // mid-stream alternation, not a start
                }
            }
        }
        scores[i] = score;
    }

    double best = -1.0;
    for (double s : scores) best = std::max(best, s);
    if (best < cfg.sync_threshold) return std::nullopt;

    // The score plateaus around the true offset; within the earliest
    // near-maximal run, weight candidates by their slot power. Aligned slots
    // measure a settled tone, misaligned ones smear across the transition, so
    // the centroid pulls toward true alignment even when the run is lopsided.
    const double accept = std::max(cfg.sync_threshold, best - 0.005);
    std::size_t run_begin = 0;
    std::size_t run_end = 0;  // inclusive
    bool in_run = false;
    for (std::size_t i = 0; i < n_cand; ++i) {
        if (scores[i] >= accept) {
            if (!in_run) {
                run_begin = i;
                in_run = true;
            }
            run_end = i;
        } else if (in_run) {
            break;
        }
    }
    if (!in_run) return std::nullopt;

    double weight_sum = 0.0;
    double weighted_tau = 0.0;
    for (std::size_t i = run_begin; i <= run_end; ++i) {
        const double tau = static_cast<double>(i) * track.hop;
        std::array<SlotStat, 4> st;
        if (!stats_at(tau, st)) continue;
        std::vector<double> pw = {st[0].power, st[1].power, st[2].power, st[3].power};
        const double weight = std::max(median_of(pw), 1e-30);
        weight_sum += weight;
        weighted_tau += weight * tau;
    }
    if (weight_sum <= 0.0) return std::nullopt;
    const double tau_star = weighted_tau / weight_sum;
    std::array<SlotStat, 4> st;
    if (!stats_at(tau_star, st)) return std::nullopt;

    SyncResult result;
    result.offset_seconds = tau_star;
    result.score = best;
    result.calibration.level_one = 0.5 * (st[0].value + st[2].value);
    result.calibration.level_zero = 0.5 * (st[1].value + st[3].value);
    if (result.calibration.level_one == result.calibration.level_zero) return std::nullopt;
    return result;
}

DemodResult demodulate(const Waveform& w, const DemodConfig& cfg) {
    cfg.validate(w.sample_rate);

    DemodResult result;
    if (w.samples.empty()) {
        result.diagnostic = "empty waveform";
        return result;
    }

    Waveform analysis = decimate(w, cfg.target_rate);
    analysis = bandpass(analysis, cfg.band.low_hz, cfg.band.high_hz);

    TrackSeries track;
    if (cfg.scheme == Scheme::ask) {
        if (analysis.samples.size() < static_cast<std::size_t>(std::llround(cfg.window_length * cfg.target_rate))) {
            result.diagnostic = "signal shorter than one analysis window";
            return result;
        }
        track = band_energy_track(analysis, cfg);
    } else {
        if (analysis.samples.size() < static_cast<std::size_t>(std::llround(cfg.window_length * cfg.target_rate))) {
            result.diagnostic = "signal shorter than one analysis window";
            return result;
        }
        track = dominant_frequency_track(analysis, cfg);
    }

    auto sync = detect_preamble(track, cfg);
    if (!sync) {
        result.diagnostic = "preamble not found";
        return result;
    }
    result.sync = sync;

    CalibrationEstimate calib = sync->calibration;
    const double P = cfg.symbol_period;
    const double tau = sync->offset_seconds;
    const double floor = track_power_floor(track);

    for (std::size_t k = 0;; ++k) {
        const double slot_start = tau + static_cast<double>(k) * P;

        if (k % kFrameBits == 0) {
            // Each frame's preamble refreshes the level estimates (receivers
            // must follow distance/speed drift); a noisy preamble is left for
            // the frame parser to flag and the previous calibration stands.
            std::array<SlotStat, 4> st;
            bool ok = true;
            for (int j = 0; j < 4; ++j) {
                auto s = slot_statistic(track, slot_start + j * P, cfg, floor);
                if (!s) {
                    ok = false;
                    break;
                }
                st[static_cast<std::size_t>(j)] = *s;
            }
            if (ok) {
                std::vector<double> v(4);
                for (int j = 0; j < 4; ++j) v[static_cast<std::size_t>(j)] = decision_value(st[static_cast<std::size_t>(j)].value, cfg.scheme);
                if (std::abs(alternation_score(v)) >= cfg.sync_threshold) {
                    const double one = 0.5 * (st[0].value + st[2].value);
                    const double zero = 0.5 * (st[1].value + st[3].value);
                    if (one != zero) {
                        calib.level_one = one;
                        calib.level_zero = zero;
                    }
                }
            }
        }

        auto stat = slot_statistic(track, slot_start, cfg, floor);
        if (!stat) break;

        const double v = decision_value(stat->value, cfg.scheme);
        const double l0 = decision_value(calib.level_zero, cfg.scheme);
        const double l1 = decision_value(calib.level_one, cfg.scheme);
        const double d0 = std::abs(v - l0);
        const double d1 = std::abs(v - l1);

        SymbolDecision decision;
        decision.bit = (d1 <= d0) ? 1 : 0;  // tie decides '1'
        const double half_gap = 0.5 * std::abs(l1 - l0);
        const double margin = std::abs(v - 0.5 * (l0 + l1));
        decision.confidence = (half_gap > 1e-30) ? std::min(1.0, margin / half_gap) : 0.0;
        decision.time_offset = slot_start;

        result.bits.push_back(static_cast<std::uint8_t>(decision.bit));
        result.decisions.push_back(decision);
    }

    return result;
}

}  // namespace fansim
