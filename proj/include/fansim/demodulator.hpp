#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fansim/channel_sim.hpp"
#include "fansim/modulator.hpp"

namespace fansim {

struct DemodConfig {
    double target_rate = 2000.0;   // analysis rate after decimation
    Band band{100.0, 600.0};       // bandpass around the expected blade tones
    double symbol_period = 0.0;    // T + TR as known to the receiver
    double transition_time = 0.0;  // TR: leading part of each slot spent slewing
    double window_length = 0.5;    // analysis window, seconds
    double hop = 0.1;              // window stride, seconds
    Scheme scheme = Scheme::fsk;
    std::optional<double> expected_f0;  // FSK tone hints, Hz
    std::optional<double> expected_f1;
    double sync_threshold = 0.75;  // normalized preamble correlation in [0,1]

    void validate(double source_rate) const;
};

// Learned from the preamble: band-energy levels for ASK, tone frequencies
// (Hz) for FSK.
struct CalibrationEstimate {
    double level_zero = 0.0;
    double level_one = 0.0;
};

struct SymbolDecision {
    int bit = 0;
    double confidence = 0.0;  // 0 at the decision threshold, 1 at a calibrated level
    double time_offset = 0.0; // symbol start, seconds from waveform start
};

// Sliding-window measurement series. values[i] covers
// [i*hop, i*hop + window_length); power[i] carries the measurement strength
// used for carrier-presence checks (band energy, or strongest tone power).
// Windows with no detectable content hold NaN.
struct TrackSeries {
    double window_length = 0.0;
    double hop = 0.0;
    std::vector<double> values;
    std::vector<double> power;

    std::size_t size() const { return values.size(); }
    double window_start(std::size_t i) const { return static_cast<double>(i) * hop; }
    double window_end(std::size_t i) const { return window_start(i) + window_length; }
    double span_end() const { return values.empty() ? 0.0 : window_end(values.size() - 1); }
};

struct SyncResult {
    double offset_seconds = 0.0;
    CalibrationEstimate calibration;
    double score = 0.0;
};

struct DemodResult {
    BitStream bits;
    std::vector<SymbolDecision> decisions;
    std::optional<SyncResult> sync;
    std::string diagnostic;  // non-empty when sync was not found
};

// Anti-aliased sample-rate reduction (44.1 kHz recordings drop to 2 kHz for
// analysis; everything below ~0.45*target_rate passes unchanged).
Waveform decimate(const Waveform& w, double target_rate);

// Linear-phase FIR bandpass; passband [low_hz, high_hz], stopbands reached at
// 0.5*low_hz and 1.5*high_hz with >= 40 dB attenuation.
Waveform bandpass(const Waveform& w, double low_hz, double high_hz);

// Sliding in-band energy (mean square per window). Input should already be
// decimated and band-limited.
TrackSeries band_energy_track(const Waveform& w, const DemodConfig& cfg);

// Per-window dominant frequency inside cfg.band. With tone hints the window
// is scored at exactly the two expected frequencies and the stronger one is
// reported; otherwise the FFT argmax is used (resolution <= 1/window_length).
TrackSeries dominant_frequency_track(const Waveform& w, const DemodConfig& cfg);

// Slides a four-symbol alternation template over symbol-period slices of the
// track, looking for the beginning of a transmission. Candidates that merely
// continue an ongoing alternation (the symbol before them already carries a
// matching carrier) are rejected, so the detector locks to the first frame
// rather than an arbitrary 1010 run. Returns the sync offset and the two
// cluster levels learned from the preamble, or nullopt.
std::optional<SyncResult> detect_preamble(const TrackSeries& track, const DemodConfig& cfg);

// Full receiver chain: decimate -> bandpass -> track -> preamble sync ->
// fixed-period symbol slicing with per-frame recalibration (every 16 symbols
// the frame's own preamble refreshes the level estimates when it is clean).
DemodResult demodulate(const Waveform& w, const DemodConfig& cfg);

}  // namespace fansim
