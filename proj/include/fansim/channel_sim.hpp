#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "fansim/fan_model.hpp"
#include "fansim/modulator.hpp"

namespace fansim {

struct ChannelConfig {
    double sample_rate = 44100.0;
    double distance_m = 1.0;
    int harmonic_count = 3;            // fundamental plus overtones of the blade tone
    double harmonic_rolloff = 0.35;    // per-harmonic amplitude factor
    double broadband_level = 0.0;      // flow-noise level relative to the fundamental
    double ambient_noise_amplitude = 0.0;
    std::uint64_t noise_seed = 1;

    void validate() const;
};

// Sampled audio. Samples live in [-1, 1] once synthesis has normalized.
struct Waveform {
    double sample_rate = 44100.0;
    std::vector<float> samples;

    double duration_seconds() const {
        return static_cast<double>(samples.size()) / sample_rate;
    }
};

struct SynthesisInfo {
    double peak = 0.0;           // absolute peak before normalization
    double normalization = 1.0;  // factor the waveform was divided by (1 when untouched)
    double transition_budget = 0.0;  // slot time reserved for rotor transit, per segment
};

// Renders the sound of a fan executing the schedule. Each segment occupies a
// fixed slot of (transition budget + hold) seconds: the rotor slews toward
// the segment target at the fan's slew rate and dwells once it arrives. The
// budget is the worst adjacent transition in the schedule, which is how a
// fixed-cadence transmitter times its commands; the rotor starts parked at
// the first segment's speed. Tone phase is integrated through transitions so
// speed changes chirp rather than jump. Output = harmonic stack scaled by
// amplitude_at(rpm, distance) + band-limited flow noise + ambient noise,
// deterministic for a given seed. If the mix exceeds [-1, 1] the whole
// waveform is rescaled by its peak (reported via info).
Waveform synthesize(const RpmSchedule& schedule, const FanSpec& fan, const ChannelConfig& ch,
                    SynthesisInfo* info = nullptr);

// Mono 16-bit signed PCM, little-endian RIFF/WAVE. Sample values are rounded
// to nearest; +1.0 stores 32767.
void write_wav(const Waveform& w, const std::filesystem::path& path);

// Reads mono or stereo 16-bit PCM (stereo is averaged to mono). Samples are
// scaled by 1/32767 and clamped to [-1, 1]. Throws FormatError for anything
// else, std::runtime_error for I/O failures.
Waveform read_wav(const std::filesystem::path& path);

}  // namespace fansim
