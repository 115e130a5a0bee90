#include "fansim/channel_sim.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "fansim/dsp.hpp"
#include "fansim/errors.hpp"

namespace fansim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::size_t kAmplitudeBlock = 64;   // samples between pow() refreshes
constexpr std::size_t kRenormInterval = 4096; // oscillator magnitude touch-up

struct Slot {
    double start_rpm = 0.0;
    double target_rpm = 0.0;
    std::size_t begin = 0;  // absolute sample indices
    std::size_t end = 0;
    std::size_t ramp_end = 0;
};

}  // namespace

void ChannelConfig::validate() const {
    if (!(sample_rate > 0.0)) throw ConfigError("channel: sample_rate must be > 0");
    if (distance_m < 0.0) throw ConfigError("channel: distance must be >= 0");
    if (harmonic_count < 1) throw ConfigError("channel: harmonic_count must be >= 1");
    if (harmonic_rolloff < 0.0) throw ConfigError("channel: harmonic_rolloff must be >= 0");
    if (broadband_level < 0.0 || ambient_noise_amplitude < 0.0) {
        throw ConfigError("channel: noise levels must be >= 0");
    }
}

Waveform synthesize(const RpmSchedule& schedule, const FanSpec& fan, const ChannelConfig& ch,
                    SynthesisInfo* info) {
    ch.validate();
    fan.validate();
    if (schedule.segments.empty()) throw std::domain_error("synthesize: empty schedule");
    for (const auto& seg : schedule.segments) {
        if (seg.target_rpm < fan.rpm_min || seg.target_rpm > fan.rpm_max) {
            throw std::domain_error("synthesize: schedule speed outside fan range");
        }
        if (seg.hold_seconds < 0.0) throw std::domain_error("synthesize: negative hold");
    }
    const double max_tone = blade_pass_frequency(fan, fan.rpm_max) * ch.harmonic_count;
    if (ch.sample_rate < 4.0 * blade_pass_frequency(fan, fan.rpm_max) ||
        max_tone >= 0.5 * ch.sample_rate) {
        throw ConfigError("channel: sample_rate too low for this fan's tones");
    }

    const double rate = ch.sample_rate;
    const double dt = 1.0 / rate;

    // A fixed-cadence transmitter reserves the worst adjacent transition for
    // every command slot, so symbols stay on a constant clock even when the
    // rotor arrives early (or is already there).
    double budget = 0.0;
    for (std::size_t i = 1; i < schedule.segments.size(); ++i) {
        budget = std::max(budget, transition_time(fan, schedule.segments[i - 1].target_rpm,
                                                  schedule.segments[i].target_rpm));
    }

    std::vector<Slot> slots(schedule.segments.size());
    double elapsed = 0.0;
    double prev_rpm = schedule.segments.front().target_rpm;  // rotor parked at first level
    for (std::size_t i = 0; i < schedule.segments.size(); ++i) {
        const auto& seg = schedule.segments[i];
        Slot& slot = slots[i];
        slot.start_rpm = prev_rpm;
        slot.target_rpm = seg.target_rpm;
        slot.begin = static_cast<std::size_t>(std::llround(elapsed * rate));
        elapsed += budget + seg.hold_seconds;
        slot.end = static_cast<std::size_t>(std::llround(elapsed * rate));
        const double ramp_time = transition_time(fan, prev_rpm, seg.target_rpm);
        slot.ramp_end = std::min(
            slot.end, slot.begin + static_cast<std::size_t>(std::ceil(ramp_time * rate)));
        prev_rpm = seg.target_rpm;
    }

    const std::size_t total = slots.back().end;
    Waveform out;
    out.sample_rate = rate;
    out.samples.assign(total, 0.0f);

    const int harmonics = ch.harmonic_count;
    std::vector<double> rolloff_pow(static_cast<std::size_t>(harmonics));
    for (int h = 0; h < harmonics; ++h) rolloff_pow[static_cast<std::size_t>(h)] = std::pow(ch.harmonic_rolloff, h);

    const auto amp_of = [&](double rpm) { return amplitude_at(fan, rpm, ch.distance_m); };
    const auto freq_of = [&](double rpm) { return fan.blade_count * rpm / 60.0; };

    const bool want_broadband = ch.broadband_level > 0.0;
    const bool want_ambient = ch.ambient_noise_amplitude > 0.0;
    dsp::GaussianRng flow_rng(ch.noise_seed);
    std::uint64_t ambient_seed_state = ch.noise_seed;
    dsp::GaussianRng ambient_rng(dsp::splitmix64(ambient_seed_state) ^ 0xa5a5a5a5a5a5a5a5ULL);
    // Flow noise occupies roughly the 100-1000 Hz stretch around the blade tones.
    dsp::Biquad flow_hp = dsp::butterworth_highpass(100.0, rate);
    dsp::Biquad flow_lp = dsp::butterworth_lowpass(std::min(1000.0, 0.45 * rate), rate);

    std::complex<double> osc(1.0, 0.0);  // e^{j*theta(t)}, phase-continuous across slots
    double peak = 0.0;
    std::size_t renorm_countdown = kRenormInterval;

    for (const Slot& slot : slots) {
        const double direction = (slot.target_rpm >= slot.start_rpm) ? 1.0 : -1.0;

        std::size_t i = slot.begin;
        while (i < slot.end) {
            const bool in_ramp = i < slot.ramp_end;
            const std::size_t section_end = in_ramp ? slot.ramp_end : slot.end;

            const auto rpm_at = [&](std::size_t idx) {
                if (!in_ramp) return slot.target_rpm;
                const double t_rel = static_cast<double>(idx - slot.begin) * dt;
                const double r = slot.start_rpm + direction * fan.slew_rate * t_rel;
                return direction > 0 ? std::min(r, slot.target_rpm) : std::max(r, slot.target_rpm);
            };

            // Oscillator step for this section: during a ramp the tone chirps
            // linearly, which the quadratic-phase recursion tracks exactly.
            const double chirp_hz_per_s =
                in_ramp ? direction * fan.blade_count * fan.slew_rate / 60.0 : 0.0;
            const double f_here = freq_of(rpm_at(i));
            std::complex<double> step =
                std::polar(1.0, kTwoPi * (f_here + 0.5 * chirp_hz_per_s * dt) * dt);
            const std::complex<double> accel = std::polar(1.0, kTwoPi * chirp_hz_per_s * dt * dt);

            while (i < section_end) {
                const std::size_t block_end = std::min(i + kAmplitudeBlock, section_end);
                const double amp_a = amp_of(rpm_at(i));
                const double amp_b = amp_of(rpm_at(block_end > i ? block_end - 1 : i));
                const double amp_step =
                    (block_end > i + 1) ? (amp_b - amp_a) / static_cast<double>(block_end - 1 - i) : 0.0;

                double amp = amp_a;
                for (std::size_t k = i; k < block_end; ++k) {
                    double tone = 0.0;
                    std::complex<double> zh = osc;
                    for (int h = 0; h < harmonics; ++h) {
                        tone += rolloff_pow[static_cast<std::size_t>(h)] * zh.imag();
                        if (h + 1 < harmonics) zh *= osc;
                    }
                    double sample = amp * tone;
                    if (want_broadband) {
                        const double flow = flow_lp.process(flow_hp.process(flow_rng.next()));
                        sample += amp * ch.broadband_level * flow;
                    }
                    if (want_ambient) {
                        sample += ch.ambient_noise_amplitude * ambient_rng.next();
                    }
                    out.samples[k] = static_cast<float>(sample);
                    const double mag = std::abs(sample);
                    if (mag > peak) peak = mag;

                    osc *= step;
                    if (in_ramp) step *= accel;
                    if (--renorm_countdown == 0) {
                        osc /= std::abs(osc);
                        renorm_countdown = kRenormInterval;
                    }
                    amp += amp_step;
                }
                i = block_end;
            }
        }
    }

    double normalization = 1.0;
    if (peak > 1.0) {
        normalization = peak;
        const float inv = static_cast<float>(1.0 / peak);
        for (float& s : out.samples) s *= inv;
    }
    if (info) {
        info->peak = peak;
        info->normalization = normalization;
        info->transition_budget = budget;
    }
    return out;
}

// ---------------------------------------------------------------------------
// WAV I/O

namespace {

void put_u16(std::vector<std::uint8_t>& buf, std::uint16_t v) {
    buf.push_back(static_cast<std::uint8_t>(v & 0xff));
    buf.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& buf, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

std::uint16_t get_u16(const std::uint8_t* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

void write_wav(const Waveform& w, const std::filesystem::path& path) {
    const std::uint32_t rate = static_cast<std::uint32_t>(std::llround(w.sample_rate));
    const std::uint32_t data_bytes = static_cast<std::uint32_t>(w.samples.size() * 2);

    std::vector<std::uint8_t> buf;
    buf.reserve(44 + data_bytes);
    buf.insert(buf.end(), {'R', 'I', 'F', 'F'});
    put_u32(buf, 36 + data_bytes);
    buf.insert(buf.end(), {'W', 'A', 'V', 'E'});
    buf.insert(buf.end(), {'f', 'm', 't', ' '});
    put_u32(buf, 16);
    put_u16(buf, 1);  // PCM
    put_u16(buf, 1);  // mono
    put_u32(buf, rate);
    put_u32(buf, rate * 2);  // byte rate
    put_u16(buf, 2);         // block align
    put_u16(buf, 16);        // bits per sample
    buf.insert(buf.end(), {'d', 'a', 't', 'a'});
    put_u32(buf, data_bytes);

    for (float s : w.samples) {
        long v = std::lround(static_cast<double>(s) * 32767.0);
        v = std::clamp(v, -32768L, 32767L);
        put_u16(buf, static_cast<std::uint16_t>(static_cast<std::int16_t>(v)));
    }

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("write_wav: cannot open " + path.string());
    f.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!f) throw std::runtime_error("write_wav: write failed for " + path.string());
}

Waveform read_wav(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("read_wav: cannot open " + path.string());

    const auto read_exact = [&](std::uint8_t* dst, std::size_t n) {
        f.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(f.gcount()) != n) {
            throw FormatError("read_wav: truncated file " + path.string());
        }
    };

    std::uint8_t header[12];
    read_exact(header, 12);
    if (std::memcmp(header, "RIFF", 4) != 0 || std::memcmp(header + 8, "WAVE", 4) != 0) {
        throw FormatError("read_wav: not a RIFF/WAVE file: " + path.string());
    }

    bool have_fmt = false;
    std::uint16_t channels = 0;
    std::uint32_t rate = 0;

    while (true) {
        std::uint8_t chunk[8];
        f.read(reinterpret_cast<char*>(chunk), 8);
        if (static_cast<std::size_t>(f.gcount()) != 8) {
            throw FormatError("read_wav: missing data chunk in " + path.string());
        }
        const std::uint32_t size = get_u32(chunk + 4);

        if (std::memcmp(chunk, "fmt ", 4) == 0) {
            if (size < 16) throw FormatError("read_wav: fmt chunk too small");
            std::vector<std::uint8_t> fmt(size);
            read_exact(fmt.data(), size);
            const std::uint16_t format_tag = get_u16(fmt.data());
            channels = get_u16(fmt.data() + 2);
            rate = get_u32(fmt.data() + 4);
            const std::uint16_t bits = get_u16(fmt.data() + 14);
            if (format_tag != 1) {
                throw FormatError("read_wav: unsupported encoding (want 16-bit PCM)");
            }
            if (bits != 16) throw FormatError("read_wav: unsupported bit depth " + std::to_string(bits));
            if (channels != 1 && channels != 2) {
                throw FormatError("read_wav: unsupported channel count " + std::to_string(channels));
            }
            have_fmt = true;
            if (size % 2) f.seekg(1, std::ios::cur);
            continue;
        }

        if (std::memcmp(chunk, "data", 4) == 0) {
            if (!have_fmt) throw FormatError("read_wav: data chunk before fmt");
            std::vector<std::uint8_t> raw(size);
            read_exact(raw.data(), size);

            Waveform w;
            w.sample_rate = rate;
            const std::size_t frames = size / (2u * channels);
            w.samples.resize(frames);
            for (std::size_t i = 0; i < frames; ++i) {
                double acc = 0.0;
                for (std::uint16_t c = 0; c < channels; ++c) {
                    const auto v = static_cast<std::int16_t>(get_u16(raw.data() + (i * channels + c) * 2));
                    acc += static_cast<double>(v);
                }
                const double mono = acc / channels / 32767.0;
                w.samples[i] = static_cast<float>(std::max(-1.0, std::min(1.0, mono)));
            }
            return w;
        }

        // Skip unrelated chunks (LIST, fact, ...), honoring RIFF padding.
        f.seekg(size + (size % 2), std::ios::cur);
        if (!f) throw FormatError("read_wav: truncated chunk in " + path.string());
    }
}

}  // namespace fansim
