#include "fansim/experiment.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fansim/dsp.hpp"
#include "fansim/errors.hpp"
#include "fansim/framing.hpp"

namespace fansim {

double ExperimentConfig::transition_budget() const {
    return transition_time(fan, modulation.rpm_zero, modulation.rpm_one);
}

double ExperimentConfig::symbol_period() const {
    return transition_budget() + modulation.symbol_duration;
}

double ExperimentConfig::bits_per_minute() const {
    // 60*n / transmission_time(n, TR, T); n cancels.
    return 60.0 / symbol_period();
}

void ExperimentConfig::validate() const {
    fan.validate();
    modulation.validate(fan);
    channel.validate();
    demod.validate(channel.sample_rate);
    if (trials < 1) throw ConfigError("experiment: trials must be >= 1");
    if (!seeds.empty() && seeds.size() != trials) {
        throw ConfigError("experiment: seeds length must equal trials");
    }
}

void finalize_demod(ExperimentConfig& cfg) {
    DemodConfig& d = cfg.demod;
    if (d.symbol_period <= 0.0) d.symbol_period = cfg.symbol_period();
    if (d.transition_time <= 0.0) d.transition_time = cfg.transition_budget();
    if (d.band.low_hz == 0.0 && d.band.high_hz == 0.0) d.band = cfg.modulation.carrier_band;
    d.scheme = cfg.modulation.scheme;
    if (cfg.modulation.scheme == Scheme::fsk && !d.expected_f0 && !d.expected_f1) {
        d.expected_f0 = blade_pass_frequency(cfg.fan, cfg.modulation.rpm_zero);
        d.expected_f1 = blade_pass_frequency(cfg.fan, cfg.modulation.rpm_one);
    }
}

namespace {

ExperimentConfig make_preset(double slew, double rpm_zero, double rpm_one, double symbol_t,
                             Band band, double window, double hop) {
    ExperimentConfig cfg;
    cfg.fan.blade_count = 7;
    cfg.fan.rpm_min = 1000.0;
    cfg.fan.rpm_max = 4500.0;
    cfg.fan.slew_rate = slew;
    cfg.fan.ref_rpm = 1000.0;
    cfg.fan.ref_amplitude = 0.02;  // headroom so high speeds stay inside [-1, 1]

    cfg.modulation.scheme = Scheme::fsk;
    cfg.modulation.rpm_zero = rpm_zero;
    cfg.modulation.rpm_one = rpm_one;
    cfg.modulation.symbol_duration = symbol_t;
    cfg.modulation.carrier_band = band;

    cfg.channel.sample_rate = 44100.0;
    cfg.channel.distance_m = 1.0;
    cfg.channel.harmonic_count = 3;
    cfg.channel.harmonic_rolloff = 0.35;
    cfg.channel.broadband_level = 0.0;
    cfg.channel.ambient_noise_amplitude = 0.0;
    cfg.channel.noise_seed = 1;

    cfg.demod.target_rate = 2000.0;
    cfg.demod.window_length = window;
    cfg.demod.hop = hop;
    cfg.demod.sync_threshold = 0.75;
    cfg.trials = 100;

    finalize_demod(cfg);
    cfg.validate();
    return cfg;
}

}  // namespace

std::vector<std::string> preset_names() { return {"fig7", "fig8", "fig9", "fig10"}; }

ExperimentConfig preset(const std::string& name) {
    // Slew rates are back-solved from each experiment's per-bit timing:
    // TR = 10, 4, 6, 6 seconds respectively.
    if (name == "fig7") return make_preset(60.0, 1000.0, 1600.0, 10.0, {100.0, 250.0}, 1.0, 0.25);
    if (name == "fig8") return make_preset(62.5, 4000.0, 4250.0, 0.0, {400.0, 600.0}, 0.5, 0.1);
    if (name == "fig9") return make_preset(500.0 / 6.0, 2000.0, 2500.0, 0.0, {200.0, 350.0}, 0.5, 0.1);
    if (name == "fig10") return make_preset(400.0 / 6.0, 4100.0, 4500.0, 0.0, {400.0, 600.0}, 0.5, 0.1);
    throw ConfigError("unknown preset '" + name + "' (have fig7, fig8, fig9, fig10)");
}

std::vector<std::uint8_t> random_payload(std::size_t n_bytes, std::uint64_t seed) {
    std::vector<std::uint8_t> out(n_bytes);
    std::uint64_t state = seed ^ 0x7061796c6f616421ULL;
    std::uint64_t word = 0;
    for (std::size_t i = 0; i < n_bytes; ++i) {
        if (i % 8 == 0) word = dsp::splitmix64(state);
        out[i] = static_cast<std::uint8_t>(word >> ((i % 8) * 8));
    }
    return out;
}

std::size_t count_bit_errors(std::span<const std::uint8_t> sent,
                             std::span<const std::uint8_t> recovered) {
    std::size_t errors = 0;
    for (std::size_t i = 0; i < sent.size(); ++i) {
        if (i < recovered.size()) {
            errors += static_cast<std::size_t>(std::popcount(static_cast<unsigned>(sent[i] ^ recovered[i])));
        } else {
            errors += 8;
        }
    }
    return errors;
}

LoopbackResult run_loopback(const ExperimentConfig& cfg, std::span<const std::uint8_t> payload,
                            std::uint64_t noise_seed, double lead_in_silence_s) {
    LoopbackResult result;
    result.n_bits = payload.size() * 8;
    if (payload.empty()) return result;

    const BitStream bits = encode_frames(payload);
    const RpmSchedule schedule = modulate(bits, cfg.modulation);

    ChannelConfig ch = cfg.channel;
    ch.noise_seed = noise_seed;
    Waveform wave = synthesize(schedule, cfg.fan, ch);

    if (lead_in_silence_s > 0.0) {
        const auto lead = static_cast<std::size_t>(std::llround(lead_in_silence_s * wave.sample_rate));
        wave.samples.insert(wave.samples.begin(), lead, 0.0f);
    }

    const DemodResult rx = demodulate(wave, cfg.demod);
    result.sync_found = rx.sync.has_value();
    if (rx.sync) result.sync_offset = rx.sync->offset_seconds;

    const DecodedFrames decoded = decode_frames(rx.bits, payload.size());
    result.recovered = decoded.payload;
    result.bit_errors = count_bit_errors(payload, result.recovered);
    return result;
}

double inband_snr_db(const ExperimentConfig& cfg) {
    const double sigma = cfg.channel.ambient_noise_amplitude;
    if (sigma <= 0.0) return std::numeric_limits<double>::infinity();
    const double a_weak = std::min(amplitude_at(cfg.fan, cfg.modulation.rpm_zero, cfg.channel.distance_m),
                                   amplitude_at(cfg.fan, cfg.modulation.rpm_one, cfg.channel.distance_m));
    const double carrier_power = 0.5 * a_weak * a_weak;
    const double band_hz = cfg.demod.band.high_hz - cfg.demod.band.low_hz;
    const double noise_power = sigma * sigma * band_hz / (0.5 * cfg.channel.sample_rate);
    return 10.0 * std::log10(carrier_power / noise_power);
}

double ambient_amplitude_for_snr_db(const ExperimentConfig& cfg, double snr_db) {
    const double a_weak = std::min(amplitude_at(cfg.fan, cfg.modulation.rpm_zero, cfg.channel.distance_m),
                                   amplitude_at(cfg.fan, cfg.modulation.rpm_one, cfg.channel.distance_m));
    const double carrier_power = 0.5 * a_weak * a_weak;
    const double band_hz = cfg.demod.band.high_hz - cfg.demod.band.low_hz;
    const double noise_power = carrier_power / std::pow(10.0, snr_db / 10.0);
    return std::sqrt(noise_power * 0.5 * cfg.channel.sample_rate / band_hz);
}

SweepAxis sweep_axis_from_string(const std::string& s) {
    if (s == "distance") return SweepAxis::distance;
    if (s == "noise") return SweepAxis::noise;
    if (s == "T" || s == "symbol-duration") return SweepAxis::symbol_duration;
    throw ConfigError("unknown sweep axis '" + s + "' (have distance, noise, T)");
}

std::string to_string(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::distance: return "distance";
        case SweepAxis::noise: return "noise";
        case SweepAxis::symbol_duration: return "T";
    }
    return "?";
}

SweepReport ber_sweep(const ExperimentConfig& cfg, SweepAxis axis,
                      const std::vector<double>& values, std::size_t payload_bytes) {
    if (values.empty()) throw ConfigError("ber_sweep: no axis values");
    cfg.validate();

    SweepReport report;
    report.axis = axis;

    for (double value : values) {
        ExperimentConfig point_cfg = cfg;
        switch (axis) {
            case SweepAxis::distance:
                point_cfg.channel.distance_m = value;
                break;
            case SweepAxis::noise:
                point_cfg.channel.ambient_noise_amplitude = value;
                break;
            case SweepAxis::symbol_duration:
                point_cfg.modulation.symbol_duration = value;
                point_cfg.demod.symbol_period = 0.0;  // re-derive from the new T
                finalize_demod(point_cfg);
                break;
        }
        point_cfg.validate();

        double ber_sum = 0.0;
        for (std::size_t t = 0; t < cfg.trials; ++t) {
            const std::uint64_t seed = cfg.seeds.empty() ? (t + 1) : cfg.seeds[t];
            const auto payload = random_payload(payload_bytes, seed);
            std::uint64_t noise_state = seed;
            const std::uint64_t noise_seed = dsp::splitmix64(noise_state) ^ 0xc4a11e5u;
            const LoopbackResult r = run_loopback(point_cfg, payload, noise_seed);
            report.records.push_back({value, seed, r.n_bits, r.bit_errors});
            ber_sum += r.ber();
        }
        SweepPoint point;
        point.axis_value = value;
        point.mean_ber = ber_sum / static_cast<double>(cfg.trials);
        point.bits_per_minute = point_cfg.bits_per_minute();
        report.points.push_back(point);
    }
    return report;
}

}  // namespace fansim
