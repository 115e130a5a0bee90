#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "fansim/demodulator.hpp"
#include "fansim/errors.hpp"
#include "fansim/framing.hpp"
#include "test_helpers.hpp"

using namespace fansim;

namespace {

Waveform wave_of(std::vector<float> samples, double rate) {
    Waveform w;
    w.sample_rate = rate;
    w.samples = std::move(samples);
    return w;
}

}  // namespace

TEST_SUITE("demodulator") {

TEST_CASE("decimation keeps a 500 Hz tone intact at 2 kHz") {
    const Waveform src = wave_of(testutil::make_tone(500.0, 44100.0, 2.0, 0.5), 44100.0);
    const Waveform dst = decimate(src, 2000.0);

    CHECK(dst.sample_rate == 2000.0);
    const auto mid = testutil::middle(dst.samples);
    const double peak = testutil::peak_frequency(mid, 2000.0, 400.0, 600.0, 0.25);
    CHECK(std::abs(peak - 500.0) <= 1.0 / (static_cast<double>(mid.size()) / 2000.0));

    const double rms_in = testutil::rms(testutil::middle(src.samples));
    const double rms_out = testutil::rms(mid);
    CHECK(std::abs(20.0 * std::log10(rms_out / rms_in)) <= 1.0);
}

TEST_CASE("decimated silence is silence") {
    const Waveform src = wave_of(std::vector<float>(44100, 0.0f), 44100.0);
    const Waveform dst = decimate(src, 2000.0);
    for (float s : dst.samples) CHECK(std::abs(s) < 1e-12f);
}

TEST_CASE("a 950 Hz tone survives 44100 to 2000 decimation") {
    const Waveform src = wave_of(testutil::make_tone(950.0, 44100.0, 2.0, 0.5), 44100.0);
    const Waveform dst = decimate(src, 2000.0);
    const auto mid = testutil::middle(dst.samples);
    const double peak = testutil::peak_frequency(mid, 2000.0, 850.0, 999.0, 0.5);
    CHECK(std::abs(peak - 950.0) <= 2.0);
}

TEST_CASE("decimate rejects upsampling") {
    const Waveform src = wave_of(std::vector<float>(100, 0.0f), 2000.0);
    CHECK_THROWS_AS(decimate(src, 44100.0), std::domain_error);
}

TEST_CASE("bandpass keeps the passband flat and crushes the stopband") {
    const double rate = 2000.0;
    const Waveform in_band = wave_of(testutil::make_tone(500.0, rate, 4.0, 0.5), rate);
    const Waveform low = wave_of(testutil::make_tone(100.0, rate, 4.0, 0.5), rate);

    const Waveform bp_mid = bandpass(in_band, 400.0, 600.0);
    const Waveform bp_low = bandpass(low, 400.0, 600.0);

    const double gain_mid = 20.0 * std::log10(testutil::rms(testutil::middle(bp_mid.samples)) /
                                              testutil::rms(testutil::middle(in_band.samples)));
    CHECK(std::abs(gain_mid) <= 1.0);

    const double gain_low = 20.0 * std::log10(testutil::rms(testutil::middle(bp_low.samples)) /
                                              testutil::rms(testutil::middle(low.samples)));
    CHECK(gain_low <= -40.0);
}

TEST_CASE("bandpass of zero input is zero") {
    const Waveform z = wave_of(std::vector<float>(4000, 0.0f), 2000.0);
    const Waveform out = bandpass(z, 400.0, 600.0);
    for (float s : out.samples) CHECK(s == 0.0f);
}

TEST_CASE("bandpass validates its band") {
    const Waveform z = wave_of(std::vector<float>(4000, 0.0f), 2000.0);
    CHECK_THROWS_AS(bandpass(z, 0.0, 600.0), std::domain_error);
    CHECK_THROWS_AS(bandpass(z, 600.0, 400.0), std::domain_error);
    CHECK_THROWS_AS(bandpass(z, 400.0, 1000.0), std::domain_error);
}

TEST_CASE("band energy track is flat for a steady tone and zero for silence") {
    DemodConfig cfg;
    cfg.window_length = 0.25;
    cfg.hop = 0.05;
    cfg.symbol_period = 1.0;

    const Waveform tone = wave_of(testutil::make_tone(500.0, 2000.0, 3.0, 0.3), 2000.0);
    const TrackSeries track = band_energy_track(tone, cfg);
    REQUIRE(track.size() > 10);
    double mean = 0.0;
    for (double v : track.values) mean += v;
    mean /= static_cast<double>(track.size());
    double var = 0.0;
    for (double v : track.values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(track.size());
    CHECK(std::sqrt(var) / mean < 0.05);  // coefficient of variation under 5%

    const Waveform quiet = wave_of(std::vector<float>(6000, 0.0f), 2000.0);
    for (double v : band_energy_track(quiet, cfg).values) CHECK(v == 0.0);

    const Waveform tiny = wave_of(std::vector<float>(100, 0.0f), 2000.0);
    CHECK_THROWS_AS(band_energy_track(tiny, cfg), std::domain_error);
}

TEST_CASE("ask energy track alternates through a 101010 transmission") {
    auto cfg = testutil::fast_config(Scheme::ask);
    cfg.modulation.rpm_zero = 3000.0;
    cfg.modulation.rpm_one = 3500.0;
    cfg.modulation.carrier_band = {300.0, 450.0};
    cfg.demod.band = {300.0, 450.0};
    cfg.demod.expected_f0.reset();
    cfg.demod.expected_f1.reset();
    cfg.demod.symbol_period = 0.0;
    finalize_demod(cfg);
    cfg.validate();

    const auto schedule = modulate({1, 0, 1, 0, 1, 0}, cfg.modulation);
    const Waveform w = synthesize(schedule, cfg.fan, cfg.channel);
    const Waveform analysis = bandpass(decimate(w, 2000.0), 300.0, 450.0);
    const TrackSeries track = band_energy_track(analysis, cfg.demod);

    // sample each slot in its settled tail: high, low, high, low, ...
    const double P = cfg.demod.symbol_period;
    std::vector<double> level(6);
    for (int k = 0; k < 6; ++k) {
        const double t = (k + 1) * P - 0.5 * cfg.demod.window_length - 0.05;
        const auto idx = static_cast<std::size_t>(t / track.hop);
        level[static_cast<std::size_t>(k)] = track.values[std::min(idx, track.size() - 1)];
    }
    for (int k = 0; k + 1 < 6; ++k) {
        if (k % 2 == 0) {
            CHECK(level[static_cast<std::size_t>(k)] > 1.5 * level[static_cast<std::size_t>(k + 1)]);
        } else {
            CHECK(level[static_cast<std::size_t>(k)] < level[static_cast<std::size_t>(k + 1)] / 1.5);
        }
    }
}

TEST_CASE("dominant frequency track reads a steady 1600 rpm fan at 186.7 Hz") {
    auto cfg = testutil::fast_config(Scheme::fsk);
    cfg.demod.band = {100.0, 250.0};
    cfg.demod.expected_f0.reset();  // force the argmax estimator
    cfg.demod.expected_f1.reset();

    RpmSchedule schedule;
    schedule.segments = {{1600.0, 3.0}};
    const Waveform w = synthesize(schedule, cfg.fan, cfg.channel);
    const Waveform analysis = bandpass(decimate(w, 2000.0), 100.0, 250.0);
    const TrackSeries track = dominant_frequency_track(analysis, cfg.demod);

    const double resolution = 1.0 / cfg.demod.window_length;
    std::size_t checked = 0;
    for (std::size_t i = 2; i + 2 < track.size(); ++i) {
        REQUIRE(!std::isnan(track.values[i]));
        CHECK(std::abs(track.values[i] - 186.67) <= resolution);
        ++checked;
    }
    CHECK(checked > 10);
}

TEST_CASE("fsk track with hints alternates between the two expected tones") {
    auto cfg = testutil::fast_config(Scheme::fsk);
    const auto schedule = modulate({0, 1, 0, 1, 0, 1, 0, 1}, cfg.modulation);
    const Waveform w = synthesize(schedule, cfg.fan, cfg.channel);
    const Waveform analysis =
        bandpass(decimate(w, 2000.0), cfg.demod.band.low_hz, cfg.demod.band.high_hz);
    const TrackSeries track = dominant_frequency_track(analysis, cfg.demod);

    const double P = cfg.demod.symbol_period;
    for (int k = 0; k < 8; ++k) {
        const double t = (k + 1) * P - cfg.demod.window_length - 0.05;
        const auto idx = static_cast<std::size_t>(t / track.hop);
        const double f = track.values[std::min(idx, track.size() - 1)];
        const double expect = (k % 2 == 0) ? 466.67 : 495.83;
        CHECK(f == doctest::Approx(expect).epsilon(1e-3));
    }
}

TEST_CASE("silent windows are flagged as having no peak") {
    auto cfg = testutil::fast_config(Scheme::fsk);
    const Waveform quiet = wave_of(std::vector<float>(8000, 0.0f), 2000.0);
    const TrackSeries track = dominant_frequency_track(quiet, cfg.demod);
    for (double v : track.values) CHECK(std::isnan(v));
}

TEST_CASE("preamble detection finds a clean frame near its true offset") {
    const auto cfg = testutil::fast_config(Scheme::fsk);
    const auto bits = encode_frames(std::vector<std::uint8_t>{0x5C});
    const auto schedule = modulate(bits, cfg.modulation);
    const Waveform w = synthesize(schedule, cfg.fan, cfg.channel);
    const Waveform analysis =
        bandpass(decimate(w, 2000.0), cfg.demod.band.low_hz, cfg.demod.band.high_hz);
    const TrackSeries track = dominant_frequency_track(analysis, cfg.demod);

    const auto sync = detect_preamble(track, cfg.demod);
    REQUIRE(sync.has_value());
    CHECK(std::abs(sync->offset_seconds) <= 0.25 * cfg.demod.symbol_period);
    // calibration learned the two tones
    CHECK(sync->calibration.level_one == doctest::Approx(495.83).epsilon(1e-3));
    CHECK(sync->calibration.level_zero == doctest::Approx(466.67).epsilon(1e-3));
}

TEST_CASE("a constant track has no preamble") {
    DemodConfig cfg = testutil::fast_config(Scheme::fsk).demod;
    TrackSeries track;
    track.window_length = cfg.window_length;
    track.hop = cfg.hop;
    track.values.assign(400, 466.67);
    track.power.assign(400, 1.0);
    CHECK(!detect_preamble(track, cfg).has_value());
}

TEST_CASE("three seconds of lead-in silence shifts the detected offset by three seconds") {
    const auto cfg = testutil::fast_config(Scheme::fsk);
    const auto bits = encode_frames(std::vector<std::uint8_t>{0xA7});
    const auto schedule = modulate(bits, cfg.modulation);
    Waveform w = synthesize(schedule, cfg.fan, cfg.channel);

    const auto analyze = [&](const Waveform& wave) {
        const Waveform analysis =
            bandpass(decimate(wave, 2000.0), cfg.demod.band.low_hz, cfg.demod.band.high_hz);
        return detect_preamble(dominant_frequency_track(analysis, cfg.demod), cfg.demod);
    };

    const auto at_start = analyze(w);
    Waveform delayed = w;
    delayed.samples.insert(delayed.samples.begin(),
                           static_cast<std::size_t>(3.0 * w.sample_rate), 0.0f);
    const auto shifted = analyze(delayed);

    REQUIRE(at_start.has_value());
    REQUIRE(shifted.has_value());
    CHECK(std::abs((shifted->offset_seconds - at_start->offset_seconds) - 3.0) <=
          0.25 * cfg.demod.symbol_period);
}

TEST_CASE("demodulate returns the exact transmitted bits in a clean loopback") {
    for (Scheme scheme : {Scheme::fsk, Scheme::ask}) {
        CAPTURE(static_cast<int>(scheme));
        const auto cfg = testutil::fast_config(scheme);
        const std::vector<std::uint8_t> payload = {0xC3};
        const auto sent = encode_frames(payload);
        const auto schedule = modulate(sent, cfg.modulation);
        const Waveform w = synthesize(schedule, cfg.fan, cfg.channel);

        const DemodResult rx = demodulate(w, cfg.demod);
        REQUIRE(rx.sync.has_value());
        REQUIRE(rx.bits.size() >= sent.size());
        for (std::size_t i = 0; i < sent.size(); ++i) CHECK(rx.bits[i] == sent[i]);
        for (const auto& d : rx.decisions) CHECK(d.confidence > 0.5);

        const auto decoded = decode_frames(rx.bits, payload.size());
        CHECK(decoded.payload == payload);
    }
}

TEST_CASE("swapped transmit polarity decodes to the same payload") {
    const auto cfg = testutil::fast_config(Scheme::fsk);
    const std::vector<std::uint8_t> payload = {0x9E};
    const auto sent = encode_frames(payload);

    auto swapped = cfg.modulation;
    swapped = invert_polarity(swapped);
    const auto schedule = modulate(sent, swapped);
    const Waveform w = synthesize(schedule, cfg.fan, cfg.channel);

    const DemodResult rx = demodulate(w, cfg.demod);
    REQUIRE(rx.sync.has_value());
    // the preamble anchors which tone means '1', so the payload is unchanged
    CHECK(decode_frames(rx.bits, payload.size()).payload == payload);
    CHECK(rx.sync->calibration.level_one == doctest::Approx(466.67).epsilon(1e-3));
    CHECK(rx.sync->calibration.level_zero == doctest::Approx(495.83).epsilon(1e-3));
}

TEST_CASE("ask calibration orders its levels by speed") {
    const auto cfg = testutil::fast_config(Scheme::ask);
    const auto sent = encode_frames(std::vector<std::uint8_t>{0x3C});
    const Waveform w = synthesize(modulate(sent, cfg.modulation), cfg.fan, cfg.channel);
    const DemodResult rx = demodulate(w, cfg.demod);
    REQUIRE(rx.sync.has_value());
    CHECK(rx.sync->calibration.level_one > rx.sync->calibration.level_zero);
}

TEST_CASE("the chain is deterministic for a fixed waveform and config") {
    const auto cfg = testutil::fast_config(Scheme::fsk);
    const auto sent = encode_frames(std::vector<std::uint8_t>{0x77, 0x13});
    const Waveform w = synthesize(modulate(sent, cfg.modulation), cfg.fan, cfg.channel);
    const DemodResult a = demodulate(w, cfg.demod);
    const DemodResult b = demodulate(w, cfg.demod);
    CHECK(a.bits == b.bits);
    REQUIRE(a.sync.has_value());
    REQUIRE(b.sync.has_value());
    CHECK(a.sync->offset_seconds == b.sync->offset_seconds);
    CHECK(a.sync->calibration.level_one == b.sync->calibration.level_one);
}

TEST_CASE("pure silence reports preamble-not-found") {
    const auto cfg = testutil::fast_config(Scheme::fsk);
    const Waveform quiet = wave_of(std::vector<float>(44100 * 8, 0.0f), 44100.0);
    const DemodResult rx = demodulate(quiet, cfg.demod);
    CHECK(!rx.sync.has_value());
    CHECK(rx.bits.empty());
    CHECK(rx.diagnostic == "preamble not found");
}

TEST_CASE("demod config validation") {
    auto cfg = testutil::fast_config(Scheme::fsk).demod;
    CHECK_NOTHROW(cfg.validate(44100.0));

    auto bad = cfg;
    bad.target_rate = 96000.0;
    CHECK_THROWS_AS(bad.validate(44100.0), ConfigError);

    bad = cfg;
    bad.band = {400.0, 1200.0};  // above Nyquist of the analysis rate
    CHECK_THROWS_AS(bad.validate(44100.0), ConfigError);

    bad = cfg;
    bad.window_length = 0.01;  // cannot resolve 29 Hz tone spacing
    CHECK_THROWS_AS(bad.validate(44100.0), ConfigError);

    bad = cfg;
    bad.symbol_period = 0.0;
    CHECK_THROWS_AS(bad.validate(44100.0), ConfigError);
}

}  // TEST_SUITE
