#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "fansim/channel_sim.hpp"
#include "fansim/errors.hpp"
#include "test_helpers.hpp"

using namespace fansim;
namespace fs = std::filesystem;

namespace {

FanSpec quiet_fan() {
    FanSpec fan;
    fan.blade_count = 7;
    fan.rpm_min = 1000.0;
    fan.rpm_max = 4500.0;
    fan.slew_rate = 600.0;
    fan.ref_rpm = 1000.0;
    fan.ref_amplitude = 0.05;
    return fan;
}

ChannelConfig clean_channel() {
    ChannelConfig ch;
    ch.sample_rate = 44100.0;
    ch.distance_m = 1.0;
    ch.harmonic_count = 1;
    ch.harmonic_rolloff = 0.35;
    ch.broadband_level = 0.0;
    ch.ambient_noise_amplitude = 0.0;
    ch.noise_seed = 7;
    return ch;
}

struct TempFile {
    fs::path path;
    explicit TempFile(const char* name) : path(fs::temp_directory_path() / name) {}
    ~TempFile() { std::error_code ec; fs::remove(path, ec); }
};

}  // namespace

TEST_SUITE("channel_sim") {

TEST_CASE("steady 1000 rpm synthesizes a pure blade tone at 116.67 Hz") {
    const FanSpec fan = quiet_fan();
    const ChannelConfig ch = clean_channel();
    RpmSchedule schedule;
    schedule.segments = {{1000.0, 2.0}};

    const Waveform w = synthesize(schedule, fan, ch);
    CHECK(w.sample_rate == 44100.0);
    CHECK(w.samples.size() == 2 * 44100);

    const double peak = testutil::peak_frequency(testutil::middle(w.samples), w.sample_rate,
                                                 50.0, 300.0, 0.25);
    CHECK(peak == doctest::Approx(116.67).epsilon(0.01));  // within +-1 Hz

    // a single-harmonic noiseless tone has RMS = A / sqrt(2)
    const double a = amplitude_at(fan, 1000.0, ch.distance_m);
    CHECK(testutil::rms(testutil::middle(w.samples)) == doctest::Approx(a / std::sqrt(2.0)).epsilon(1e-3));
}

TEST_CASE("alternating schedule shows both blade tones in sequence") {
    const FanSpec fan = quiet_fan();  // 600 rpm/s -> one-second transitions
    const ChannelConfig ch = clean_channel();
    ModulationConfig mod;
    mod.scheme = Scheme::fsk;
    mod.rpm_zero = 1000.0;
    mod.rpm_one = 1600.0;
    mod.symbol_duration = 1.0;
    mod.carrier_band = {100.0, 250.0};
    const auto schedule = modulate({1, 0, 1, 0, 1, 0}, mod);

    const Waveform w = synthesize(schedule, fan, ch);
    const double slot = 2.0;  // 1 s transit + 1 s dwell
    const auto rate = w.sample_rate;
    for (int k = 0; k < 6; ++k) {
        // probe the last half second of each slot, where the rotor has settled
        const auto begin = static_cast<std::size_t>(((k + 1) * slot - 0.5) * rate);
        const auto len = static_cast<std::size_t>(0.5 * rate);
        std::span<const float> window(w.samples.data() + begin, len);
        const double p_low = testutil::dft_amplitude(window, rate, 116.67);
        const double p_high = testutil::dft_amplitude(window, rate, 186.67);
        if (k % 2 == 0) {
            CHECK(p_high > 3.0 * p_low);
        } else {
            CHECK(p_low > 3.0 * p_high);
        }
    }
}

TEST_CASE("doubling the speed adds 15.05 dB of tone power") {
    const FanSpec fan = quiet_fan();
    const ChannelConfig ch = clean_channel();

    RpmSchedule slow, fast;
    slow.segments = {{1500.0, 2.0}};
    fast.segments = {{3000.0, 2.0}};
    const Waveform ws = synthesize(slow, fan, ch);
    const Waveform wf = synthesize(fast, fan, ch);

    const double a_slow = testutil::dft_amplitude(testutil::middle(ws.samples), 44100.0, 175.0);
    const double a_fast = testutil::dft_amplitude(testutil::middle(wf.samples), 44100.0, 350.0);
    const double gain_db = 20.0 * std::log10(a_fast / a_slow);
    CHECK(gain_db == doctest::Approx(15.05).epsilon(0.02));
}

TEST_CASE("identical seeds give bit-identical waveforms") {
    const FanSpec fan = quiet_fan();
    ChannelConfig ch = clean_channel();
    ch.broadband_level = 0.1;
    ch.ambient_noise_amplitude = 0.005;
    ch.noise_seed = 1234;
    RpmSchedule schedule;
    schedule.segments = {{1000.0, 0.5}, {1600.0, 0.5}};

    const Waveform a = synthesize(schedule, fan, ch);
    const Waveform b = synthesize(schedule, fan, ch);
    REQUIRE(a.samples.size() == b.samples.size());
    CHECK(a.samples == b.samples);

    ch.noise_seed = 1235;
    const Waveform c = synthesize(schedule, fan, ch);
    CHECK(a.samples != c.samples);
}

TEST_CASE("deterministic part scales exactly with inverse distance") {
    const FanSpec fan = quiet_fan();
    ChannelConfig near = clean_channel();
    near.harmonic_count = 3;
    near.distance_m = 2.0;
    ChannelConfig far = near;
    far.distance_m = 4.0;

    RpmSchedule schedule;
    schedule.segments = {{1000.0, 0.3}, {1600.0, 0.3}};
    const Waveform wn = synthesize(schedule, fan, near);
    const Waveform wf = synthesize(schedule, fan, far);
    REQUIRE(wn.samples.size() == wf.samples.size());

    double max_err = 0.0, max_abs = 0.0;
    for (std::size_t i = 0; i < wn.samples.size(); ++i) {
        max_err = std::max(max_err, std::abs(static_cast<double>(wn.samples[i]) - 2.0 * wf.samples[i]));
        max_abs = std::max(max_abs, std::abs(static_cast<double>(wn.samples[i])));
    }
    CHECK(max_err <= 1e-6 * max_abs);
}

TEST_CASE("in-band energy rises with steady speed") {
    const FanSpec fan = quiet_fan();
    const ChannelConfig ch = clean_channel();
    RpmSchedule s1, s2;
    s1.segments = {{2000.0, 1.0}};
    s2.segments = {{2500.0, 1.0}};
    const Waveform w1 = synthesize(s1, fan, ch);
    const Waveform w2 = synthesize(s2, fan, ch);
    // band energy proxied by the tone amplitude at each blade frequency
    const double e1 = testutil::dft_amplitude(testutil::middle(w1.samples), 44100.0, 233.33);
    const double e2 = testutil::dft_amplitude(testutil::middle(w2.samples), 44100.0, 291.67);
    CHECK(e2 > e1);
}

TEST_CASE("flow noise concentrates between 100 and 1000 Hz") {
    FanSpec fan = quiet_fan();
    fan.ref_amplitude = 0.01;
    ChannelConfig ch = clean_channel();
    ch.broadband_level = 1.0;
    ch.noise_seed = 99;
    RpmSchedule schedule;
    schedule.segments = {{3000.0, 2.0}};  // tone parked at 350 Hz

    const Waveform w = synthesize(schedule, fan, ch);
    const auto mid = testutil::middle(w.samples);
    // average a few probe tones per region to smooth the noise
    const auto level = [&](std::initializer_list<double> freqs) {
        double acc = 0.0;
        for (double f : freqs) acc += testutil::dft_amplitude(mid, 44100.0, f);
        return acc / static_cast<double>(freqs.size());
    };
    const double in_band = level({420.0, 540.0, 660.0, 780.0});
    const double below = level({15.0, 25.0, 35.0});
    const double above = level({5000.0, 7000.0, 9000.0});
    CHECK(in_band > 2.5 * below);
    CHECK(in_band > 2.5 * above);
}

TEST_CASE("ambient noise level matches its configured amplitude") {
    FanSpec fan = quiet_fan();
    fan.ref_amplitude = 1e-6;  // make the tone negligible
    ChannelConfig ch = clean_channel();
    ch.ambient_noise_amplitude = 0.1;
    ch.noise_seed = 4242;
    RpmSchedule schedule;
    schedule.segments = {{2000.0, 2.0}};

    const Waveform w = synthesize(schedule, fan, ch);
    CHECK(testutil::rms(testutil::middle(w.samples)) == doctest::Approx(0.1).epsilon(0.02));
}

TEST_CASE("mix that exceeds full scale is normalized by its peak") {
    FanSpec fan = quiet_fan();
    fan.ref_amplitude = 1.0;  // 4500 rpm would reach ~43x full scale
    const ChannelConfig ch = clean_channel();
    RpmSchedule schedule;
    schedule.segments = {{4500.0, 0.5}};

    SynthesisInfo info;
    const Waveform w = synthesize(schedule, fan, ch, &info);
    CHECK(info.peak > 1.0);
    CHECK(info.normalization == doctest::Approx(info.peak));
    double max_abs = 0.0;
    for (float s : w.samples) max_abs = std::max(max_abs, std::abs(static_cast<double>(s)));
    CHECK(max_abs <= 1.0);
    CHECK(max_abs == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("speed changes chirp instead of jumping phase") {
    const FanSpec fan = quiet_fan();
    const ChannelConfig ch = clean_channel();
    ModulationConfig mod;
    mod.rpm_zero = 1000.0;
    mod.rpm_one = 1600.0;
    mod.symbol_duration = 0.2;
    mod.carrier_band = {100.0, 250.0};
    const Waveform w = synthesize(modulate({1, 0, 1, 0}, mod), fan, ch);

    // a phase jump would step nearly two amplitudes between samples; a chirp
    // moves at most ~2*pi*f/fs of the carrier per sample
    const double a_max = amplitude_at(fan, 1600.0, 1.0);
    const double bound = a_max * 2.0 * std::numbers::pi * 190.0 / 44100.0 * 1.5;
    for (std::size_t i = 1; i < w.samples.size(); ++i) {
        CHECK(std::abs(static_cast<double>(w.samples[i]) - w.samples[i - 1]) <= bound);
    }
}

TEST_CASE("synthesize validates its inputs") {
    const FanSpec fan = quiet_fan();
    const ChannelConfig ch = clean_channel();
    RpmSchedule empty;
    CHECK_THROWS_AS(synthesize(empty, fan, ch), std::domain_error);

    RpmSchedule bad;
    bad.segments = {{900.0, 1.0}};  // below rpm_min
    CHECK_THROWS_AS(synthesize(bad, fan, ch), std::domain_error);

    ChannelConfig slow_rate = ch;
    slow_rate.sample_rate = 1000.0;  // tones would alias
    RpmSchedule ok;
    ok.segments = {{4500.0, 0.1}};
    CHECK_THROWS_AS(synthesize(ok, fan, slow_rate), ConfigError);
}

TEST_CASE("one second of silence writes 44100 zero samples / 88200 data bytes") {
    TempFile tmp("fansim_silence.wav");
    Waveform w;
    w.sample_rate = 44100.0;
    w.samples.assign(44100, 0.0f);
    write_wav(w, tmp.path);

    CHECK(fs::file_size(tmp.path) == 44u + 88200u);
    std::ifstream f(tmp.path, std::ios::binary);
    std::vector<unsigned char> head(44);
    f.read(reinterpret_cast<char*>(head.data()), 44);
    CHECK(std::string(head.begin(), head.begin() + 4) == "RIFF");
    CHECK(std::string(head.begin() + 8, head.begin() + 12) == "WAVE");
    const auto data_size = static_cast<std::uint32_t>(head[40] | (head[41] << 8) |
                                                      (head[42] << 16) | (head[43] << 24));
    CHECK(data_size == 88200u);

    const Waveform r = read_wav(tmp.path);
    CHECK(r.sample_rate == 44100.0);
    REQUIRE(r.samples.size() == 44100);
    for (float s : r.samples) CHECK(s == 0.0f);
}

TEST_CASE("full-scale samples store 32767 and read back as 1.0") {
    TempFile tmp("fansim_fullscale.wav");
    Waveform w;
    w.sample_rate = 8000.0;
    w.samples = {1.0f, -1.0f, 0.0f};
    write_wav(w, tmp.path);

    std::ifstream f(tmp.path, std::ios::binary);
    f.seekg(44);
    std::int16_t raw[3];
    f.read(reinterpret_cast<char*>(raw), sizeof raw);
    CHECK(raw[0] == 32767);
    CHECK(raw[1] == -32767);
    CHECK(raw[2] == 0);

    const Waveform r = read_wav(tmp.path);
    CHECK(r.samples[0] == doctest::Approx(1.0));
    CHECK(r.samples[1] == doctest::Approx(-1.0));
}

TEST_CASE("wav round-trip stays within one quantization step") {
    TempFile tmp("fansim_roundtrip.wav");
    const FanSpec fan = quiet_fan();
    RpmSchedule schedule;
    schedule.segments = {{1600.0, 0.25}};
    const Waveform w = synthesize(schedule, fan, clean_channel());
    write_wav(w, tmp.path);
    const Waveform r = read_wav(tmp.path);

    CHECK(r.sample_rate == w.sample_rate);
    REQUIRE(r.samples.size() == w.samples.size());
    for (std::size_t i = 0; i < w.samples.size(); ++i) {
        CHECK(std::abs(static_cast<double>(r.samples[i]) - w.samples[i]) <= 2.0 / 65536.0);
    }
}

TEST_CASE("stereo input with identical channels reads like mono") {
    TempFile tmp("fansim_stereo.wav");
    // hand-built stereo PCM file: three frames, L == R
    std::vector<unsigned char> buf;
    auto u16 = [&](std::uint16_t v) { buf.push_back(v & 0xff); buf.push_back(v >> 8); };
    auto u32 = [&](std::uint32_t v) { for (int i = 0; i < 4; ++i) buf.push_back((v >> (8 * i)) & 0xff); };
    const std::int16_t frames[3] = {1000, -2000, 32767};
    buf.insert(buf.end(), {'R', 'I', 'F', 'F'});
    u32(36 + 12);
    buf.insert(buf.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
    u32(16);
    u16(1);
    u16(2);  // stereo
    u32(8000);
    u32(8000 * 4);
    u16(4);
    u16(16);
    buf.insert(buf.end(), {'d', 'a', 't', 'a'});
    u32(12);
    for (std::int16_t v : frames) {
        u16(static_cast<std::uint16_t>(v));
        u16(static_cast<std::uint16_t>(v));
    }
    std::ofstream(tmp.path, std::ios::binary)
        .write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));

    const Waveform r = read_wav(tmp.path);
    REQUIRE(r.samples.size() == 3);
    CHECK(r.samples[0] == doctest::Approx(1000.0 / 32767.0));
    CHECK(r.samples[1] == doctest::Approx(-2000.0 / 32767.0));
    CHECK(r.samples[2] == doctest::Approx(1.0));
}

TEST_CASE("malformed wav files raise format errors") {
    TempFile tmp("fansim_broken.wav");
    std::ofstream(tmp.path, std::ios::binary) << "RIFFxxxx";  // truncated header
    CHECK_THROWS_AS(read_wav(tmp.path), FormatError);

    std::ofstream(tmp.path, std::ios::binary) << "this is not a wav file at all";
    CHECK_THROWS_AS(read_wav(tmp.path), FormatError);

    CHECK_THROWS_AS(read_wav(fs::temp_directory_path() / "fansim_missing.wav"),
                    std::runtime_error);
}

}  // TEST_SUITE
