#include "fansim/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include <json.hpp>

#include "fansim/config_io.hpp"
#include "fansim/errors.hpp"
#include "fansim/framing.hpp"

namespace fansim::cli {

namespace {

std::string format(const char* fmt, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

std::string hex_of(const std::vector<std::uint8_t>& bytes) {
    std::string s;
    s.reserve(bytes.size() * 3);
    char buf[4];
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%02x", bytes[i]);
        if (i) s += ' ';
        s += buf;
    }
    return s;
}

}  // namespace

std::vector<BpfRow> bpf_table(int blade_count, const std::vector<double>& rpms) {
    FanSpec fan;
    fan.blade_count = blade_count;
    std::vector<BpfRow> rows;
    rows.reserve(rpms.size());
    for (double rpm : rpms) {
        fan.rpm_max = std::max(fan.rpm_max, rpm);  // table covers any speed asked about
        BpfRow row;
        row.rpm = rpm;
        row.bpf_hz = blade_pass_frequency(fan, rpm);
        row.bpf_rounded = std::lround(row.bpf_hz);
        rows.push_back(row);
    }
    return rows;
}

int cmd_bpf_table(int blade_count, const std::vector<double>& rpms, std::ostream& out) {
    out << "R (RPM)    BPF (Hz)\n";
    for (const auto& row : bpf_table(blade_count, rpms)) {
        out << format("%-10.0f", row.rpm) << row.bpf_rounded << "\n";
    }
    return kExitOk;
}

int cmd_encode(const ExperimentConfig& cfg, const std::vector<std::uint8_t>& payload,
               const std::filesystem::path& wav_out, const std::filesystem::path& schedule_out,
               std::ostream& out, std::ostream& err) {
    const BitStream bits = encode_frames(payload);

    std::ofstream schedule_file(schedule_out, std::ios::trunc);
    if (!schedule_file) {
        err << "encode: cannot write " << schedule_out.string() << "\n";
        return kExitFormat;
    }

    if (bits.empty()) {
        err << "encode: empty payload, writing empty schedule and waveform\n";
        schedule_file.close();
        Waveform silence;
        silence.sample_rate = cfg.channel.sample_rate;
        write_wav(silence, wav_out);
        out << "bits 0  frames 0  transmission 0.000 s\n";
        return kExitOk;
    }

    const RpmSchedule schedule = modulate(bits, cfg.modulation);
    for (const auto& seg : schedule.segments) {
        nlohmann::json line = {{"rpm", seg.target_rpm}, {"hold_seconds", seg.hold_seconds}};
        schedule_file << line.dump() << "\n";
    }
    schedule_file.close();

    SynthesisInfo info;
    const Waveform wave = synthesize(schedule, cfg.fan, cfg.channel, &info);
    write_wav(wave, wav_out);

    const double total = transmission_time(bits.size(), cfg.transition_budget(),
                                           cfg.modulation.symbol_duration);
    out << "payload " << payload.size() << " bytes  frames " << bits.size() / kFrameBits
        << "  bits " << bits.size() << "\n";
    out << "transmission " << format("%.3f", total) << " s  ("
        << format("%.3f", cfg.bits_per_minute()) << " payload bits/min)\n";
    out << "wav " << wav_out.string() << "  " << format("%.3f", wave.duration_seconds())
        << " s at " << format("%.0f", wave.sample_rate) << " Hz";
    if (info.normalization != 1.0) {
        out << "  (normalized by " << format("%.3f", info.normalization) << ")";
    }
    out << "\n";
    return kExitOk;
}

int cmd_receive(const ExperimentConfig& cfg, const std::filesystem::path& wav_in,
                std::optional<std::size_t> payload_len,
                const std::optional<std::filesystem::path>& json_out, std::ostream& out,
                std::ostream& err) {
    const Waveform wave = read_wav(wav_in);
    const DemodResult rx = demodulate(wave, cfg.demod);

    if (!rx.sync) {
        err << "receive: " << rx.diagnostic << "\n";
        return kExitNoSync;
    }

    const DecodedFrames decoded = decode_frames(rx.bits, payload_len);

    out << "sync offset " << format("%.3f", rx.sync->offset_seconds) << " s  score "
        << format("%.3f", rx.sync->score) << "\n";
    if (cfg.demod.scheme == Scheme::fsk) {
        out << "calibration f0 " << format("%.2f", rx.sync->calibration.level_zero)
            << " Hz  f1 " << format("%.2f", rx.sync->calibration.level_one) << " Hz\n";
    } else {
        out << "calibration a0 " << format("%.6g", rx.sync->calibration.level_zero) << "  a1 "
            << format("%.6g", rx.sync->calibration.level_one) << "\n";
    }

    out << "symbols " << rx.decisions.size() << ":\n";
    for (const auto& d : rx.decisions) {
        out << "  t=" << format("%9.3f", d.time_offset) << "  bit " << d.bit << "  confidence "
            << format("%.2f", d.confidence) << "\n";
    }

    out << "frames " << decoded.report.frames_total;
    if (decoded.report.trailing_bits) {
        out << "  (trailing fragment of " << decoded.report.trailing_bits << " bits)";
    }
    out << "\n";
    if (!decoded.report.preamble_errors.empty()) {
        out << "frame errors at indices:";
        for (std::size_t idx : decoded.report.preamble_errors) out << " " << idx;
        out << "\n";
    }
    out << "payload " << decoded.payload.size() << " bytes: " << hex_of(decoded.payload) << "\n";

    if (json_out) {
        nlohmann::json j;
        j["sync_offset_seconds"] = rx.sync->offset_seconds;
        j["sync_score"] = rx.sync->score;
        j["calibration"] = {{"level_zero", rx.sync->calibration.level_zero},
                            {"level_one", rx.sync->calibration.level_one}};
        j["bits"] = rx.bits;
        nlohmann::json symbols = nlohmann::json::array();
        for (const auto& d : rx.decisions) {
            symbols.push_back({{"bit", d.bit},
                               {"confidence", d.confidence},
                               {"time_offset", d.time_offset}});
        }
        j["symbols"] = std::move(symbols);
        j["frames_total"] = decoded.report.frames_total;
        j["frame_errors"] = decoded.report.preamble_errors;
        j["trailing_bits"] = decoded.report.trailing_bits;
        j["payload_hex"] = hex_of(decoded.payload);
        std::ofstream f(*json_out, std::ios::trunc);
        if (!f) {
            err << "receive: cannot write " << json_out->string() << "\n";
            return kExitFormat;
        }
        f << j.dump(2) << "\n";
    }
    return kExitOk;
}

int cmd_ber_sweep(const ExperimentConfig& cfg, SweepAxis axis, const std::vector<double>& values,
                  std::size_t payload_bytes, const std::optional<std::filesystem::path>& records_out,
                  std::ostream& out, std::ostream& err) {
    const SweepReport report = ber_sweep(cfg, axis, values, payload_bytes);

    if (records_out) {
        std::ofstream f(*records_out, std::ios::trunc);
        if (!f) {
            err << "ber-sweep: cannot write " << records_out->string() << "\n";
            return kExitFormat;
        }
        for (const auto& r : report.records) {
            nlohmann::json line = {{"axis", to_string(report.axis)},
                                   {"value", r.axis_value},
                                   {"seed", r.seed},
                                   {"n_bits", r.n_bits},
                                   {"bit_errors", r.bit_errors}};
            f << line.dump() << "\n";
        }
    }

    out << "axis " << to_string(report.axis) << "  trials " << cfg.trials << "  payload "
        << payload_bytes << " bytes\n";
    out << "value        mean BER   bits/min\n";
    for (const auto& p : report.points) {
        out << format("%-12.6g", p.axis_value) << " " << format("%-10.6f", p.mean_ber) << " "
            << format("%.3f", p.bits_per_minute) << "\n";
    }
    return kExitOk;
}

int cmd_presets(const std::optional<std::string>& name, std::ostream& out) {
    if (!name) {
        for (const auto& n : preset_names()) {
            const ExperimentConfig cfg = preset(n);
            out << n << ": R0 " << format("%.0f", cfg.modulation.rpm_zero) << "  R1 "
                << format("%.0f", cfg.modulation.rpm_one) << "  T "
                << format("%.0f", cfg.modulation.symbol_duration) << " s  TR "
                << format("%.0f", cfg.transition_budget()) << " s  "
                << format("%.0f", cfg.bits_per_minute()) << " bits/min\n";
        }
        return kExitOk;
    }
    out << config_to_json(preset(*name)).dump(2) << "\n";
    return kExitOk;
}

}  // namespace fansim::cli
