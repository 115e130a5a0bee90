#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fansim/cli.hpp"
#include "fansim/config_io.hpp"
#include "fansim/errors.hpp"

namespace {

using namespace fansim;

// --preset or --config, with optional scheme/distance/noise overrides.
struct ConfigArgs {
    std::string preset_name;
    std::string config_path;
    std::string scheme_override;
    double distance = -1.0;
    double ambient = -1.0;

    void attach(CLI::App* cmd) {
        auto* p = cmd->add_option("--preset", preset_name, "built-in parameter set (fig7..fig10)");
        auto* c = cmd->add_option("--config", config_path, "JSON config file");
        p->excludes(c);
        cmd->add_option("--scheme", scheme_override, "override scheme: ask or fsk");
        cmd->add_option("--distance", distance, "override simulated distance, meters");
        cmd->add_option("--ambient-noise", ambient, "override ambient noise amplitude");
    }

    ExperimentConfig resolve() const {
        ExperimentConfig cfg;
        if (!config_path.empty()) {
            cfg = load_config(config_path);
        } else if (!preset_name.empty()) {
            cfg = preset(preset_name);
        } else {
            throw ConfigError("need --preset or --config");
        }
        if (!scheme_override.empty()) {
            if (scheme_override == "ask") {
                cfg.modulation.scheme = Scheme::ask;
            } else if (scheme_override == "fsk") {
                cfg.modulation.scheme = Scheme::fsk;
            } else {
                throw ConfigError("unknown scheme '" + scheme_override + "'");
            }
            finalize_demod(cfg);
        }
        if (distance >= 0.0) cfg.channel.distance_m = distance;
        if (ambient >= 0.0) cfg.channel.ambient_noise_amplitude = ambient;
        cfg.validate();
        return cfg;
    }
};

std::vector<std::uint8_t> read_payload_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open payload file " + path);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

std::vector<std::uint8_t> parse_hex(const std::string& hex) {
    std::vector<std::uint8_t> bytes;
    std::string digits;
    for (char c : hex) {
        if (!std::isspace(static_cast<unsigned char>(c))) digits += c;
    }
    if (digits.size() % 2) throw ConfigError("hex payload needs an even digit count");
    for (std::size_t i = 0; i < digits.size(); i += 2) {
        bytes.push_back(static_cast<std::uint8_t>(std::stoul(digits.substr(i, 2), nullptr, 16)));
    }
    return bytes;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fansim: fan-noise covert-channel modem and acoustic channel simulator"};
    app.require_subcommand(1);

    // encode
    auto* encode = app.add_subcommand("encode", "payload -> RPM schedule + synthesized WAV");
    ConfigArgs encode_cfg;
    encode_cfg.attach(encode);
    std::string payload_file, payload_hex;
    std::string wav_out = "fansim.wav", schedule_out = "schedule.jsonl";
    encode->add_option("--payload-file", payload_file, "file whose bytes are transmitted");
    encode->add_option("--payload-hex", payload_hex, "payload as hex digits, e.g. 'eae0'");
    encode->add_option("--out-wav", wav_out, "output WAV path");
    encode->add_option("--out-schedule", schedule_out, "output schedule path (JSON lines)");

    // receive
    auto* receive = app.add_subcommand("receive", "WAV -> decode report");
    ConfigArgs receive_cfg;
    receive_cfg.attach(receive);
    std::string wav_in, report_json;
    std::size_t payload_len = 0;
    receive->add_option("wav", wav_in, "recording to decode")->required();
    receive->add_option("--payload-len", payload_len, "known payload length, strips padding");
    receive->add_option("--json", report_json, "also write the report as JSON");

    // bpf-table
    auto* bpf = app.add_subcommand("bpf-table", "expected blade pass frequencies per RPM");
    int blades = 7;
    std::vector<double> rpms;
    bpf->add_option("--blades", blades, "blade count")->capture_default_str();
    bpf->add_option("--rpm", rpms, "speeds to tabulate")->required()->delimiter(',');

    // ber-sweep
    auto* sweep = app.add_subcommand("ber-sweep", "seeded loopback BER along one axis");
    ConfigArgs sweep_cfg;
    sweep_cfg.attach(sweep);
    std::string axis_name = "noise", records_out;
    std::vector<double> values;
    std::size_t payload_bytes = 3;
    std::size_t trials_override = 0;
    sweep->add_option("--axis", axis_name, "distance | noise | T")->capture_default_str();
    sweep->add_option("--values", values, "axis values")->required()->delimiter(',');
    sweep->add_option("--trials", trials_override, "trials per point");
    sweep->add_option("--payload-bytes", payload_bytes, "random payload size per trial")
        ->capture_default_str();
    sweep->add_option("--records", records_out, "write per-trial JSON records here");

    // presets
    auto* presets = app.add_subcommand("presets", "list presets or dump one as JSON");
    std::string preset_to_dump;
    presets->add_option("name", preset_to_dump, "preset to dump");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : fansim::cli::kExitConfig;
    }

    try {
        if (encode->parsed()) {
            std::vector<std::uint8_t> payload;
            if (!payload_file.empty()) payload = read_payload_file(payload_file);
            if (!payload_hex.empty()) {
                const auto hex_bytes = parse_hex(payload_hex);
                payload.insert(payload.end(), hex_bytes.begin(), hex_bytes.end());
            }
            return fansim::cli::cmd_encode(encode_cfg.resolve(), payload, wav_out, schedule_out,
                                           std::cout, std::cerr);
        }
        if (receive->parsed()) {
            std::optional<std::size_t> len;
            if (payload_len > 0) len = payload_len;
            std::optional<std::filesystem::path> json_path;
            if (!report_json.empty()) json_path = report_json;
            return fansim::cli::cmd_receive(receive_cfg.resolve(), wav_in, len, json_path,
                                            std::cout, std::cerr);
        }
        if (bpf->parsed()) {
            return fansim::cli::cmd_bpf_table(blades, rpms, std::cout);
        }
        if (sweep->parsed()) {
            ExperimentConfig cfg = sweep_cfg.resolve();
            if (trials_override > 0) {
                cfg.trials = trials_override;
                cfg.seeds.clear();
            }
            std::optional<std::filesystem::path> records;
            if (!records_out.empty()) records = records_out;
            return fansim::cli::cmd_ber_sweep(cfg, sweep_axis_from_string(axis_name), values,
                                              payload_bytes, records, std::cout, std::cerr);
        }
        if (presets->parsed()) {
            std::optional<std::string> name;
            if (!preset_to_dump.empty()) name = preset_to_dump;
            return fansim::cli::cmd_presets(name, std::cout);
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return fansim::cli::kExitConfig;
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return fansim::cli::kExitFormat;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
