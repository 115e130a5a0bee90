#include "fansim/config_io.hpp"

#include <fstream>

#include "fansim/errors.hpp"

namespace fansim {

namespace {

using nlohmann::json;

Scheme scheme_from_string(const std::string& s) {
    if (s == "ask" || s == "ASK") return Scheme::ask;
    if (s == "fsk" || s == "FSK") return Scheme::fsk;
    throw ConfigError("config: unknown scheme '" + s + "'");
}

Band band_from_json(const json& j, const char* where) {
    if (!j.is_array() || j.size() != 2) {
        throw ConfigError(std::string("config: ") + where + " must be [low_hz, high_hz]");
    }
    return Band{j[0].get<double>(), j[1].get<double>()};
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
    if (auto it = j.find(key); it != j.end()) out = it->get<T>();
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig cfg;

    if (auto it = j.find("fan"); it != j.end()) {
        const json& f = *it;
        maybe(f, "blade_count", cfg.fan.blade_count);
        maybe(f, "rpm_min", cfg.fan.rpm_min);
        maybe(f, "rpm_max", cfg.fan.rpm_max);
        maybe(f, "slew_rate", cfg.fan.slew_rate);
        maybe(f, "ref_rpm", cfg.fan.ref_rpm);
        maybe(f, "ref_amplitude", cfg.fan.ref_amplitude);
    }

    if (auto it = j.find("modulation"); it != j.end()) {
        const json& m = *it;
        if (m.contains("scheme")) cfg.modulation.scheme = scheme_from_string(m["scheme"].get<std::string>());
        maybe(m, "rpm_zero", cfg.modulation.rpm_zero);
        maybe(m, "rpm_one", cfg.modulation.rpm_one);
        maybe(m, "symbol_duration", cfg.modulation.symbol_duration);
        if (m.contains("carrier_band")) {
            cfg.modulation.carrier_band = band_from_json(m["carrier_band"], "modulation.carrier_band");
        }
    } else {
        throw ConfigError("config: missing modulation section");
    }

    if (auto it = j.find("channel"); it != j.end()) {
        const json& c = *it;
        maybe(c, "sample_rate", cfg.channel.sample_rate);
        maybe(c, "distance", cfg.channel.distance_m);
        maybe(c, "harmonic_count", cfg.channel.harmonic_count);
        maybe(c, "harmonic_rolloff", cfg.channel.harmonic_rolloff);
        maybe(c, "broadband_level", cfg.channel.broadband_level);
        maybe(c, "ambient_noise_amplitude", cfg.channel.ambient_noise_amplitude);
        maybe(c, "noise_seed", cfg.channel.noise_seed);
    }

    cfg.demod.band = {0.0, 0.0};  // derive from the carrier band unless given
    if (auto it = j.find("demod"); it != j.end()) {
        const json& d = *it;
        maybe(d, "target_rate", cfg.demod.target_rate);
        if (d.contains("band")) cfg.demod.band = band_from_json(d["band"], "demod.band");
        maybe(d, "symbol_period", cfg.demod.symbol_period);
        maybe(d, "transition_time", cfg.demod.transition_time);
        maybe(d, "window_length", cfg.demod.window_length);
        maybe(d, "hop", cfg.demod.hop);
        maybe(d, "sync_threshold", cfg.demod.sync_threshold);
        if (d.contains("expected_f0")) cfg.demod.expected_f0 = d["expected_f0"].get<double>();
        if (d.contains("expected_f1")) cfg.demod.expected_f1 = d["expected_f1"].get<double>();
    }

    if (auto it = j.find("experiment"); it != j.end()) {
        const json& e = *it;
        maybe(e, "trials", cfg.trials);
        if (e.contains("seeds")) cfg.seeds = e["seeds"].get<std::vector<std::uint64_t>>();
    }

    finalize_demod(cfg);
    cfg.validate();
    return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["fan"] = {
        {"blade_count", cfg.fan.blade_count}, {"rpm_min", cfg.fan.rpm_min},
        {"rpm_max", cfg.fan.rpm_max},         {"slew_rate", cfg.fan.slew_rate},
        {"ref_rpm", cfg.fan.ref_rpm},         {"ref_amplitude", cfg.fan.ref_amplitude},
    };
    j["modulation"] = {
        {"scheme", cfg.modulation.scheme == Scheme::ask ? "ask" : "fsk"},
        {"rpm_zero", cfg.modulation.rpm_zero},
        {"rpm_one", cfg.modulation.rpm_one},
        {"symbol_duration", cfg.modulation.symbol_duration},
        {"carrier_band", {cfg.modulation.carrier_band.low_hz, cfg.modulation.carrier_band.high_hz}},
    };
    j["channel"] = {
        {"sample_rate", cfg.channel.sample_rate},
        {"distance", cfg.channel.distance_m},
        {"harmonic_count", cfg.channel.harmonic_count},
        {"harmonic_rolloff", cfg.channel.harmonic_rolloff},
        {"broadband_level", cfg.channel.broadband_level},
        {"ambient_noise_amplitude", cfg.channel.ambient_noise_amplitude},
        {"noise_seed", cfg.channel.noise_seed},
    };
    j["demod"] = {
        {"target_rate", cfg.demod.target_rate},
        {"band", {cfg.demod.band.low_hz, cfg.demod.band.high_hz}},
        {"symbol_period", cfg.demod.symbol_period},
        {"transition_time", cfg.demod.transition_time},
        {"window_length", cfg.demod.window_length},
        {"hop", cfg.demod.hop},
        {"sync_threshold", cfg.demod.sync_threshold},
    };
    if (cfg.demod.expected_f0) j["demod"]["expected_f0"] = *cfg.demod.expected_f0;
    if (cfg.demod.expected_f1) j["demod"]["expected_f1"] = *cfg.demod.expected_f1;
    j["experiment"] = {{"trials", cfg.trials}};
    if (!cfg.seeds.empty()) j["experiment"]["seeds"] = cfg.seeds;
    return j;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("config: cannot open " + path.string());
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config: parse error in " + path.string() + ": " + e.what());
    }
    try {
        return config_from_json(j);
    } catch (const json::exception& e) {
        throw ConfigError("config: bad value in " + path.string() + ": " + e.what());
    }
}

}  // namespace fansim
