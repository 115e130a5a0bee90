#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fansim/channel_sim.hpp"
#include "fansim/demodulator.hpp"
#include "fansim/fan_model.hpp"
#include "fansim/modulator.hpp"

namespace fansim {

// Everything one end-to-end run needs: the transmitting fan, how bits map to
// speeds, the acoustic channel, and the receiver settings.
struct ExperimentConfig {
    FanSpec fan;
    ModulationConfig modulation;
    ChannelConfig channel;
    DemodConfig demod;
    std::size_t trials = 1;
    std::vector<std::uint64_t> seeds;  // per-trial seeds; empty means 1..trials

    // Rotor transit time between the two symbol speeds.
    double transition_budget() const;
    // TR + T, the on-air slot per symbol.
    double symbol_period() const;
    // Payload bits per minute implied by the timing (framing not counted,
    // matching how the reference experiments report their rates).
    double bits_per_minute() const;

    void validate() const;
};

// Fills derived receiver fields that are zero/unset: symbol_period,
// transition_time, tone hints (FSK), and the analysis band.
void finalize_demod(ExperimentConfig& cfg);

// Built-in parameter sets reproducing the reference experiments
// (fig7..fig10). Throws ConfigError for unknown names.
std::vector<std::string> preset_names();
ExperimentConfig preset(const std::string& name);

// ---------------------------------------------------------------------------
// Loopback harness

struct LoopbackResult {
    std::vector<std::uint8_t> recovered;
    std::size_t n_bits = 0;      // payload bits compared
    std::size_t bit_errors = 0;  // mismatched + missing payload bits
    bool sync_found = false;
    double sync_offset = 0.0;
    double ber() const { return n_bits ? static_cast<double>(bit_errors) / static_cast<double>(n_bits) : 0.0; }
};

std::vector<std::uint8_t> random_payload(std::size_t n_bytes, std::uint64_t seed);

// Bit errors between sent and recovered payloads; bytes the receiver never
// produced count as eight errors each.
std::size_t count_bit_errors(std::span<const std::uint8_t> sent,
                             std::span<const std::uint8_t> recovered);

// encode -> modulate -> synthesize -> demodulate -> decode, in memory.
// lead_in_silence_s seconds of silence are prepended before the receiver runs.
LoopbackResult run_loopback(const ExperimentConfig& cfg, std::span<const std::uint8_t> payload,
                            std::uint64_t noise_seed, double lead_in_silence_s = 0.0);

// ---------------------------------------------------------------------------
// In-band SNR (carrier power of the weaker symbol vs. ambient noise falling
// inside the receiver band)

double inband_snr_db(const ExperimentConfig& cfg);
double ambient_amplitude_for_snr_db(const ExperimentConfig& cfg, double snr_db);

// ---------------------------------------------------------------------------
// BER sweeps

enum class SweepAxis { distance, noise, symbol_duration };

SweepAxis sweep_axis_from_string(const std::string& s);
std::string to_string(SweepAxis axis);

struct SweepRecord {
    double axis_value = 0.0;
    std::uint64_t seed = 0;
    std::size_t n_bits = 0;
    std::size_t bit_errors = 0;
};

struct SweepPoint {
    double axis_value = 0.0;
    double mean_ber = 0.0;
    double bits_per_minute = 0.0;
};

struct SweepReport {
    SweepAxis axis = SweepAxis::noise;
    std::vector<SweepRecord> records;  // ordered by (axis value, seed)
    std::vector<SweepPoint> points;
};

// Runs cfg.trials seeded loopback trials of random payloads at every axis
// value. Summaries are recomputed from the records so plots regenerate from
// the raw lines alone.
SweepReport ber_sweep(const ExperimentConfig& cfg, SweepAxis axis,
                      const std::vector<double>& values, std::size_t payload_bytes = 3);

}  // namespace fansim
