#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fansim/experiment.hpp"

namespace fansim::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;  // invalid config / arguments
inline constexpr int kExitFormat = 3;  // unreadable or malformed input file
inline constexpr int kExitNoSync = 4;  // receiver never found a preamble

struct BpfRow {
    double rpm = 0.0;
    double bpf_hz = 0.0;
    long bpf_rounded = 0;  // rounded half away from zero
};

std::vector<BpfRow> bpf_table(int blade_count, const std::vector<double>& rpms);

// encode: payload -> RPM schedule (one JSON segment per line) + WAV, printing
// the on-air timing. An empty payload writes empty outputs with a warning.
int cmd_encode(const ExperimentConfig& cfg, const std::vector<std::uint8_t>& payload,
               const std::filesystem::path& wav_out, const std::filesystem::path& schedule_out,
               std::ostream& out, std::ostream& err);

// receive: WAV -> decode report (sync offset, calibration, per-symbol
// decisions, payload hex, frame errors). payload_len strips the final frame's
// padding when the caller knows the true length.
int cmd_receive(const ExperimentConfig& cfg, const std::filesystem::path& wav_in,
                std::optional<std::size_t> payload_len,
                const std::optional<std::filesystem::path>& json_out, std::ostream& out,
                std::ostream& err);

int cmd_bpf_table(int blade_count, const std::vector<double>& rpms, std::ostream& out);

// ber-sweep: seeded loopback trials along one axis; optionally writes one
// JSON record per trial for external plotting.
int cmd_ber_sweep(const ExperimentConfig& cfg, SweepAxis axis, const std::vector<double>& values,
                  std::size_t payload_bytes, const std::optional<std::filesystem::path>& records_out,
                  std::ostream& out, std::ostream& err);

int cmd_presets(const std::optional<std::string>& name, std::ostream& out);

}  // namespace fansim::cli
