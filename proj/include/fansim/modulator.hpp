#pragma once

#include <cstddef>
#include <vector>

#include "fansim/fan_model.hpp"
#include "fansim/framing.hpp"

namespace fansim {

// Both schemes drive the fan through the same two-speed schedule; they differ
// only in what the receiver measures (band energy vs. dominant tone).
enum class Scheme { ask, fsk };

struct Band {
    double low_hz = 0.0;
    double high_hz = 0.0;
};

struct ModulationConfig {
    Scheme scheme = Scheme::fsk;
    double rpm_zero = 0.0;       // R0, fan speed representing '0'
    double rpm_one = 0.0;        // R1, fan speed representing '1'
    double symbol_duration = 0;  // T, seconds held at the commanded speed
    Band carrier_band;           // expected acoustic band Fc (Fa..Fb)

    // Throws ConfigError on violated invariants. For FSK both steady tones
    // must fall inside carrier_band.
    void validate(const FanSpec& fan) const;
};

struct RpmSegment {
    double target_rpm = 0.0;
    double hold_seconds = 0.0;
};

// Timed sequence of target-RPM commands; the transmitter's output.
struct RpmSchedule {
    std::vector<RpmSegment> segments;

    double total_hold_seconds() const;
};

// One segment per bit: (rpm_zero, T) for '0', (rpm_one, T) for '1'.
// Adjacent equal symbols keep their own segments so the receiver can slice
// at a fixed symbol period.
RpmSchedule modulate(const BitStream& bits, const ModulationConfig& cfg);

// Seconds to transmit n bits: n * (TR + T).
double transmission_time(std::size_t n_bits, double tr_seconds, double t_seconds);

// Swaps which speed carries '0' and which carries '1' (useful when the fan
// idles fast and the louder level should be the resting one).
ModulationConfig invert_polarity(ModulationConfig cfg);

}  // namespace fansim
