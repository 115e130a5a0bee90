#pragma once

#include <vector>

namespace fansim {

// Physical description of a controllable cooling fan. ref_amplitude is the
// linear sound-pressure amplitude the fan produces at ref_rpm measured at
// one meter; everything else scales from that point.
struct FanSpec {
    int blade_count = 7;
    double rpm_min = 1000.0;
    double rpm_max = 4500.0;
    double slew_rate = 62.5;     // RPM per second of commanded speed change
    double ref_rpm = 1000.0;
    double ref_amplitude = 1.0;  // linear amplitude at ref_rpm, 1 m

    // Throws ConfigError when any invariant is violated.
    void validate() const;
};

struct FanState {
    double current_rpm = 0.0;
    double target_rpm = 0.0;
};

// Fundamental acoustic tone of the fan: blade_count * rpm / 60.
// Accepts 0 <= rpm <= spec.rpm_max (a stopped fan emits no tone).
double blade_pass_frequency(const FanSpec& spec, double rpm);

// Linear pressure amplitude at the given speed and distance. Noise power
// grows with the fifth power of rotation speed, so pressure amplitude goes
// as (rpm/ref_rpm)^2.5; free-field spreading divides by distance, clamped
// below one meter to the one-meter value.
double amplitude_at(const FanSpec& spec, double rpm, double distance_m);

// Sampled RPM-vs-time sequence: the rotor moves linearly from
// state.current_rpm toward state.target_rpm at spec.slew_rate, then holds.
// Samples are taken at t = 0, tick, 2*tick, ... up to duration (inclusive
// when duration is a multiple of tick).
std::vector<double> slew_trajectory(const FanSpec& spec, const FanState& state,
                                    double duration_s, double tick_s);

// Seconds for the rotor to transfer between two speeds; symmetric.
double transition_time(const FanSpec& spec, double r0, double r1);

}  // namespace fansim
