#include "fansim/fan_model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "fansim/errors.hpp"

namespace fansim {

void FanSpec::validate() const {
    if (blade_count < 2) throw ConfigError("fan: blade_count must be >= 2");
    if (!(rpm_min > 0.0) || !(rpm_min < rpm_max)) {
        throw ConfigError("fan: require 0 < rpm_min < rpm_max");
    }
    if (!(slew_rate > 0.0)) throw ConfigError("fan: slew_rate must be > 0");
    if (!(ref_amplitude > 0.0)) throw ConfigError("fan: ref_amplitude must be > 0");
    if (ref_rpm < rpm_min || ref_rpm > rpm_max) {
        throw ConfigError("fan: ref_rpm must lie within [rpm_min, rpm_max]");
    }
}

namespace {

void check_in_range(const FanSpec& spec, double rpm, const char* op) {
    if (rpm < spec.rpm_min || rpm > spec.rpm_max) {
        throw std::domain_error(std::string(op) + ": rpm " + std::to_string(rpm) +
                                " outside fan range [" + std::to_string(spec.rpm_min) + ", " +
                                std::to_string(spec.rpm_max) + "]");
    }
}

}  // namespace

double blade_pass_frequency(const FanSpec& spec, double rpm) {
    if (rpm < 0.0 || rpm > spec.rpm_max) {
        throw std::domain_error("blade_pass_frequency: rpm outside [0, rpm_max]");
    }
    return spec.blade_count * rpm / 60.0;
}

double amplitude_at(const FanSpec& spec, double rpm, double distance_m) {
    check_in_range(spec, rpm, "amplitude_at");
    const double d = std::max(distance_m, 1.0);
    return spec.ref_amplitude * std::pow(rpm / spec.ref_rpm, 2.5) / d;
}

std::vector<double> slew_trajectory(const FanSpec& spec, const FanState& state,
                                    double duration_s, double tick_s) {
    check_in_range(spec, state.current_rpm, "slew_trajectory");
    check_in_range(spec, state.target_rpm, "slew_trajectory");
    if (!(tick_s > 0.0)) throw std::domain_error("slew_trajectory: tick must be > 0");
    if (duration_s < 0.0) throw std::domain_error("slew_trajectory: duration must be >= 0");

    const double delta = state.target_rpm - state.current_rpm;
    const double direction = (delta >= 0.0) ? 1.0 : -1.0;
    const double ramp_time = std::abs(delta) / spec.slew_rate;

    const auto count = static_cast<std::size_t>(std::floor(duration_s / tick_s + 1e-9)) + 1;
    std::vector<double> rpm(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double t = static_cast<double>(i) * tick_s;
        rpm[i] = (t >= ramp_time) ? state.target_rpm
                                  : state.current_rpm + direction * spec.slew_rate * t;
    }
    return rpm;
}

double transition_time(const FanSpec& spec, double r0, double r1) {
    check_in_range(spec, r0, "transition_time");
    check_in_range(spec, r1, "transition_time");
    return std::abs(r1 - r0) / spec.slew_rate;
}

}  // namespace fansim
