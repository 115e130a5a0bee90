#include "fansim/modulator.hpp"

#include <stdexcept>
#include <utility>

#include "fansim/errors.hpp"

namespace fansim {

void ModulationConfig::validate(const FanSpec& fan) const {
    if (rpm_zero == rpm_one) throw ConfigError("modulation: rpm_zero must differ from rpm_one");
    if (rpm_zero < fan.rpm_min || rpm_zero > fan.rpm_max || rpm_one < fan.rpm_min ||
        rpm_one > fan.rpm_max) {
        throw ConfigError("modulation: symbol speeds outside fan range");
    }
    if (symbol_duration < 0.0) throw ConfigError("modulation: symbol_duration must be >= 0");
    if (!(carrier_band.low_hz < carrier_band.high_hz)) {
        throw ConfigError("modulation: carrier band requires low < high");
    }
    if (scheme == Scheme::fsk) {
        const double f0 = blade_pass_frequency(fan, rpm_zero);
        const double f1 = blade_pass_frequency(fan, rpm_one);
        if (f0 < carrier_band.low_hz || f0 > carrier_band.high_hz || f1 < carrier_band.low_hz ||
            f1 > carrier_band.high_hz) {
            throw ConfigError("modulation: FSK tones fall outside carrier band");
        }
    }
}

double RpmSchedule::total_hold_seconds() const {
    double sum = 0.0;
    for (const auto& seg : segments) sum += seg.hold_seconds;
    return sum;
}

RpmSchedule modulate(const BitStream& bits, const ModulationConfig& cfg) {
    if (bits.empty()) throw std::domain_error("modulate: empty bit stream");

    RpmSchedule schedule;
    schedule.segments.reserve(bits.size());
    for (std::uint8_t bit : bits) {
        schedule.segments.push_back({bit ? cfg.rpm_one : cfg.rpm_zero, cfg.symbol_duration});
    }
    return schedule;
}

double transmission_time(std::size_t n_bits, double tr_seconds, double t_seconds) {
    if (tr_seconds < 0.0 || t_seconds < 0.0) {
        throw std::domain_error("transmission_time: negative timing");
    }
    return static_cast<double>(n_bits) * (tr_seconds + t_seconds);
}

ModulationConfig invert_polarity(ModulationConfig cfg) {
    std::swap(cfg.rpm_zero, cfg.rpm_one);
    return cfg;
}

}  // namespace fansim
