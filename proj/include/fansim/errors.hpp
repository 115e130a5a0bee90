#pragma once

#include <stdexcept>
#include <string>

namespace fansim {

// Invalid configuration (bad fan spec, modulation parameters, config file).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Unsupported or malformed file contents (e.g. a WAV that is not 16-bit PCM).
class FormatError : public std::runtime_error {
public:
    explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fansim
