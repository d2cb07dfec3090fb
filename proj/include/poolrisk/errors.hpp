#pragma once

#include <stdexcept>
#include <string>

namespace poolrisk {

// Invalid or inconsistent configuration (CLI exit code 1).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A requested computation would not produce a finite, meaningful number, for
// example a premium whose distortion tail integral diverges (CLI exit code 2).
class RefusalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace poolrisk
