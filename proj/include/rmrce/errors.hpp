#pragma once

#include <stdexcept>
#include <string>

namespace rmrce {

inline constexpr const char* kVersion = "0.1.0";

// Invalid arguments, malformed files, broken preconditions. The CLI maps
// these to exit code 1 with a single-line message.
class invalid_input : public std::runtime_error {
  public:
    explicit invalid_input(const std::string& msg) : std::runtime_error(msg) {}
};

// NaN/Inf escaping a numerical routine. The CLI maps these to exit code 2.
class numeric_error : public std::runtime_error {
  public:
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw invalid_input(msg);
}

} // namespace rmrce
