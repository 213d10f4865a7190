#pragma once

#include <stdexcept>
#include <string>

namespace tf {

// Error categories mirror the status codes exposed by the C API.
enum class ErrorCode : int {
    ok = 0,
    invalid_argument = 1,
    constraint = 2,
    convergence = 3,
    admissibility = 4,
    quadrature = 5,
    branch = 6,
    io = 7,
    numerical = 8,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline constexpr double kPi = 3.14159265358979323846;

}  // namespace tf
