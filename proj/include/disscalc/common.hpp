#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace disscalc {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr Complex kI{0.0, 1.0};

inline constexpr std::string_view kLibraryVersion = "0.1.0";

enum class ErrorKind {
    InvalidInput,
    NotAnalytic,
    NotDissipative,
    ConstantTermPresent,
    DimensionMismatch,
    SolveFailure,
    NyquistViolation,
    ConfigInvalid,
    VersionMismatch,
};

std::string_view to_string(ErrorKind kind);

/// Library-wide exception. `kind()` is stable and machine readable; the
/// message is for humans.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace disscalc
