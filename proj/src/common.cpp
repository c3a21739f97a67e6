#include "disscalc/common.hpp"

namespace disscalc {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::NotAnalytic: return "NotAnalytic";
    case ErrorKind::NotDissipative: return "NotDissipative";
    case ErrorKind::ConstantTermPresent: return "ConstantTermPresent";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::SolveFailure: return "SolveFailure";
    case ErrorKind::NyquistViolation: return "NyquistViolation";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::VersionMismatch: return "VersionMismatch";
    }
    return "Unknown";
}

}  // namespace disscalc
