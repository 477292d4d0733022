#include "evotree/errors.hpp"

namespace evotree {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidModel: return "InvalidModel";
    case ErrorCode::ZeroMeanFitness: return "ZeroMeanFitness";
    case ErrorCode::NotMutationFree: return "NotMutationFree";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::Extinction: return "Extinction";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::FrontierExplosion: return "FrontierExplosion";
    case ErrorCode::MissingCoordinateLabels: return "MissingCoordinateLabels";
    case ErrorCode::ParameterRange: return "ParameterRange";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace evotree
