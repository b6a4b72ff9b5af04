#include "qdm/error.hpp"

namespace qdm {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::ChirpDiverged: return "ChirpDiverged";
    case ErrorCode::NyquistViolation: return "NyquistViolation";
    case ErrorCode::IncompatibleGrids: return "IncompatibleGrids";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::DegenerateAmplitude: return "DegenerateAmplitude";
    case ErrorCode::SingularDesign: return "SingularDesign";
    case ErrorCode::SegmentTooLong: return "SegmentTooLong";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::ZeroReference: return "ZeroReference";
    case ErrorCode::EmptyBand: return "EmptyBand";
    case ErrorCode::ZeroTemplate: return "ZeroTemplate";
    case ErrorCode::Parse: return "Parse";
    case ErrorCode::Config: return "Config";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace qdm
