#include "jumpdiff/error.hpp"

namespace jumpdiff {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MissingChannel: return "MissingChannel";
    case ErrorKind::IrregularSampling: return "IrregularSampling";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::DegenerateMax: return "DegenerateMax";
    case ErrorKind::AllInvalid: return "AllInvalid";
    case ErrorKind::LagOutOfRange: return "LagOutOfRange";
    case ErrorKind::EmptyBinning: return "EmptyBinning";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NoContiguousSegment: return "NoContiguousSegment";
    case ErrorKind::EmptyRange: return "EmptyRange";
    case ErrorKind::NegativeDiffusionAtState: return "NegativeDiffusionAtState";
    case ErrorKind::UnmappedCondition: return "UnmappedCondition";
    case ErrorKind::InvalidSpec: return "InvalidSpec";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IncompleteRun: return "IncompleteRun";
    case ErrorKind::Io: return "IO";
  }
  return "Unknown";
}

}  // namespace jumpdiff
