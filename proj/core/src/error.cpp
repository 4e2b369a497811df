#include "semdist/error.hpp"

namespace semdist {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MagicMismatch: return "MagicMismatch";
    case ErrorKind::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorKind::TruncatedFile: return "TruncatedFile";
    case ErrorKind::NonFiniteValue: return "NonFiniteValue";
    case ErrorKind::InvalidShape: return "InvalidShape";
    case ErrorKind::TrailingData: return "TrailingData";
    case ErrorKind::DuplicateId: return "DuplicateId";
    case ErrorKind::IoFailure: return "IoFailure";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::MissingField: return "MissingField";
    case ErrorKind::InvalidField: return "InvalidField";
    case ErrorKind::EmptyMatrix: return "EmptyMatrix";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::ZeroNormVector: return "ZeroNormVector";
    case ErrorKind::MissingEmbedding: return "MissingEmbedding";
    case ErrorKind::DistanceOutOfRange: return "DistanceOutOfRange";
    case ErrorKind::MissingNewAnswer: return "MissingNewAnswer";
    case ErrorKind::InvalidBinWidth: return "InvalidBinWidth";
    case ErrorKind::EmptySet: return "EmptySet";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::RankOutOfRange: return "RankOutOfRange";
    case ErrorKind::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorKind::NonOrthonormalFactor: return "NonOrthonormalFactor";
    case ErrorKind::DegenerateData: return "DegenerateData";
  }
  return "Unknown";
}

namespace {

std::string compose(ErrorKind kind, const std::string& detail,
                    std::optional<std::uint64_t> offset) {
  std::string msg{to_string(kind)};
  msg += ": ";
  msg += detail;
  if (offset) {
    msg += " (byte offset ";
    msg += std::to_string(*offset);
    msg += ")";
  }
  return msg;
}

}  // namespace

Error::Error(ErrorKind kind, const std::string& detail,
             std::optional<std::uint64_t> offset)
    : std::runtime_error(compose(kind, detail, offset)),
      kind_(kind),
      detail_(detail),
      offset_(offset) {}

}  // namespace semdist
