#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace semdist {

enum class ErrorKind {
  MagicMismatch,
  UnsupportedVersion,
  TruncatedFile,
  NonFiniteValue,
  InvalidShape,
  TrailingData,
  DuplicateId,
  IoFailure,
  ParseError,
  MissingField,
  InvalidField,
  EmptyMatrix,
  ShapeMismatch,
  ZeroNormVector,
  MissingEmbedding,
  DistanceOutOfRange,
  MissingNewAnswer,
  InvalidBinWidth,
  EmptySet,
  InvalidConfig,
  LengthMismatch,
  RankOutOfRange,
  ConvergenceFailure,
  NonOrthonormalFactor,
  DegenerateData,
};

std::string_view to_string(ErrorKind kind);

// Every failure surfaced by the library is an Error carrying a kind the CLI
// can serialize. Binary readers also record the byte offset of the fault.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail,
        std::optional<std::uint64_t> offset = std::nullopt);

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& detail() const noexcept { return detail_; }
  std::optional<std::uint64_t> offset() const noexcept { return offset_; }

 private:
  ErrorKind kind_;
  std::string detail_;
  std::optional<std::uint64_t> offset_;
};

}  // namespace semdist
