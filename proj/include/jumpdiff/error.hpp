#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

namespace jumpdiff {

enum class ErrorKind {
  MissingChannel,
  IrregularSampling,
  EmptyInput,
  DegenerateMax,
  AllInvalid,
  LagOutOfRange,
  EmptyBinning,
  InvalidArgument,
  NoContiguousSegment,
  EmptyRange,
  NegativeDiffusionAtState,
  UnmappedCondition,
  InvalidSpec,
  ConfigError,
  IncompleteRun,
  Io,
};

std::string_view to_string(ErrorKind kind);

// All module errors carry a machine-readable kind plus free-form key/value
// context (column name, line number, offending field, ...).
class Error : public std::runtime_error {
 public:
  using Context = std::map<std::string, std::string>;

  Error(ErrorKind kind, const std::string& message, Context context = {})
      : std::runtime_error(message), kind_(kind), context_(std::move(context)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const Context& context() const noexcept { return context_; }

 private:
  ErrorKind kind_;
  Context context_;
};

}  // namespace jumpdiff
