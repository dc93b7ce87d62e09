#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace netcvx {

enum class ErrorCode {
  DuplicateNode,
  UnknownNode,
  UnknownEndpoint,
  DuplicateEdge,
  SelfLoop,
  DimensionMismatch,
  InvalidBox,
  UnknownEdge,
  NegativeWeight,
  InvalidParameter,
  MissingColumn,
  RowDimensionMismatch,
  UnknownAtom,
  UnsupportedComposite,
  UnboundedObjective,
  SyntaxError,
  DuplicateBox,
  InvalidRho,
  WarmStartDimMismatch,
  ParseError,
  OddNodeCount,
  NotQuadratic,
  SingularSystem,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above.
/// `position()` is a byte offset for template syntax errors and a 1-based
/// line number for file parse errors; it is empty otherwise.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what, std::optional<std::size_t> position = std::nullopt)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), position_(position) {}

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> position() const noexcept { return position_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> position_;
};

}  // namespace netcvx
