#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dotnav {

// Domain failures carry a stable kind name so the CLI can report them in a
// machine-readable way. Usage errors are handled by the CLI itself.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define DOTNAV_DEFINE_ERROR(Name)                                  \
  class Name : public Error {                                      \
   public:                                                         \
    explicit Name(const std::string& message) : Error(#Name, message) {} \
  };

DOTNAV_DEFINE_ERROR(DegenerateGeometry)
DOTNAV_DEFINE_ERROR(OrderError)
DOTNAV_DEFINE_ERROR(FormatError)
DOTNAV_DEFINE_ERROR(DimensionMismatch)
DOTNAV_DEFINE_ERROR(InsufficientBackground)
DOTNAV_DEFINE_ERROR(LengthMismatch)
DOTNAV_DEFINE_ERROR(DeltaTooLarge)
DOTNAV_DEFINE_ERROR(EmptySamples)
DOTNAV_DEFINE_ERROR(NoPath)
DOTNAV_DEFINE_ERROR(InvalidEndpoint)
DOTNAV_DEFINE_ERROR(InvalidThresholds)
DOTNAV_DEFINE_ERROR(InvalidWorld)
DOTNAV_DEFINE_ERROR(PlacementFailure)
DOTNAV_DEFINE_ERROR(InvalidArgument)

#undef DOTNAV_DEFINE_ERROR

/// Malformed input text. Every parse error carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& reason)
      : Error("ParseError", "line " + std::to_string(line) + ": " + reason),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace dotnav
