#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace dagcusum {

/// Base class for every error raised by the library. `kind()` is a stable
/// identifier used in machine-readable CLI diagnostics.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define DAGCUSUM_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                         \
   public:                                                            \
    explicit Name(const std::string& what) : Error(#Name, what) {}    \
  }

DAGCUSUM_DEFINE_ERROR(DisconnectedGraph);
DAGCUSUM_DEFINE_ERROR(SpectralGapViolation);
DAGCUSUM_DEFINE_ERROR(InvalidTopology);
DAGCUSUM_DEFINE_ERROR(DimensionMismatch);
DAGCUSUM_DEFINE_ERROR(DegenerateBits);
DAGCUSUM_DEFINE_ERROR(DegenerateLogArgument);
DAGCUSUM_DEFINE_ERROR(OracleScaleExceeded);
DAGCUSUM_DEFINE_ERROR(DomainError);
DAGCUSUM_DEFINE_ERROR(InfeasibleMN);
DAGCUSUM_DEFINE_ERROR(ConfigError);
DAGCUSUM_DEFINE_ERROR(IoError);

#undef DAGCUSUM_DEFINE_ERROR

}  // namespace dagcusum
