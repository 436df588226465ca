#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pointscatter {

enum class ErrorKind {
  ConstraintViolation,
  NonFinite,
  DuplicatePosition,
  OutOfDomain,
  InvalidArgument,
  KTooSmall,
  PoleHit,
  ResonanceDenominator,
  OnInteractionPoint,
  SpectralPole,
  ScanTooCoarse,
  EtaTooSmall,
  WronskianVanishes,
  PacketTooWideForDomain,
  QuadratureUnderResolved,
  ConfigError,
};

std::string_view to_string(ErrorKind kind);

// True for failures caused by the numerics (a pole was hit, a scan or a
// quadrature was too coarse) rather than by malformed input.
bool is_numerical(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace pointscatter
