#include "pointscatter/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pointscatter/errors.hpp"

namespace pointscatter {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ConstraintViolation: return "ConstraintViolation";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::DuplicatePosition: return "DuplicatePosition";
    case ErrorKind::OutOfDomain: return "OutOfDomain";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::KTooSmall: return "KTooSmall";
    case ErrorKind::PoleHit: return "PoleHit";
    case ErrorKind::ResonanceDenominator: return "ResonanceDenominator";
    case ErrorKind::OnInteractionPoint: return "OnInteractionPoint";
    case ErrorKind::SpectralPole: return "SpectralPole";
    case ErrorKind::ScanTooCoarse: return "ScanTooCoarse";
    case ErrorKind::EtaTooSmall: return "EtaTooSmall";
    case ErrorKind::WronskianVanishes: return "WronskianVanishes";
    case ErrorKind::PacketTooWideForDomain: return "PacketTooWideForDomain";
    case ErrorKind::QuadratureUnderResolved: return "QuadratureUnderResolved";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

bool is_numerical(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::KTooSmall:
    case ErrorKind::PoleHit:
    case ErrorKind::ResonanceDenominator:
    case ErrorKind::SpectralPole:
    case ErrorKind::ScanTooCoarse:
    case ErrorKind::EtaTooSmall:
    case ErrorKind::WronskianVanishes:
    case ErrorKind::QuadratureUnderResolved:
      return true;
    default:
      return false;
  }
}

InteractionParams InteractionParams::make(double a, double b, double c, double d, double omega_phase) {
  for (double v : {a, b, c, d, omega_phase}) {
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::NonFinite, "interaction parameters must be finite");
    }
  }
  const double det = a * d - b * c;
  if (std::abs(det - 1.0) > kDeterminantTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "ad - bc = " << det << ", expected 1";
    throw Error(ErrorKind::ConstraintViolation, os.str());
  }
  return InteractionParams(a, b, c, d, omega_phase);
}

InteractionParams make_interaction(double a, double b, double c, double d, double omega_phase) {
  return InteractionParams::make(a, b, c, d, omega_phase);
}

Lattice Lattice::make(std::vector<PlacedInteraction> items) {
  for (const auto& item : items) {
    if (!std::isfinite(item.position)) {
      throw Error(ErrorKind::NonFinite, "interaction position must be finite");
    }
  }
  std::stable_sort(items.begin(), items.end(),
                   [](const auto& l, const auto& r) { return l.position < r.position; });
  for (std::size_t i = 1; i < items.size(); ++i) {
    if (items[i].position - items[i - 1].position < kMinPositionGap) {
      std::ostringstream os;
      os.precision(17);
      os << "sites at y = " << items[i - 1].position << " and y = " << items[i].position
         << " are closer than " << kMinPositionGap;
      throw Error(ErrorKind::DuplicatePosition, os.str());
    }
  }
  Lattice lat;
  lat.sites_ = std::move(items);
  return lat;
}

Lattice make_lattice(std::vector<PlacedInteraction> items) { return Lattice::make(std::move(items)); }

Lattice Lattice::translated(double shift) const {
  std::vector<PlacedInteraction> moved = sites_;
  for (auto& s : moved) s.position += shift;
  return Lattice::make(std::move(moved));
}

Geometry Geometry::box(double length, Wall left, Wall right) {
  if (!(std::isfinite(length) && length > 0)) {
    throw Error(ErrorKind::InvalidArgument, "box length must be finite and > 0");
  }
  return Geometry(BoxGeometry{length, left, right});
}

Geometry Geometry::ring(double length) {
  if (!(std::isfinite(length) && length > 0)) {
    throw Error(ErrorKind::InvalidArgument, "ring length must be finite and > 0");
  }
  return Geometry(RingGeometry{length});
}

double Geometry::lower() const noexcept {
  constexpr double inf = std::numeric_limits<double>::infinity();
  return std::visit(
      [](const auto& g) -> double {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, LineGeometry>) return -inf;
        else if constexpr (std::is_same_v<T, RingGeometry>) return -0.5 * g.length;
        else return 0.0;
      },
      v_);
}

double Geometry::upper() const noexcept {
  constexpr double inf = std::numeric_limits<double>::infinity();
  return std::visit(
      [](const auto& g) -> double {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, BoxGeometry>) return g.length;
        else if constexpr (std::is_same_v<T, RingGeometry>) return 0.5 * g.length;
        else return inf;
      },
      v_);
}

double Geometry::length() const noexcept {
  if (const auto* b = std::get_if<BoxGeometry>(&v_)) return b->length;
  if (const auto* r = std::get_if<RingGeometry>(&v_)) return r->length;
  return 0.0;
}

void Geometry::validate(const Lattice& lattice) const {
  for (const auto& site : lattice) {
    if (!contains(site.position)) {
      std::ostringstream os;
      os.precision(17);
      os << "site at y = " << site.position << " is outside the open domain (" << lower() << ", "
         << upper() << ")";
      throw Error(ErrorKind::OutOfDomain, os.str());
    }
  }
}

Wavenumber::Wavenumber(complex k) : k_(k) {
  if (!(std::isfinite(k.real()) && std::isfinite(k.imag()))) {
    throw Error(ErrorKind::NonFinite, "wavenumber must be finite");
  }
  if (std::abs(k) < kMinWavenumber) {
    throw Error(ErrorKind::KTooSmall, "|k| must be >= 1e-9");
  }
}

complex wavenumber_from_energy(complex energy) {
  return complex(0.0, 1.0) * std::sqrt(-energy);
}

}  // namespace pointscatter
