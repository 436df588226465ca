#pragma once

// Domain types shared by every module: point-interaction parameters, placed
// interactions, lattices, wall conditions, geometries and wavenumbers.
//
// Units are fixed to hbar = 1 and m = 1/2, so the free equation reads
// -psi'' = k^2 psi and E = k^2.

#include <complex>
#include <cstddef>
#include <span>
#include <variant>
#include <vector>

namespace pointscatter {

using complex = std::complex<double>;

inline constexpr double kDeterminantTolerance = 1e-12;
inline constexpr double kMinPositionGap = 1e-12;
inline constexpr double kMinWavenumber = 1e-9;

/// One generalized point interaction: the boundary condition
///   (psi, psi')(0+) = omega * [[a, b], [c, d]] * (psi, psi')(0-)
/// with ad - bc = 1 and omega = exp(i * omega_phase).
class InteractionParams {
 public:
  /// Validates finiteness and |ad - bc - 1| <= 1e-12.
  static InteractionParams make(double a, double b, double c, double d, double omega_phase = 0.0);

  static InteractionParams identity() { return make(1, 0, 0, 1, 0); }
  /// gamma * delta(x): a = d = 1, b = 0, c = gamma.
  static InteractionParams delta(double gamma) { return make(1, 0, gamma, 1, 0); }
  /// delta-prime of strength gamma: a = d = 1, b = gamma, c = 0.
  static InteractionParams delta_prime(double gamma) { return make(1, gamma, 0, 1, 0); }

  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }
  double c() const noexcept { return c_; }
  double d() const noexcept { return d_; }
  double omega_phase() const noexcept { return phase_; }
  complex omega() const noexcept { return std::polar(1.0, phase_); }
  double determinant() const noexcept { return a_ * d_ - b_ * c_; }

  /// The same interaction seen in the reflected frame x -> -x. Its (+) and
  /// (-) scattering amplitudes are the (-) and (+) amplitudes of this one.
  InteractionParams mirrored() const noexcept { return InteractionParams(d_, b_, c_, a_, -phase_); }

  friend bool operator==(const InteractionParams&, const InteractionParams&) = default;

 private:
  InteractionParams(double a, double b, double c, double d, double phase) noexcept
      : a_(a), b_(b), c_(c), d_(d), phase_(phase) {}

  double a_, b_, c_, d_, phase_;
};

InteractionParams make_interaction(double a, double b, double c, double d, double omega_phase);

struct PlacedInteraction {
  InteractionParams params;
  double position;

  friend bool operator==(const PlacedInteraction&, const PlacedInteraction&) = default;
};

/// Interactions sorted by position with gaps of at least 1e-12. May be empty.
class Lattice {
 public:
  Lattice() = default;

  /// Sorts by position; throws DuplicatePosition when two sites are closer
  /// than 1e-12 and NonFinite for non-finite positions.
  static Lattice make(std::vector<PlacedInteraction> items);

  std::size_t size() const noexcept { return sites_.size(); }
  bool empty() const noexcept { return sites_.empty(); }
  const PlacedInteraction& operator[](std::size_t i) const { return sites_[i]; }
  std::span<const PlacedInteraction> sites() const noexcept { return sites_; }
  auto begin() const noexcept { return sites_.begin(); }
  auto end() const noexcept { return sites_.end(); }

  /// Rigid shift of every position.
  Lattice translated(double shift) const;

  friend bool operator==(const Lattice&, const Lattice&) = default;

 private:
  std::vector<PlacedInteraction> sites_;
};

Lattice make_lattice(std::vector<PlacedInteraction> items);

enum class Wall { Dirichlet, Neumann };

/// s = +1 for Dirichlet, -1 for Neumann.
constexpr double wall_sign(Wall w) noexcept { return w == Wall::Dirichlet ? 1.0 : -1.0; }
/// Reflection coefficient of a perfect mirror: -1 for Dirichlet, +1 for Neumann.
constexpr double wall_reflection(Wall w) noexcept { return -wall_sign(w); }

struct LineGeometry {
  friend bool operator==(const LineGeometry&, const LineGeometry&) = default;
};
/// Half-line x > 0 with a wall at x = 0.
struct HalfLineGeometry {
  Wall wall = Wall::Dirichlet;
  friend bool operator==(const HalfLineGeometry&, const HalfLineGeometry&) = default;
};
/// Box 0 < x < length.
struct BoxGeometry {
  double length = 1.0;
  Wall left = Wall::Dirichlet;
  Wall right = Wall::Dirichlet;
  friend bool operator==(const BoxGeometry&, const BoxGeometry&) = default;
};
/// Ring -length/2 < x < length/2 with periodic closure.
struct RingGeometry {
  double length = 1.0;
  friend bool operator==(const RingGeometry&, const RingGeometry&) = default;
};

class Geometry {
 public:
  using Variant = std::variant<LineGeometry, HalfLineGeometry, BoxGeometry, RingGeometry>;

  static Geometry line() { return Geometry(LineGeometry{}); }
  static Geometry half_line(Wall wall) { return Geometry(HalfLineGeometry{wall}); }
  /// Throws InvalidArgument unless length > 0 and finite.
  static Geometry box(double length, Wall left, Wall right);
  static Geometry ring(double length);

  const Variant& variant() const noexcept { return v_; }
  bool is_line() const noexcept { return std::holds_alternative<LineGeometry>(v_); }
  bool is_half_line() const noexcept { return std::holds_alternative<HalfLineGeometry>(v_); }
  bool is_box() const noexcept { return std::holds_alternative<BoxGeometry>(v_); }
  bool is_ring() const noexcept { return std::holds_alternative<RingGeometry>(v_); }

  /// Open domain bounds; +-infinity where unbounded.
  double lower() const noexcept;
  double upper() const noexcept;
  bool contains(double x) const noexcept { return x > lower() && x < upper(); }

  /// Box or ring length, 0 for unbounded geometries.
  double length() const noexcept;

  /// Throws OutOfDomain when a lattice site is not strictly inside the domain.
  void validate(const Lattice& lattice) const;

  friend bool operator==(const Geometry&, const Geometry&) = default;

 private:
  explicit Geometry(Variant v) : v_(v) {}
  Variant v_;
};

/// Complex wavenumber with |k| >= 1e-9 (the 1/(2ik) prefactors are singular at 0).
class Wavenumber {
 public:
  Wavenumber(complex k);  // NOLINT: implicit on purpose
  Wavenumber(double k) : Wavenumber(complex(k, 0.0)) {}  // NOLINT

  complex value() const noexcept { return k_; }
  complex energy() const noexcept { return k_ * k_; }
  bool is_real() const noexcept { return k_.imag() == 0.0; }

 private:
  complex k_;
};

/// Physical-sheet wavenumber for a (possibly complex) energy: Im k >= 0,
/// branch cut along E >= 0. For E + i*eta this is the principal sqrt.
complex wavenumber_from_energy(complex energy);

}  // namespace pointscatter
