#pragma once

// Exact Green functions G(x_f, x_i; k), normalized so that
//   (d^2/dx_f^2 + k^2) G = delta(x_f - x_i),
// built from scattering amplitudes by summing multiple-scattering paths.
//
// Inside any pair of cells G is a sum of four exponentials, which is what
// ExpForm stores. Line, half-line and box share one code path: walls are
// perfect-mirror cells (T = 0) placed at the domain ends.

#include <cstddef>
#include <map>
#include <span>
#include <string_view>
#include <vector>

#include "pointscatter/composition.hpp"
#include "pointscatter/model.hpp"

namespace pointscatter {

enum class GreenBranch { SameCell, CrossCell, HalfLine, Box, RingSingle, RingLattice };

std::string_view to_string(GreenBranch branch);

struct GreenEvaluation {
  complex value;
  complex d_dxf;  // analytic derivative with respect to x_f
  double x_f;
  double x_i;
  Wavenumber k;
  GreenBranch branch;
};

/// G = pp e^{ik(x_f+x_i)} + pm e^{ik(x_f-x_i)} + mp e^{-ik(x_f-x_i)} + mm e^{-ik(x_f+x_i)}
struct ExpForm {
  complex pp{0.0};
  complex pm{0.0};
  complex mp{0.0};
  complex mm{0.0};

  complex value(double x_f, double x_i, complex k) const;
  complex d_dxf(double x_f, double x_i, complex k) const;
  complex d_dxi(double x_f, double x_i, complex k) const;

  /// The same function expressed in x, given a form in u = s*x + offset
  /// (s = +-1, separate offsets for the two arguments).
  ExpForm reframed(double s, double offset_f, double offset_i, complex k) const;
};

/// G(x, x) = constant + plus e^{2ikx} + minus e^{-2ikx} for lo < x < hi.
struct DiagonalForm {
  complex constant;
  complex plus;
  complex minus;
  double lo;
  double hi;

  complex value(double x, complex k) const;
  /// Closed-form integral over [a, b] inside (lo, hi).
  complex integral(double a, double b, complex k) const;
};

/// Green function of one geometry and lattice at a fixed k. Caches the
/// exponential form of each cell pair, so one kernel is meant to be used by
/// one thread; distinct kernels are independent.
class GreenKernel {
 public:
  GreenKernel(const Geometry& geometry, const Lattice& lattice, Wavenumber k);

  GreenEvaluation evaluate(double x_f, double x_i) const;
  complex operator()(double x_f, double x_i) const { return evaluate(x_f, x_i).value; }

  /// Exponential form valid in the cells of (x_f, x_i) for their ordering;
  /// usable up to the cell edges for one-sided limits.
  const ExpForm& form(double x_f, double x_i) const;

  DiagonalForm diagonal(double x) const;

  /// Interaction positions, i.e. the interior cell edges, sorted.
  std::vector<double> breakpoints() const;

  const Geometry& geometry() const noexcept { return geometry_; }
  Wavenumber k() const noexcept { return k_; }

 private:
  struct Key {
    std::size_t region_f;
    std::size_t region_i;
    bool forward;
    int variant;  // 0 lattice path, 1 single-site ring across the site, 2 free ring
    auto operator<=>(const Key&) const = default;
  };

  std::size_t region_of(double x) const;
  Key key_for(double x_f, double x_i) const;
  ExpForm build(const Key& key, double x_f, double x_i) const;
  GreenBranch branch_for(const Key& key) const;

  Geometry geometry_;
  Lattice lattice_;
  Wavenumber k_;
  std::vector<ScatteringCell> cells_;  // walls included for half-line and box
  std::vector<double> positions_;      // positions of cells_
  mutable std::map<Key, ExpForm> cache_;
};

/// One interaction at y on the line, by shifting it to the origin and
/// applying the single-interaction path sum.
GreenEvaluation green_single(const InteractionParams& p, double y, double x_f, double x_i, Wavenumber k);

GreenEvaluation green_line(const Lattice& lattice, double x_f, double x_i, Wavenumber k);
GreenEvaluation green_halfline(const Lattice& lattice, Wall wall, double x_f, double x_i, Wavenumber k);
GreenEvaluation green_box(const Lattice& lattice, double length, Wall left, Wall right, double x_f, double x_i,
                          Wavenumber k);
/// N = 1 with x_i and x_f on opposite sides of the site uses the single-site
/// circle formula; everything else goes through the lattice formula.
GreenEvaluation green_ring(const Lattice& lattice, double length, double x_f, double x_i, Wavenumber k);

GreenEvaluation green(const Geometry& geometry, const Lattice& lattice, double x_f, double x_i, Wavenumber k);

namespace detail {

/// Line machinery on an ordered cell list. Regions are numbered 0..M
/// (region r lies between cells r-1 and r). Requires region_f >= region_i and,
/// when equal, x_f >= x_i.
ExpForm line_form(std::span<const ScatteringCell> cells, std::size_t region_i, std::size_t region_f, Wavenumber k);

/// Ring with N >= 1 cells; form valid around the given points.
ExpForm ring_lattice_form(std::span<const ScatteringCell> cells, double length, double x_f, double x_i,
                          Wavenumber k);

/// Single cell at the origin of a ring, x_i < 0 < x_f.
ExpForm ring_single_form(const ScatteringCell& cell, double length, Wavenumber k);

/// Free ring, x_f >= x_i.
ExpForm free_ring_form(double length, Wavenumber k);

}  // namespace detail

/// Closed forms for special cases, kept as independent regression formulas.
namespace closed_form {

/// gamma delta(x) at the origin: G = [e^{ik|dx|} + gamma/(2ik-gamma) e^{ik(|x_f|+|x_i|)}] / 2ik.
complex delta_line(double gamma, double x_f, double x_i, complex k);

/// delta-prime at the origin, with the sign(x_f) sign(x_i) factor.
complex delta_prime_line(double gamma, double x_f, double x_i, complex k);

/// Wall at 0 and one interaction at y: regions x_i, x_f < y and x_i < y < x_f.
complex halfline_single(const InteractionParams& p, double y, Wall wall, double x_f, double x_i, complex k);

/// One interaction at y inside [0, L]: regions x_i, x_f < y and x_i < y < x_f.
complex box_single(const InteractionParams& p, double y, double length, Wall left, Wall right, double x_f,
                   double x_i, complex k);

/// D = (1 + s0 R+ e^{2iky})(1 + sL R- e^{2ik(L-y)}) - s0 sL T+ T- e^{2ikL}.
complex box_single_denominator(const InteractionParams& p, double y, double length, Wall left, Wall right,
                               complex k);

/// D_circle = (1 - T+ e^{ikL})(1 - T- e^{ikL}) - R+ R- e^{2ikL}, site at the origin.
complex ring_single_denominator(const InteractionParams& p, double length, complex k);

}  // namespace closed_form

}  // namespace pointscatter
