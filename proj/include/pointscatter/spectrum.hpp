#pragma once

// Eigenvalues of the box and ring (zeros of the Fabry-Perot denominators),
// bound states on the line and half-line (poles of the full-lattice
// transmission on the positive imaginary k axis) and the broadened density
// of states -(1/pi) Im \int G(x, x; E + i eta) dx.

#include <span>
#include <vector>

#include "pointscatter/model.hpp"

namespace pointscatter {

struct EigenRoot {
  double k;
  int multiplicity;
  double residual;  // |D(k)|
};

struct BoundRoot {
  complex k;  // i kappa
  double energy;
  double residual;  // |1/T+| on the line, |D / T-| elsewhere
  int multiplicity = 1;
};

struct SpectrumResult {
  std::vector<EigenRoot> eigen_k;    // ascending in k
  std::vector<BoundRoot> bound_k;    // ascending in energy
  std::vector<double> rejected_k;    // zeros of D not confirmed by the transfer-matrix closure
  int winding_count = 0;             // argument-principle count over the whole interval
};

/// The geometry's denominator:
///   box       (1 + s0 R+ e^{2iky1})(1 + sL R- e^{2ik(L-yN)}) - s0 sL T+ T- e^{2ik(y1+L-yN)}
///   ring      1 - (T+ + T-) e^{ik g} + (T+ T- - R+ R-) e^{2ik g},  g = L - (yN - y1)
///   half-line 1 + s R+ e^{2iky1}
///   line      1 / T+
/// with R, T the amplitudes of the whole lattice block.
complex secular_function(const Geometry& geometry, const Lattice& lattice, Wavenumber k);

/// secular_function divided by T- of the lattice block (the line form is
/// already pole-free). This removes the resonance poles of the block
/// amplitudes, so the result is entire in k and argument-principle counts
/// see zeros only.
complex cleared_secular_function(const Geometry& geometry, const Lattice& lattice, Wavenumber k);

/// All zeros of D on (k_min, k_max) for a box or ring. Throws ScanTooCoarse
/// when the winding count and the roots found disagree after refinement.
SpectrumResult find_eigenvalues(const Geometry& geometry, const Lattice& lattice, double k_min, double k_max);

/// Levels k = i kappa with kappa in (1e-9, kappa_max): bound states on the
/// line or half-line, negative-energy eigenvalues in a box or ring. Throws
/// ScanTooCoarse like find_eigenvalues.
SpectrumResult find_bound_states(const Geometry& geometry, const Lattice& lattice, double kappa_max);

/// rho(E) = -(1/pi) Im \int_{x_lo}^{x_hi} G(x, x; E + i eta) dx, integrated
/// exactly cell by cell. Spread over `threads` workers. Throws EtaTooSmall
/// when the broadened contour runs into a pole.
std::vector<double> density_of_states(const Geometry& geometry, const Lattice& lattice, std::span<const double> energies,
                                      double eta, double x_lo, double x_hi, unsigned threads = 1);

}  // namespace pointscatter
