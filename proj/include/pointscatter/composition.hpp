#pragma once

// Multiple-scattering composition: a contiguous run of scatterers collapsed
// into one block with its own reflection and transmission amplitudes.
//
// Phase conventions for a block spanning [left_position, right_position]:
//   r_plus  is referenced at left_position  (wave exp(ik(x - y_l)) from the left),
//   r_minus is referenced at right_position,
//   t_plus / t_minus carry the internal propagation phase exp(ik(y_n - y_l)).
// A single cell is therefore its bare (undressed) amplitudes.

#include <cstddef>
#include <span>
#include <vector>

#include "pointscatter/amplitudes.hpp"
#include "pointscatter/model.hpp"

namespace pointscatter {

/// A scatterer reduced to its amplitudes at a fixed k. Walls are cells with
/// T = 0 and R = -1 (Dirichlet) or +1 (Neumann).
struct ScatteringCell {
  complex r_plus;
  complex r_minus;
  complex t_plus;
  complex t_minus;
  double position;

  /// Reflected frame x -> -x: position negated, (+) and (-) exchanged.
  ScatteringCell mirrored() const noexcept { return {r_minus, r_plus, t_minus, t_plus, -position}; }
};

ScatteringCell interaction_cell(const PlacedInteraction& site, Wavenumber k);
ScatteringCell wall_cell(Wall wall, double position);

std::vector<ScatteringCell> lattice_cells(const Lattice& lattice, Wavenumber k);

/// Reverses the order and mirrors every cell.
std::vector<ScatteringCell> mirror_cells(std::span<const ScatteringCell> cells);

struct BlockAmplitudes {
  complex r_plus{0.0};
  complex r_minus{0.0};
  complex t_plus{1.0};
  complex t_minus{1.0};
  // 1-based indices of the first and last site; first_index > last_index for an empty block.
  std::size_t first_index = 1;
  std::size_t last_index = 0;
  double left_position = 0.0;
  double right_position = 0.0;

  bool empty() const noexcept { return first_index > last_index; }

  /// Empty block: R = 0, T = 1, zero length, located at `at`.
  static BlockAmplitudes transparent(double at, std::size_t index = 1) {
    return BlockAmplitudes{0.0, 0.0, 1.0, 1.0, index, index - 1, at, at};
  }
};

/// Absorbs cells left to right with the four recurrences
///   R+_{n,l} = R+_{n-1,l} + T+_{n-1,l} T-_{n-1,l} R+_n e^{2ikD} / den
///   R-_{n,l} = R-_n + T+_n T-_n R-_{n-1,l} e^{2ikD} / den
///   T+-_{n,l} = T+-_{n-1,l} T+-_n e^{ikD} / den,   den = 1 - R-_{n-1,l} R+_n e^{2ikD}
/// with D = y_n - y_{n-1}. An empty span yields the transparent block at
/// `empty_at`. Throws ResonanceDenominator when |den| < 1e-14.
BlockAmplitudes compose_cells(std::span<const ScatteringCell> cells, Wavenumber k, double empty_at = 0.0);

/// Block of sites l..n (1-based, inclusive) of the lattice. l > n gives the
/// empty block.
BlockAmplitudes compose_block(const Lattice& lattice, std::size_t l, std::size_t n, Wavenumber k);

/// K = R+ R- exp(2ik(y_a - y_b)) - T+ T- exp(-2ik(y_b - y_a)), a/b the left/right ends.
complex k_factor(const BlockAmplitudes& block, Wavenumber k);

}  // namespace pointscatter
