#pragma once

// Independent ground truth built only from the matching matrix of each
// interaction and free propagation in between. Nothing here calls the
// amplitude, composition or Green-function code paths.

#include <array>
#include <cstddef>

#include "pointscatter/composition.hpp"
#include "pointscatter/model.hpp"

namespace pointscatter::oracle {

/// Value and derivative of a solution at a point.
struct TransferState {
  complex psi;
  complex dpsi;
};

using Matrix2 = std::array<std::array<complex, 2>, 2>;

Matrix2 identity_matrix();
Matrix2 multiply(const Matrix2& lhs, const Matrix2& rhs);
TransferState apply(const Matrix2& m, TransferState s);

/// omega * [[a, b], [c, d]]: maps (psi, psi') just left of a site to just right of it.
Matrix2 interaction_matrix(const InteractionParams& p);
/// Plane-wave propagation over dx: [[cos, sin/k], [-k sin, cos]].
Matrix2 propagation_matrix(double dx, complex k);

TransferState transfer_step(const InteractionParams& p, TransferState state);
TransferState inverse_transfer_step(const InteractionParams& p, TransferState state);
TransferState free_propagate(TransferState state, double dx, complex k);

/// u1 v' - u1' v.
complex wronskian(TransferState u, TransferState v);

/// Total transfer matrix from just left of site l to just right of site n (1-based).
Matrix2 block_transfer_matrix(const Lattice& lattice, std::size_t l, std::size_t n, complex k);

/// Reads R/T off the block transfer matrix in the plane-wave basis, with the
/// block's local origins at y_l (left) and y_n (right).
BlockAmplitudes oracle_block_amplitudes(const Lattice& lattice, std::size_t l, std::size_t n, complex k);

/// Green function from the two boundary-adapted solutions,
///   G = u_left(x_<) u_right(x_>) / W(x_i),
/// with W evaluated at the source point, or, on the ring, from the periodic
/// closure of the jump condition. Throws WronskianVanishes at an eigenvalue.
complex oracle_green(const Geometry& geometry, const Lattice& lattice, double x_f, double x_i, complex k);

/// det(I - M) for the ring monodromy M from -L/2 to L/2; zero at eigenvalues.
complex ring_closure_determinant(double length, const Lattice& lattice, complex k);

/// Solution satisfying the left wall condition, shot to x = L; returns the
/// right wall condition residual (psi(L) for Dirichlet, psi'(L) for Neumann).
complex box_shooting_residual(const Lattice& lattice, double length, Wall left, Wall right, complex k);

/// Solution decaying as exp(-ikx) on the far left, shot past the last site;
/// returns the coefficient of exp(-ikx) there. For k = i kappa a zero means a
/// bound state.
complex line_growing_coefficient(const Lattice& lattice, complex k);

/// Half-line analogue of line_growing_coefficient, starting from the wall at 0.
complex halfline_growing_coefficient(const Lattice& lattice, Wall wall, complex k);

}  // namespace pointscatter::oracle
