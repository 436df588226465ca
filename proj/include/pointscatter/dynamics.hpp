#pragma once

// Wave-packet evolution by spectral decomposition. The initial Gaussian is
// projected onto the continuum scattering states (line, half-line) and onto
// the discrete levels, whose eigenfunctions come from contour residues of G.
// Each component then only picks up its phase exp(-iEt).

#include <span>
#include <vector>

#include "pointscatter/model.hpp"

namespace pointscatter {

/// psi(x) = (2 pi sigma^2)^{-1/4} exp(-(x - x0)^2 / (4 sigma^2) + i k0 x), so
/// |psi|^2 has variance sigma^2.
struct GaussianPacket {
  double x0 = 0.0;
  double k0 = 0.0;
  double sigma = 1.0;

  complex operator()(double x) const;
};

/// Closed-form free evolution of the packet under -d^2/dx^2.
complex free_gaussian(const GaussianPacket& packet, double x, double t);

struct EvolutionSettings {
  double norm_tolerance = 1e-4;  // allowed |norm - 1| before QuadratureUnderResolved
  double width_sigmas = 10.0;    // packet support and momentum window, in units of sigma and 1/sigma
  double nodes_per_turn = 8.0;   // k nodes per 2 pi of accumulated phase
  int contour_nodes = 32;        // trapezoid nodes on each residue circle
  unsigned threads = 1;
};

struct EvolutionResult {
  std::vector<double> times;
  std::vector<double> grid;
  std::vector<std::vector<complex>> values;  // values[t][x]
  std::vector<double> norms;                  // L2 norm at each time
  std::vector<double> energies;               // <H> from the spectral weights, per time
  double spectral_weight = 0.0;               // captured fraction of the initial norm squared
  std::size_t continuum_nodes = 0;
  std::size_t discrete_levels = 0;
};

/// Psi(x, t) on `grid` for every t in `times`. Throws PacketTooWideForDomain
/// when the packet leaks more than 1e-12 of its mass out of the domain or sits
/// closer than 4 sigma to a wall, and QuadratureUnderResolved when a norm
/// drifts from 1 by more than the configured tolerance.
EvolutionResult evolve(const Geometry& geometry, const Lattice& lattice, const GaussianPacket& packet,
                       std::span<const double> times, std::span<const double> grid,
                       const EvolutionSettings& settings = {});

}  // namespace pointscatter
