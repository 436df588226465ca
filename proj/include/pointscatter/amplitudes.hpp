#pragma once

#include <vector>

#include "pointscatter/model.hpp"

namespace pointscatter {

/// Reflection and transmission amplitudes for waves incident from the left (+)
/// or from the right (-).
struct Amplitudes {
  complex r_plus;
  complex r_minus;
  complex t_plus;
  complex t_minus;
  Wavenumber at_k;
};

/// R(+-) = (c +- ik(d-a) + bk^2) / (-c + ik(d+a) + bk^2)
/// T(+-) = 2ik omega^(+-1) theta(+-) / (-c + ik(d+a) + bk^2),
/// theta(+) = ad - bc, theta(-) = 1. Throws PoleHit on a vanishing denominator.
Amplitudes bare_amplitudes(const InteractionParams& p, Wavenumber k);

/// Amplitudes of the same interaction moved to y: R(+-) picks up exp(+-2iky).
Amplitudes dressed_reflections(const InteractionParams& p, double y, Wavenumber k);

struct UnitarityResiduals {
  double flux_plus;   // | |R+|^2 + |T+|^2 - 1 |
  double flux_minus;  // | |R-|^2 + |T-|^2 - 1 |
  double cross;       // | conj(R+) T+ + conj(T-) R- |

  double max() const noexcept;
};

UnitarityResiduals unitarity_residuals(const Amplitudes& amp);

struct ConjugationResiduals {
  double reflection;    // max over +- of |conj(R(k)) - R(-k)|
  double transmission;  // max over +- of |conj(T+-(k)) - T-+(-k)|
};

ConjugationResiduals conjugation_residuals(const InteractionParams& p, double k);

struct BoundPole {
  complex k;
  double energy;  // k^2, real and negative for a pole on the positive imaginary axis
};

/// Upper-half-plane roots of bk^2 + ik(d+a) - c = 0 in closed form.
std::vector<BoundPole> single_bound_poles(const InteractionParams& p);

}  // namespace pointscatter
