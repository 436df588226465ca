#include "pointscatter/amplitudes.hpp"

#include <algorithm>
#include <cmath>

#include "pointscatter/errors.hpp"

namespace pointscatter {
namespace {

constexpr complex I(0.0, 1.0);

}  // namespace

Amplitudes bare_amplitudes(const InteractionParams& p, Wavenumber wk) {
  const complex k = wk.value();
  const double a = p.a(), b = p.b(), c = p.c(), d = p.d();
  const complex den = -c + I * k * (d + a) + b * k * k;
  const double scale = std::max({std::abs(c), std::abs(k) * (std::abs(d) + std::abs(a)),
                                 std::abs(b) * std::norm(k), 1.0});
  if (std::abs(den) < 1e-14 * scale) {
    throw Error(ErrorKind::PoleHit, "scattering denominator -c + ik(d+a) + bk^2 vanishes");
  }
  const complex omega = p.omega();
  const double theta_plus = p.determinant();
  const double theta_minus = 1.0;
  return Amplitudes{
      .r_plus = (c + I * k * (d - a) + b * k * k) / den,
      .r_minus = (c - I * k * (d - a) + b * k * k) / den,
      .t_plus = 2.0 * I * k * omega * theta_plus / den,
      .t_minus = 2.0 * I * k * std::conj(omega) * theta_minus / den,
      .at_k = wk,
  };
}

Amplitudes dressed_reflections(const InteractionParams& p, double y, Wavenumber k) {
  Amplitudes amp = bare_amplitudes(p, k);
  const complex phase = std::exp(2.0 * I * k.value() * y);
  amp.r_plus *= phase;
  amp.r_minus /= phase;
  return amp;
}

double UnitarityResiduals::max() const noexcept { return std::max({flux_plus, flux_minus, cross}); }

UnitarityResiduals unitarity_residuals(const Amplitudes& amp) {
  return UnitarityResiduals{
      .flux_plus = std::abs(std::norm(amp.r_plus) + std::norm(amp.t_plus) - 1.0),
      .flux_minus = std::abs(std::norm(amp.r_minus) + std::norm(amp.t_minus) - 1.0),
      .cross = std::abs(std::conj(amp.r_plus) * amp.t_plus + std::conj(amp.t_minus) * amp.r_minus),
  };
}

ConjugationResiduals conjugation_residuals(const InteractionParams& p, double k) {
  const Amplitudes fwd = bare_amplitudes(p, k);
  const Amplitudes rev = bare_amplitudes(p, -k);
  return ConjugationResiduals{
      .reflection = std::max(std::abs(std::conj(fwd.r_plus) - rev.r_plus),
                             std::abs(std::conj(fwd.r_minus) - rev.r_minus)),
      .transmission = std::max(std::abs(std::conj(fwd.t_plus) - rev.t_minus),
                               std::abs(std::conj(fwd.t_minus) - rev.t_plus)),
  };
}

std::vector<BoundPole> single_bound_poles(const InteractionParams& p) {
  // b k^2 + i(d+a) k - c = 0
  const double a = p.a(), b = p.b(), c = p.c(), d = p.d();
  const complex lin = I * (d + a);
  std::vector<complex> roots;
  if (b == 0.0) {
    if (lin != 0.0) roots.push_back(complex(c) / lin);
  } else {
    // Stable quadratic formula: q = -(B + sgn * sqrt(B^2 - 4AC)) / 2.
    const complex disc = std::sqrt(lin * lin + 4.0 * b * c);
    const complex q = (std::real(std::conj(lin) * disc) >= 0.0) ? -0.5 * (lin + disc) : -0.5 * (lin - disc);
    if (q != 0.0) {
      roots.push_back(q / b);
      roots.push_back(complex(-c) / q);
    } else {
      roots.push_back(0.0);
    }
  }
  std::vector<BoundPole> poles;
  for (complex k : roots) {
    if (k.imag() > 1e-12) {
      // Poles of a self-adjoint point interaction sit on the imaginary axis.
      const complex on_axis(0.0, k.imag());
      poles.push_back(BoundPole{on_axis, std::real(on_axis * on_axis)});
    }
  }
  std::sort(poles.begin(), poles.end(), [](const auto& l, const auto& r) { return l.k.imag() > r.k.imag(); });
  return poles;
}

}  // namespace pointscatter
