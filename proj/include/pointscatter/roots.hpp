#pragma once

// Root-finding utilities for analytic functions of one complex variable:
// adaptive argument-principle winding numbers, Newton polishing restricted to
// the real axis, and contour-integral root centroids.

#include <functional>
#include <optional>

#include "pointscatter/model.hpp"

namespace pointscatter::roots {

using Function = std::function<complex(complex)>;

/// Net number of zeros minus poles inside the rectangle
/// [re_lo, re_hi] x [im_lo, im_hi], counterclockwise. The boundary is first
/// cut into pieces no longer than `max_segment` and then bisected until the
/// phase change between neighbouring samples is below pi/4. Returns nullopt
/// when f vanishes on the contour or the phase cannot be resolved.
std::optional<int> winding_number(const Function& f, double re_lo, double re_hi, double im_lo, double im_hi,
                                  double max_segment);

/// Central-difference derivative with step h.
complex derivative(const Function& f, complex z, double h);

/// Modified Newton iteration k <- k - m Re(f/f') on the real axis, with step
/// halving whenever |f| grows. Stays inside [lo, hi].
double newton_real(const Function& f, double start, int multiplicity, double lo, double hi);

/// Mean of the m roots inside the circle |z - center| = radius,
///   (1/m) (1/2 pi i) \oint z f'/f dz, by the trapezoid rule.
complex root_centroid(const Function& f, complex center, double radius, int multiplicity, int nodes = 64);

}  // namespace pointscatter::roots
