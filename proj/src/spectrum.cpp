#include "pointscatter/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/tools/minima.hpp>

#include "pointscatter/composition.hpp"
#include "pointscatter/errors.hpp"
#include "pointscatter/greens.hpp"
#include "pointscatter/oracle.hpp"
#include "pointscatter/roots.hpp"
#include "parallel.hpp"

namespace pointscatter {
namespace {

constexpr complex I(0.0, 1.0);
constexpr double kMultiplicityHalfWidth = 1e-4;
constexpr int kScanRefinements = 3;

complex nan_complex() {
  const double n = std::numeric_limits<double>::quiet_NaN();
  return {n, n};
}

// Evaluates f, stepping off an exact hit of an intermediate pole; NaN if
// that fails too.
template <class F>
complex guarded(F&& f, complex k) {
  for (double nudge : {0.0, 1e-13, -1e-13}) {
    try {
      return f(k * (1.0 + nudge));
    } catch (const Error&) {
    }
  }
  return nan_complex();
}

void require_kind(bool ok, const char* what) {
  if (!ok) throw Error(ErrorKind::InvalidArgument, what);
}

bool ring_root_confirmed(double length, const Lattice& lattice, complex k, complex step) {
  const double here = std::abs(oracle::ring_closure_determinant(length, lattice, k));
  const double left = std::abs(oracle::ring_closure_determinant(length, lattice, k - 0.25 * step));
  const double right = std::abs(oracle::ring_closure_determinant(length, lattice, k + 0.25 * step));
  return here <= 1e-6 * std::max({left, right, 1e-300});
}

struct ScanOutcome {
  std::vector<EigenRoot> roots;  // k stored as the axis coordinate t, with k = dir * t
  std::vector<EigenRoot> rejected;
  std::optional<int> winding;
};

// Zeros of the cleared function along the ray k = dir * t, t in (lo, hi).
ScanOutcome scan_axis(const Geometry& geometry, const Lattice& lattice, double lo, double hi, double step,
                      complex dir) {
  auto cleared = [&](complex t) {
    return guarded([&](complex q) { return cleared_secular_function(geometry, lattice, q); }, dir * t);
  };
  const roots::Function fn = cleared;

  const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / step));
  std::vector<double> ts(n + 1);
  std::vector<double> mags(n + 1);
  double d_scale = 1.0;
  for (std::size_t i = 0; i <= n; ++i) {
    ts[i] = std::min(hi, lo + static_cast<double>(i) * step);
    mags[i] = std::abs(cleared(ts[i]));
    if (std::isfinite(mags[i])) d_scale = std::max(d_scale, mags[i]);
  }

  ScanOutcome out;
  std::vector<EigenRoot> found;
  for (std::size_t i = 0; i <= n; ++i) {
    const bool left_ok = i == 0 || mags[i] <= mags[i - 1];
    const bool right_ok = i == n || mags[i] <= mags[i + 1];
    if (!left_ok || !right_ok || !std::isfinite(mags[i])) continue;
    const double a = ts[i == 0 ? 0 : i - 1];
    const double b = ts[i == n ? n : i + 1];
    const auto mag = [&](double t) { return std::abs(cleared(t)); };
    const double start = boost::math::tools::brent_find_minima(mag, a, b, 50).first;

    std::optional<int> m;
    for (double w = kMultiplicityHalfWidth; w > 1e-7 && !m; w *= 0.25) {
      m = roots::winding_number(fn, start - w, start + w, -w, w, w);
    }
    if (!m || *m <= 0) continue;

    double t = roots::newton_real(fn, start, *m, std::max(lo, a - step), std::min(hi, b + step));
    if (*m > 1) t = roots::root_centroid(fn, t, 0.5 * kMultiplicityHalfWidth, *m).real();
    if (t <= lo || t >= hi) continue;
    if (!(std::abs(cleared(t)) <= 1e-10 * d_scale)) continue;
    // Off the real axis a block pole can sit right on the root, so report the
    // cleared value there.
    const double residual = dir == complex(1.0)
                                ? std::abs(secular_function(geometry, lattice, dir * t))
                                : std::abs(cleared(t));
    found.push_back({t, *m, residual});
  }

  std::sort(found.begin(), found.end(), [](const EigenRoot& l, const EigenRoot& r) { return l.k < r.k; });
  for (const auto& root : found) {
    if (!out.roots.empty() && std::abs(root.k - out.roots.back().k) < 1e-7 * std::max(1.0, root.k)) continue;
    out.roots.push_back(root);
  }
  if (geometry.is_ring()) {
    std::vector<EigenRoot> kept;
    for (const auto& root : out.roots) {
      (ring_root_confirmed(geometry.length(), lattice, dir * root.k, dir * step) ? kept : out.rejected)
          .push_back(root);
    }
    out.roots = std::move(kept);
  }
  out.winding = roots::winding_number(fn, lo, hi, -kMultiplicityHalfWidth, kMultiplicityHalfWidth, step);
  return out;
}

// Runs scan_axis with progressively finer steps until the argument-principle
// count matches the roots found.
ScanOutcome checked_scan(const Geometry& geometry, const Lattice& lattice, double lo, double hi, double step,
                         complex dir) {
  for (int attempt = 0; attempt <= kScanRefinements; ++attempt, step *= 0.25) {
    ScanOutcome scan = scan_axis(geometry, lattice, lo, hi, step, dir);
    int total = 0;
    for (const auto& r : scan.roots) total += r.multiplicity;
    for (const auto& r : scan.rejected) total += r.multiplicity;
    if (scan.winding && *scan.winding == total) return scan;
  }
  std::ostringstream os;
  os << "root count disagrees with the argument-principle count on (" << lo << ", " << hi << ") after "
     << kScanRefinements << " refinements";
  throw Error(ErrorKind::ScanTooCoarse, os.str());
}

}  // namespace

complex secular_function(const Geometry& geometry, const Lattice& lattice, Wavenumber wk) {
  const complex k = wk.value();
  const std::size_t n = lattice.size();
  BlockAmplitudes block;
  double y1 = 0.0, yn = 0.0;
  if (n > 0) {
    block = compose_cells(lattice_cells(lattice, wk), wk);
    y1 = lattice[0].position;
    yn = lattice[n - 1].position;
  }
  const auto e = [&](double phase) { return std::exp(I * k * phase); };

  if (geometry.is_line()) return n == 0 ? complex(1.0) : 1.0 / block.t_plus;
  if (const auto* half = std::get_if<HalfLineGeometry>(&geometry.variant())) {
    if (n == 0) return 1.0;
    return 1.0 + wall_sign(half->wall) * block.r_plus * e(2.0 * y1);
  }
  if (const auto* box = std::get_if<BoxGeometry>(&geometry.variant())) {
    const double s0 = wall_sign(box->left);
    const double sl = wall_sign(box->right);
    const double len = box->length;
    if (n == 0) return 1.0 - s0 * sl * e(2.0 * len);
    return (1.0 + s0 * block.r_plus * e(2.0 * y1)) * (1.0 + sl * block.r_minus * e(2.0 * (len - yn))) -
           s0 * sl * block.t_plus * block.t_minus * e(2.0 * (y1 + len - yn));
  }
  const double len = geometry.length();
  if (n == 0) {
    const complex one = 1.0 - e(len);
    return one * one;
  }
  const double gap = len - (yn - y1);
  return 1.0 - (block.t_plus + block.t_minus) * e(gap) +
         (block.t_plus * block.t_minus - block.r_plus * block.r_minus) * e(2.0 * gap);
}

complex cleared_secular_function(const Geometry& geometry, const Lattice& lattice, Wavenumber k) {
  const complex d = secular_function(geometry, lattice, k);
  if (geometry.is_line() || lattice.empty()) return d;
  return d / compose_cells(lattice_cells(lattice, k), k).t_minus;
}

SpectrumResult find_eigenvalues(const Geometry& geometry, const Lattice& lattice, double k_min, double k_max) {
  require_kind(geometry.is_box() || geometry.is_ring(), "eigenvalue search needs a box or a ring");
  if (!std::isfinite(k_min) || !std::isfinite(k_max) || !(k_min > 0.0) || !(k_max > k_min)) {
    throw Error(ErrorKind::InvalidArgument, "need 0 < k_min < k_max");
  }
  geometry.validate(lattice);
  // Open interval; nudging the edges keeps the counting contour off roots that
  // sit exactly on an endpoint.
  const double lo = k_min * (1.0 + 1e-10);
  const double hi = k_max * (1.0 - 1e-10);
  double step = std::min(std::numbers::pi / (4.0 * geometry.length()), (hi - lo) / 2000.0);

  ScanOutcome scan = checked_scan(geometry, lattice, lo, hi, step, 1.0);
  SpectrumResult result;
  result.eigen_k = std::move(scan.roots);
  for (const auto& r : scan.rejected) result.rejected_k.push_back(r.k);
  result.winding_count = *scan.winding;
  return result;
}

SpectrumResult find_bound_states(const Geometry& geometry, const Lattice& lattice, double kappa_max) {
  if (!std::isfinite(kappa_max) || !(kappa_max > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "kappa_max must be positive");
  }
  geometry.validate(lattice);
  SpectrumResult result;
  // The empty line and half-line have no bound states; the empty box and ring
  // have none below zero either.
  if (lattice.empty()) return result;

  const double lo = kMinWavenumber * (1.0 + 1e-6);
  if (!(kappa_max > lo)) return result;
  const double hi = kappa_max;
  const double step = (hi - lo) / 4000.0;
  const ScanOutcome scan = checked_scan(geometry, lattice, lo, hi, step, complex(0.0, 1.0));
  for (const auto& r : scan.roots) {
    result.bound_k.push_back({complex(0.0, r.k), -r.k * r.k, r.residual, r.multiplicity});
  }
  result.winding_count = *scan.winding;
  std::sort(result.bound_k.begin(), result.bound_k.end(),
            [](const BoundRoot& l, const BoundRoot& r) { return l.energy < r.energy; });
  return result;
}

std::vector<double> density_of_states(const Geometry& geometry, const Lattice& lattice, std::span<const double> energies,
                                      double eta, double x_lo, double x_hi, unsigned threads) {
  if (!std::isfinite(eta) || !(eta > 0.0)) throw Error(ErrorKind::InvalidArgument, "eta must be positive");
  if (!std::isfinite(x_lo) || !std::isfinite(x_hi) || !(x_hi > x_lo)) {
    throw Error(ErrorKind::InvalidArgument, "x_window must satisfy x_lo < x_hi");
  }
  if (x_lo < geometry.lower() || x_hi > geometry.upper()) {
    throw Error(ErrorKind::OutOfDomain, "x_window must lie inside the domain");
  }
  geometry.validate(lattice);

  std::vector<double> cuts{x_lo};
  for (const auto& site : lattice)
    if (site.position > x_lo && site.position < x_hi) cuts.push_back(site.position);
  cuts.push_back(x_hi);

  const auto rho_at = [&](double energy) {
    const complex k = wavenumber_from_energy(complex(energy, eta));
    try {
      const GreenKernel kernel(geometry, lattice, k);
      complex total = 0.0;
      for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
        const DiagonalForm diag = kernel.diagonal(0.5 * (cuts[p] + cuts[p + 1]));
        total += diag.integral(cuts[p], cuts[p + 1], k);
      }
      return -total.imag() / std::numbers::pi;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::SpectralPole) throw;
      std::ostringstream os;
      os << "E = " << energy << ": broadening eta = " << eta << " leaves the contour on a spectral pole";
      throw Error(ErrorKind::EtaTooSmall, os.str());
    }
  };

  std::vector<double> out(energies.size());
  detail::parallel_for(energies.size(), threads, [&](unsigned, std::size_t i) { out[i] = rho_at(energies[i]); });
  return out;
}

}  // namespace pointscatter
