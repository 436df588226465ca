#include "pointscatter/greens.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pointscatter/amplitudes.hpp"
#include "pointscatter/errors.hpp"

namespace pointscatter {
namespace {

constexpr complex I(0.0, 1.0);
constexpr double kPoleFloor = 1e-14;
constexpr double kOnPointTolerance = 1e-12;

void require_denominator(complex d, const char* what) {
  if (!std::isfinite(d.real()) || !std::isfinite(d.imag()) || std::abs(d) < kPoleFloor) {
    std::ostringstream os;
    os << what << " denominator vanishes (|D| = " << std::abs(d) << "); k is at a spectral pole";
    throw Error(ErrorKind::SpectralPole, os.str());
  }
}

double wrap_centered(double u, double length) { return u - length * std::floor((u + 0.5 * length) / length); }

double sgn(double v) { return v < 0.0 ? -1.0 : 1.0; }

}  // namespace

std::string_view to_string(GreenBranch branch) {
  switch (branch) {
    case GreenBranch::SameCell: return "SameCell";
    case GreenBranch::CrossCell: return "CrossCell";
    case GreenBranch::HalfLine: return "HalfLine";
    case GreenBranch::Box: return "Box";
    case GreenBranch::RingSingle: return "RingSingle";
    case GreenBranch::RingLattice: return "RingLattice";
  }
  return "Unknown";
}

// ---------------------------------------------------------------------------
// ExpForm / DiagonalForm

complex ExpForm::value(double x_f, double x_i, complex k) const {
  return pp * std::exp(I * k * (x_f + x_i)) + pm * std::exp(I * k * (x_f - x_i)) +
         mp * std::exp(-I * k * (x_f - x_i)) + mm * std::exp(-I * k * (x_f + x_i));
}

complex ExpForm::d_dxf(double x_f, double x_i, complex k) const {
  return I * k *
         (pp * std::exp(I * k * (x_f + x_i)) + pm * std::exp(I * k * (x_f - x_i)) -
          mp * std::exp(-I * k * (x_f - x_i)) - mm * std::exp(-I * k * (x_f + x_i)));
}

complex ExpForm::d_dxi(double x_f, double x_i, complex k) const {
  return I * k *
         (pp * std::exp(I * k * (x_f + x_i)) - pm * std::exp(I * k * (x_f - x_i)) +
          mp * std::exp(-I * k * (x_f - x_i)) - mm * std::exp(-I * k * (x_f + x_i)));
}

ExpForm ExpForm::reframed(double s, double of, double oi, complex k) const {
  // c_{st} e^{ik(s u_f + t u_i)} with u = s x + o picks up e^{ik(s o_f + t o_i)}
  // and moves to the exponent (s*sign, t*sign).
  const complex e_pp = pp * std::exp(I * k * (of + oi));
  const complex e_pm = pm * std::exp(I * k * (of - oi));
  const complex e_mp = mp * std::exp(I * k * (-of + oi));
  const complex e_mm = mm * std::exp(-I * k * (of + oi));
  if (s > 0.0) return ExpForm{e_pp, e_pm, e_mp, e_mm};
  return ExpForm{e_mm, e_mp, e_pm, e_pp};
}

complex DiagonalForm::value(double x, complex k) const {
  return constant + plus * std::exp(2.0 * I * k * x) + minus * std::exp(-2.0 * I * k * x);
}

complex DiagonalForm::integral(double a, double b, complex k) const {
  const complex two_ik = 2.0 * I * k;
  return constant * (b - a) + plus * (std::exp(two_ik * b) - std::exp(two_ik * a)) / two_ik +
         minus * (std::exp(-two_ik * a) - std::exp(-two_ik * b)) / two_ik;
}

// ---------------------------------------------------------------------------
// Forms

namespace detail {

ExpForm line_form(std::span<const ScatteringCell> cells, std::size_t m, std::size_t j, Wavenumber wk) {
  const complex k = wk.value();
  const std::size_t count = cells.size();
  const complex two_ik = 2.0 * I * k;

  const BlockAmplitudes left = compose_cells(cells.subspan(0, m), wk);
  const BlockAmplitudes right = compose_cells(cells.subspan(j), wk);
  const complex r_left = left.r_minus;   // seen from the right, referenced at y_m
  const complex r_right = right.r_plus;  // seen from the left, referenced at y_{j+1}
  const double y_m = m > 0 ? cells[m - 1].position : 0.0;
  const double y_j1 = j < count ? cells[j].position : 0.0;

  if (j == m) {
    const complex round_trip = r_left * r_right * std::exp(two_ik * (y_j1 - y_m));
    const complex d = 1.0 - round_trip;
    require_denominator(d, "cell");
    const complex pref = 1.0 / (two_ik * d);
    return ExpForm{pref * r_left * std::exp(-two_ik * y_m), pref, pref * round_trip,
                   pref * r_right * std::exp(two_ik * y_j1)};
  }

  const BlockAmplitudes mid = compose_cells(cells.subspan(m, j - m), wk);
  const double y_m1 = cells[m].position;
  const double y_j = cells[j - 1].position;
  const complex d = (1.0 - r_left * mid.r_plus * std::exp(two_ik * (y_m1 - y_m))) *
                        (1.0 - r_right * mid.r_minus * std::exp(two_ik * (y_j1 - y_j))) -
                    r_left * r_right * mid.t_plus * mid.t_minus * std::exp(-two_ik * (y_j - y_m1 + y_m - y_j1));
  require_denominator(d, "line");
  const complex pref = mid.t_plus * std::exp(-I * k * (y_j - y_m1)) / (two_ik * d);
  const complex lf = r_left * std::exp(-two_ik * y_m);
  const complex rf = r_right * std::exp(two_ik * y_j1);
  return ExpForm{pref * lf, pref, pref * lf * rf, pref * rf};
}

ExpForm free_ring_form(double length, Wavenumber wk) {
  const complex k = wk.value();
  const complex e = std::exp(I * k * length);
  const complex d = 1.0 - e;
  require_denominator(d, "free ring");
  const complex pref = 1.0 / (2.0 * I * k * d);
  return ExpForm{0.0, pref, pref * e, 0.0};
}

ExpForm ring_single_form(const ScatteringCell& c, double length, Wavenumber wk) {
  const complex k = wk.value();
  const complex e = std::exp(I * k * length);
  const complex d = (1.0 - c.t_plus * e) * (1.0 - c.t_minus * e) - c.r_plus * c.r_minus * e * e;
  require_denominator(d, "circle");
  const complex pref = 1.0 / (2.0 * I * k * d);
  return ExpForm{pref * c.r_minus * e, pref * (c.t_plus + (c.r_plus * c.r_minus - c.t_plus * c.t_minus) * e),
                 pref * (1.0 - c.t_plus * e) * e, pref * c.r_plus * e};
}

namespace {

// Ring with the cut already placed so that the frame is a plain interval
// [-L/2, L/2), x_i sits below every cell and x_f lies between cells j and j+1.
ExpForm ring_lattice_frame(std::span<const ScatteringCell> rc, double length, std::size_t j, Wavenumber wk) {
  const complex k = wk.value();
  const std::size_t n = rc.size();
  const double y1 = rc.front().position;
  const double yn = rc.back().position;

  const BlockAmplitudes a = compose_cells(rc.subspan(0, j), wk, y1);
  const BlockAmplitudes b = compose_cells(rc.subspan(j), wk, yn);
  const double yj = j > 0 ? a.right_position : y1;
  const double yj1 = j < n ? b.left_position : yn;
  const complex ka = k_factor(a, wk);
  const complex kb = k_factor(b, wk);

  const complex eL = std::exp(I * k * length);
  auto ex = [&](double phase) { return std::exp(I * k * phase); };

  const complex n_pm = a.t_plus * ex(-(yj - y1)) + b.t_minus * ka * ex(-(yn - yj1)) * eL;
  const complex n_pp = (b.r_minus * a.t_plus * ex(length - 2.0 * yn - yj + y1) +
                        a.r_minus * b.t_minus * ex(-(2.0 * yj + yn - yj1))) *
                       eL;
  const complex n_mm = a.r_plus * b.t_minus * ex(length + 2.0 * y1 - yn + yj1) +
                       b.r_plus * a.t_plus * ex(2.0 * yj1 - yj + y1);
  const complex n_mp = (b.t_minus * ex(-(yn - yj1)) + a.t_plus * kb * ex(-(yj - y1)) * eL) * eL;

  const complex d = -1.0 + a.r_plus * b.r_minus * ex(2.0 * (length - yn + y1)) +
                    a.r_minus * b.r_plus * ex(2.0 * (yj1 - yj)) +
                    (a.t_minus * b.t_minus + a.t_plus * b.t_plus) * eL * ex(-(yn - yj1 + yj - y1)) -
                    ka * kb * eL * eL;
  require_denominator(d, "periodic");
  const complex pref = -1.0 / (2.0 * I * k * d);
  return ExpForm{pref * n_pp, pref * n_pm, pref * n_mp, pref * n_mm};
}

}  // namespace

ExpForm ring_lattice_form(std::span<const ScatteringCell> cells, double length, double x_f, double x_i,
                          Wavenumber wk) {
  const double half = 0.5 * length;
  std::vector<ScatteringCell> work(cells.begin(), cells.end());
  double s = 1.0;
  double f = x_f;
  double i = x_i;

  auto place_cut = [&](double& cut, double& uf, double& ui) {
    double prev = work.back().position - length;
    for (const auto& c : work)
      if (c.position < i) prev = c.position;
    cut = i - 0.5 * (i - prev);
    uf = wrap_centered(f - cut - half, length);
    ui = wrap_centered(i - cut - half, length);
  };

  double cut = 0.0, uf = 0.0, ui = 0.0;
  place_cut(cut, uf, ui);
  if (uf < ui) {
    work = mirror_cells(work);
    s = -1.0;
    f = -f;
    i = -i;
    place_cut(cut, uf, ui);
  }

  std::vector<ScatteringCell> rotated = work;
  for (auto& c : rotated) c.position = wrap_centered(c.position - cut - half, length);
  std::sort(rotated.begin(), rotated.end(),
            [](const ScatteringCell& l, const ScatteringCell& r) { return l.position < r.position; });
  const auto j = static_cast<std::size_t>(
      std::count_if(rotated.begin(), rotated.end(), [&](const ScatteringCell& c) { return c.position < uf; }));

  return ring_lattice_frame(rotated, length, j, wk).reframed(s, uf - f, ui - i, wk.value());
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Kernel

GreenKernel::GreenKernel(const Geometry& geometry, const Lattice& lattice, Wavenumber k)
    : geometry_(geometry), lattice_(lattice), k_(k) {
  geometry_.validate(lattice_);
  if (const auto* half = std::get_if<HalfLineGeometry>(&geometry_.variant())) {
    cells_.push_back(wall_cell(half->wall, 0.0));
  } else if (const auto* box = std::get_if<BoxGeometry>(&geometry_.variant())) {
    cells_.push_back(wall_cell(box->left, 0.0));
  }
  for (const auto& site : lattice_) cells_.push_back(interaction_cell(site, k_));
  if (const auto* box = std::get_if<BoxGeometry>(&geometry_.variant())) {
    cells_.push_back(wall_cell(box->right, box->length));
  }
  for (const auto& c : cells_) positions_.push_back(c.position);
}

std::size_t GreenKernel::region_of(double x) const {
  if (!std::isfinite(x)) throw Error(ErrorKind::NonFinite, "evaluation point is not finite");
  const bool inside = geometry_.is_ring() ? (x >= geometry_.lower() && x <= geometry_.upper())
                                          : geometry_.contains(x);
  if (!inside) {
    std::ostringstream os;
    os << "x = " << x << " lies outside the domain";
    throw Error(ErrorKind::OutOfDomain, os.str());
  }
  for (const auto& site : lattice_) {
    if (std::abs(x - site.position) < kOnPointTolerance) {
      std::ostringstream os;
      os << "x = " << x << " coincides with the interaction at y = " << site.position;
      throw Error(ErrorKind::OnInteractionPoint, os.str());
    }
  }
  return static_cast<std::size_t>(std::lower_bound(positions_.begin(), positions_.end(), x) - positions_.begin());
}

GreenKernel::Key GreenKernel::key_for(double x_f, double x_i) const {
  const std::size_t rf = region_of(x_f);
  const std::size_t ri = region_of(x_i);
  if (!geometry_.is_ring()) {
    const bool forward = rf == ri ? x_f >= x_i : rf > ri;
    return Key{rf, ri, forward, 0};
  }
  const std::size_t n = lattice_.size();
  if (n == 0) return Key{0, 0, x_f >= x_i, 2};
  if (n == 1) {
    const double y = lattice_[0].position;
    const double hf = wrap_centered(x_f - y, geometry_.length());
    const double hi = wrap_centered(x_i - y, geometry_.length());
    if ((hf > 0.0) != (hi > 0.0)) {
      const double len = geometry_.length();
      const auto shift = [&](double h, double x) {
        return static_cast<std::size_t>(std::lround((x - y - h) / len) + 1);
      };
      return Key{shift(hf, x_f), shift(hi, x_i), hi < 0.0, 1};
    }
  }
  bool forward = true;
  if (rf == ri) {
    forward = x_f >= x_i;
  } else if ((rf == 0 && ri == n) || (rf == n && ri == 0)) {
    forward = rf == 0;
  }
  return Key{rf, ri, forward, 0};
}

GreenBranch GreenKernel::branch_for(const Key& key) const {
  if (geometry_.is_line()) return key.region_f == key.region_i ? GreenBranch::SameCell : GreenBranch::CrossCell;
  if (geometry_.is_half_line()) return GreenBranch::HalfLine;
  if (geometry_.is_box()) return GreenBranch::Box;
  return key.variant == 0 ? GreenBranch::RingLattice : GreenBranch::RingSingle;
}

ExpForm GreenKernel::build(const Key& key, double x_f, double x_i) const {
  const complex k = k_.value();
  if (!geometry_.is_ring()) {
    if (key.forward) return detail::line_form(cells_, key.region_i, key.region_f, k_);
    const std::size_t m = cells_.size();
    const auto mirrored = mirror_cells(cells_);
    return detail::line_form(mirrored, m - key.region_i, m - key.region_f, k_).reframed(-1.0, 0.0, 0.0, k);
  }
  const double len = geometry_.length();
  if (key.variant == 2) {
    const ExpForm free = detail::free_ring_form(len, k_);
    return key.forward ? free : free.reframed(-1.0, 0.0, 0.0, k);
  }
  if (key.variant == 1) {
    const double y = lattice_[0].position;
    const double hf = wrap_centered(x_f - y, len);
    const double hi = wrap_centered(x_i - y, len);
    const double of = hf - x_f;
    const double oi = hi - x_i;
    ScatteringCell cell = cells_.front();
    cell.position = 0.0;
    if (hi < 0.0) return detail::ring_single_form(cell, len, k_).reframed(1.0, of, oi, k);
    return detail::ring_single_form(cell.mirrored(), len, k_).reframed(-1.0, -of, -oi, k);
  }
  return detail::ring_lattice_form(cells_, len, x_f, x_i, k_);
}

const ExpForm& GreenKernel::form(double x_f, double x_i) const {
  const Key key = key_for(x_f, x_i);
  auto it = cache_.find(key);
  if (it == cache_.end()) it = cache_.emplace(key, build(key, x_f, x_i)).first;
  return it->second;
}

GreenEvaluation GreenKernel::evaluate(double x_f, double x_i) const {
  const Key key = key_for(x_f, x_i);
  auto it = cache_.find(key);
  if (it == cache_.end()) it = cache_.emplace(key, build(key, x_f, x_i)).first;
  const complex k = k_.value();
  return GreenEvaluation{it->second.value(x_f, x_i, k), it->second.d_dxf(x_f, x_i, k), x_f, x_i, k_,
                         branch_for(key)};
}

DiagonalForm GreenKernel::diagonal(double x) const {
  const ExpForm& f = form(x, x);
  const std::size_t r = region_of(x);
  double lo = geometry_.lower();
  double hi = geometry_.upper();
  if (r > 0) lo = positions_[r - 1];
  if (r < positions_.size()) hi = positions_[r];
  return DiagonalForm{f.pm + f.mp, f.pp, f.mm, lo, hi};
}

std::vector<double> GreenKernel::breakpoints() const {
  std::vector<double> out;
  for (const auto& site : lattice_) out.push_back(site.position);
  return out;
}

// ---------------------------------------------------------------------------
// Public entry points

GreenEvaluation green_single(const InteractionParams& p, double y, double x_f, double x_i, Wavenumber wk) {
  if (!std::isfinite(x_f) || !std::isfinite(x_i) || !std::isfinite(y)) {
    throw Error(ErrorKind::NonFinite, "positions must be finite");
  }
  const double uf = x_f - y;
  const double ui = x_i - y;
  if (std::abs(uf) < kOnPointTolerance || std::abs(ui) < kOnPointTolerance) {
    throw Error(ErrorKind::OnInteractionPoint, "evaluation point coincides with the interaction");
  }
  const complex k = wk.value();
  const Amplitudes amp = bare_amplitudes(p, wk);
  const double dx = uf - ui;
  const complex direct = std::exp(I * k * std::abs(dx));
  const complex two_ik = 2.0 * I * k;

  GreenEvaluation out{0.0, 0.0, x_f, x_i, wk, GreenBranch::CrossCell};
  if ((uf > 0.0) != (ui > 0.0)) {
    const complex t = uf > 0.0 ? amp.t_plus : amp.t_minus;
    out.value = t * direct / two_ik;
    out.d_dxf = t * I * k * sgn(dx) * direct / two_ik;
    return out;
  }
  // Both on one side: the reflection seen from that side.
  const complex r = uf > 0.0 ? amp.r_minus : amp.r_plus;
  const complex bounce = std::exp(I * k * (std::abs(uf) + std::abs(ui)));
  out.branch = GreenBranch::SameCell;
  out.value = (direct + r * bounce) / two_ik;
  out.d_dxf = I * k * (sgn(dx) * direct + r * sgn(uf) * bounce) / two_ik;
  return out;
}

GreenEvaluation green_line(const Lattice& lattice, double x_f, double x_i, Wavenumber k) {
  return GreenKernel(Geometry::line(), lattice, k).evaluate(x_f, x_i);
}

GreenEvaluation green_halfline(const Lattice& lattice, Wall wall, double x_f, double x_i, Wavenumber k) {
  return GreenKernel(Geometry::half_line(wall), lattice, k).evaluate(x_f, x_i);
}

GreenEvaluation green_box(const Lattice& lattice, double length, Wall left, Wall right, double x_f, double x_i,
                          Wavenumber k) {
  return GreenKernel(Geometry::box(length, left, right), lattice, k).evaluate(x_f, x_i);
}

GreenEvaluation green_ring(const Lattice& lattice, double length, double x_f, double x_i, Wavenumber k) {
  return GreenKernel(Geometry::ring(length), lattice, k).evaluate(x_f, x_i);
}

GreenEvaluation green(const Geometry& geometry, const Lattice& lattice, double x_f, double x_i, Wavenumber k) {
  return GreenKernel(geometry, lattice, k).evaluate(x_f, x_i);
}

// ---------------------------------------------------------------------------
// Closed forms

namespace closed_form {

complex delta_line(double gamma, double x_f, double x_i, complex k) {
  const complex two_ik = 2.0 * I * k;
  return (std::exp(I * k * std::abs(x_f - x_i)) +
          gamma / (two_ik - gamma) * std::exp(I * k * (std::abs(x_f) + std::abs(x_i)))) /
         two_ik;
}

complex delta_prime_line(double gamma, double x_f, double x_i, complex k) {
  const complex two_ik = 2.0 * I * k;
  return (std::exp(I * k * std::abs(x_f - x_i)) + gamma * k / (2.0 * I + gamma * k) * sgn(x_f) * sgn(x_i) *
                                                      std::exp(I * k * (std::abs(x_f) + std::abs(x_i)))) /
         two_ik;
}

complex halfline_single(const InteractionParams& p, double y, Wall wall, double x_f, double x_i, complex k) {
  const Amplitudes amp = bare_amplitudes(p, k);
  const double s = wall_sign(wall);
  const complex two_ik = 2.0 * I * k;
  const complex d = 1.0 + s * amp.r_plus * std::exp(2.0 * I * k * y);
  require_denominator(d, "half-line");
  if (x_i < y && x_f > y) {
    return amp.t_plus / (two_ik * d) * (std::exp(I * k * (x_f - x_i)) - s * std::exp(I * k * (x_f + x_i)));
  }
  if (x_i < y && x_f < y) {
    const complex ry = amp.r_plus * std::exp(2.0 * I * k * y);
    const double adx = std::abs(x_f - x_i);
    return (std::exp(I * k * adx) - s * ry * std::exp(-I * k * adx) - s * std::exp(I * k * (x_f + x_i)) +
            ry * std::exp(-I * k * (x_f + x_i))) /
           (two_ik * d);
  }
  throw Error(ErrorKind::InvalidArgument, "closed form covers x_i < y only");
}

complex box_single_denominator(const InteractionParams& p, double y, double length, Wall left, Wall right,
                               complex k) {
  const Amplitudes amp = bare_amplitudes(p, k);
  const double s0 = wall_sign(left);
  const double sl = wall_sign(right);
  return (1.0 + s0 * amp.r_plus * std::exp(2.0 * I * k * y)) *
             (1.0 + sl * amp.r_minus * std::exp(2.0 * I * k * (length - y))) -
         s0 * sl * amp.t_plus * amp.t_minus * std::exp(2.0 * I * k * length);
}

complex box_single(const InteractionParams& p, double y, double length, Wall left, Wall right, double x_f,
                   double x_i, complex k) {
  const Amplitudes amp = bare_amplitudes(p, k);
  const double s0 = wall_sign(left);
  const double sl = wall_sign(right);
  const complex two_ik = 2.0 * I * k;
  const complex d = box_single_denominator(p, y, length, left, right, k);
  require_denominator(d, "box");
  if (x_i < y && x_f > y) {
    return amp.t_plus / (two_ik * d) * (std::exp(-I * k * x_i) - s0 * std::exp(I * k * x_i)) *
           (std::exp(I * k * x_f) - sl * std::exp(2.0 * I * k * length) * std::exp(-I * k * x_f));
  }
  if (x_i < y && x_f < y) {
    const complex far = 1.0 + sl * amp.r_minus * std::exp(2.0 * I * k * (length - y));
    const complex r_eff =
        amp.r_plus * std::exp(2.0 * I * k * y) - sl * amp.t_plus * amp.t_minus * std::exp(2.0 * I * k * length) / far;
    const double adx = std::abs(x_f - x_i);
    return far / (two_ik * d) *
           (std::exp(I * k * adx) - s0 * r_eff * std::exp(-I * k * adx) - s0 * std::exp(I * k * (x_f + x_i)) +
            r_eff * std::exp(-I * k * (x_f + x_i)));
  }
  throw Error(ErrorKind::InvalidArgument, "closed form covers x_i < y only");
}

complex ring_single_denominator(const InteractionParams& p, double length, complex k) {
  const Amplitudes amp = bare_amplitudes(p, k);
  const complex e = std::exp(I * k * length);
  return (1.0 - amp.t_plus * e) * (1.0 - amp.t_minus * e) - amp.r_plus * amp.r_minus * e * e;
}

}  // namespace closed_form

}  // namespace pointscatter
