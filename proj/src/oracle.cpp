#include "pointscatter/oracle.hpp"

#include <cmath>
#include <sstream>

#include "pointscatter/errors.hpp"

namespace pointscatter::oracle {
namespace {

constexpr complex I(0.0, 1.0);

void require_off_sites(const Lattice& lattice, double x) {
  for (const auto& site : lattice) {
    if (std::abs(x - site.position) < 1e-12) {
      throw Error(ErrorKind::OnInteractionPoint, "oracle evaluation on an interaction point");
    }
  }
}

TransferState wall_state(Wall wall) {
  return wall == Wall::Dirichlet ? TransferState{0.0, 1.0} : TransferState{1.0, 0.0};
}

// Carries a solution known at `from` (left of `to`) rightwards to `to`,
// crossing every site in between.
TransferState shoot_right(const Lattice& lattice, TransferState s, double from, double to, complex k) {
  double at = from;
  for (const auto& site : lattice) {
    if (site.position < from) continue;  // a site exactly at `from` is still crossed
    if (site.position >= to) break;
    s = free_propagate(s, site.position - at, k);
    s = transfer_step(site.params, s);
    at = site.position;
  }
  return free_propagate(s, to - at, k);
}

// Carries a solution known at `from` leftwards to `to` < `from`.
TransferState shoot_left(const Lattice& lattice, TransferState s, double from, double to, complex k) {
  double at = from;
  for (auto it = lattice.sites().rbegin(); it != lattice.sites().rend(); ++it) {
    if (it->position > from) continue;
    if (it->position <= to) break;
    s = free_propagate(s, it->position - at, k);
    s = inverse_transfer_step(it->params, s);
    at = it->position;
  }
  return free_propagate(s, to - at, k);
}

// Solution satisfying the left boundary condition, evaluated at x.
TransferState left_solution(const Geometry& g, const Lattice& lattice, double x, complex k) {
  if (g.is_half_line() || g.is_box()) {
    const Wall wall = g.is_box() ? std::get<BoxGeometry>(g.variant()).left
                                 : std::get<HalfLineGeometry>(g.variant()).wall;
    return shoot_right(lattice, wall_state(wall), 0.0, x, k);
  }
  // Line: exp(-ikx) to the left of every site.
  const double start = lattice.empty() ? x : std::min(x, lattice[0].position);
  const complex e = std::exp(-I * k * start);
  return shoot_right(lattice, TransferState{e, -I * k * e}, start, x, k);
}

TransferState right_solution(const Geometry& g, const Lattice& lattice, double x, complex k) {
  if (g.is_box()) {
    const auto& box = std::get<BoxGeometry>(g.variant());
    return shoot_left(lattice, wall_state(box.right), box.length, x, k);
  }
  const double start = lattice.empty() ? x : std::max(x, lattice[lattice.size() - 1].position);
  const complex e = std::exp(I * k * start);
  return shoot_left(lattice, TransferState{e, I * k * e}, start, x, k);
}

complex ring_green(const RingGeometry& ring, const Lattice& lattice, double x_f, double x_i, complex k) {
  const double lo = -0.5 * ring.length;
  const double hi = 0.5 * ring.length;
  // v(x) = (G, dG/dx_f). v(hi) = M2 (M1 v(lo) + e2) must equal v(lo).
  auto column = [&](TransferState s, double from, double to) { return shoot_right(lattice, s, from, to, k); };
  const TransferState c1 = column({1.0, 0.0}, lo, x_i);
  const TransferState c2 = column({0.0, 1.0}, lo, x_i);
  const Matrix2 m1{{{c1.psi, c2.psi}, {c1.dpsi, c2.dpsi}}};
  const TransferState d1 = column({1.0, 0.0}, x_i, hi);
  const TransferState d2 = column({0.0, 1.0}, x_i, hi);
  const Matrix2 m2{{{d1.psi, d2.psi}, {d1.dpsi, d2.dpsi}}};
  const Matrix2 mono = multiply(m2, m1);
  const Matrix2 a{{{1.0 - mono[0][0], -mono[0][1]}, {-mono[1][0], 1.0 - mono[1][1]}}};
  const complex rhs0 = m2[0][1];
  const complex rhs1 = m2[1][1];

  // Rank test on I - M via its singular values.
  double fro2 = 0.0;
  for (const auto& row : a)
    for (complex v : row) fro2 += std::norm(v);
  const complex det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
  const double disc = std::sqrt(std::max(0.0, fro2 * fro2 - 4.0 * std::norm(det)));
  const double smax = std::sqrt(0.5 * (fro2 + disc));
  const double smin = (smax > 0.0) ? std::abs(det) / smax : 0.0;
  if (smax == 0.0 || smin < 1e-10 * smax) {
    throw Error(ErrorKind::WronskianVanishes, "ring closure is rank deficient (k is an eigenvalue)");
  }
  const TransferState v0{(rhs0 * a[1][1] - a[0][1] * rhs1) / det, (a[0][0] * rhs1 - a[1][0] * rhs0) / det};
  if (x_f < x_i) return column(v0, lo, x_f).psi;
  TransferState at_src = column(v0, lo, x_i);
  at_src.dpsi += 1.0;
  return column(at_src, x_i, x_f).psi;
}

}  // namespace

Matrix2 identity_matrix() { return Matrix2{{{1.0, 0.0}, {0.0, 1.0}}}; }

Matrix2 multiply(const Matrix2& l, const Matrix2& r) {
  Matrix2 out{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out[i][j] = l[i][0] * r[0][j] + l[i][1] * r[1][j];
  return out;
}

TransferState apply(const Matrix2& m, TransferState s) {
  return {m[0][0] * s.psi + m[0][1] * s.dpsi, m[1][0] * s.psi + m[1][1] * s.dpsi};
}

Matrix2 interaction_matrix(const InteractionParams& p) {
  const complex w = p.omega();
  return Matrix2{{{w * p.a(), w * p.b()}, {w * p.c(), w * p.d()}}};
}

Matrix2 propagation_matrix(double dx, complex k) {
  const complex c = std::cos(k * dx);
  const complex s = std::sin(k * dx);
  return Matrix2{{{c, s / k}, {-k * s, c}}};
}

TransferState transfer_step(const InteractionParams& p, TransferState s) {
  return apply(interaction_matrix(p), s);
}

TransferState inverse_transfer_step(const InteractionParams& p, TransferState s) {
  const complex w = std::conj(p.omega());
  return {w * (p.d() * s.psi - p.b() * s.dpsi), w * (-p.c() * s.psi + p.a() * s.dpsi)};
}

TransferState free_propagate(TransferState s, double dx, complex k) {
  if (dx == 0.0) return s;
  return apply(propagation_matrix(dx, k), s);
}

complex wronskian(TransferState u, TransferState v) { return u.psi * v.dpsi - u.dpsi * v.psi; }

Matrix2 block_transfer_matrix(const Lattice& lattice, std::size_t l, std::size_t n, complex k) {
  if (l == 0 || n > lattice.size() || l > n) {
    throw Error(ErrorKind::InvalidArgument, "block indices must satisfy 1 <= l <= n <= N");
  }
  Matrix2 m = interaction_matrix(lattice[l - 1].params);
  for (std::size_t i = l + 1; i <= n; ++i) {
    const double dx = lattice[i - 1].position - lattice[i - 2].position;
    m = multiply(propagation_matrix(dx, k), m);
    m = multiply(interaction_matrix(lattice[i - 1].params), m);
  }
  return m;
}

BlockAmplitudes oracle_block_amplitudes(const Lattice& lattice, std::size_t l, std::size_t n, complex k) {
  if (std::abs(k) < kMinWavenumber) throw Error(ErrorKind::KTooSmall, "|k| must be >= 1e-9");
  const Matrix2 m = block_transfer_matrix(lattice, l, n, k);
  // (psi, psi') = P (A, B) for A e^{ikx} + B e^{-ikx} at the local origin.
  const Matrix2 p{{{1.0, 1.0}, {I * k, -I * k}}};
  const Matrix2 p_inv{{{0.5, 0.5 / (I * k)}, {0.5, -0.5 / (I * k)}}};
  const Matrix2 q = multiply(p_inv, multiply(m, p));
  const complex det_q = q[0][0] * q[1][1] - q[0][1] * q[1][0];
  BlockAmplitudes out;
  out.r_plus = -q[1][0] / q[1][1];
  out.t_plus = det_q / q[1][1];
  out.t_minus = 1.0 / q[1][1];
  out.r_minus = q[0][1] / q[1][1];
  out.first_index = l;
  out.last_index = n;
  out.left_position = lattice[l - 1].position;
  out.right_position = lattice[n - 1].position;
  return out;
}

complex oracle_green(const Geometry& geometry, const Lattice& lattice, double x_f, double x_i, complex k) {
  if (std::abs(k) < kMinWavenumber) throw Error(ErrorKind::KTooSmall, "|k| must be >= 1e-9");
  if (!geometry.contains(x_f) || !geometry.contains(x_i)) {
    throw Error(ErrorKind::OutOfDomain, "oracle evaluation point outside the domain");
  }
  require_off_sites(lattice, x_f);
  require_off_sites(lattice, x_i);

  if (const auto* ring = std::get_if<RingGeometry>(&geometry.variant())) {
    return ring_green(*ring, lattice, x_f, x_i, k);
  }

  const TransferState left_src = left_solution(geometry, lattice, x_i, k);
  const TransferState right_src = right_solution(geometry, lattice, x_i, k);
  const complex w = wronskian(left_src, right_src);
  const double scale = std::abs(left_src.psi * right_src.dpsi) + std::abs(left_src.dpsi * right_src.psi);
  if (std::abs(w) <= 1e-12 * scale) {
    throw Error(ErrorKind::WronskianVanishes, "Wronskian vanishes (k is an eigenvalue)");
  }
  if (x_f <= x_i) {
    return left_solution(geometry, lattice, x_f, k).psi * right_src.psi / w;
  }
  return right_solution(geometry, lattice, x_f, k).psi * left_src.psi / w;
}

complex ring_closure_determinant(double length, const Lattice& lattice, complex k) {
  const double lo = -0.5 * length;
  const double hi = 0.5 * length;
  const TransferState c1 = shoot_right(lattice, {1.0, 0.0}, lo, hi, k);
  const TransferState c2 = shoot_right(lattice, {0.0, 1.0}, lo, hi, k);
  return (1.0 - c1.psi) * (1.0 - c2.dpsi) - c2.psi * c1.dpsi;
}

complex box_shooting_residual(const Lattice& lattice, double length, Wall left, Wall right, complex k) {
  const TransferState s = shoot_right(lattice, wall_state(left), 0.0, length, k);
  return right == Wall::Dirichlet ? s.psi : s.dpsi;
}

namespace {

complex growing_coefficient_at(TransferState s, double x, complex k) {
  // s = A e^{ikx} (1, ik) + B e^{-ikx} (1, -ik)  =>  B = (ik psi - psi') e^{ikx} / (2ik)
  return (I * k * s.psi - s.dpsi) * std::exp(I * k * x) / (2.0 * I * k);
}

}  // namespace

complex line_growing_coefficient(const Lattice& lattice, complex k) {
  if (lattice.empty()) return 0.0;
  const double start = lattice[0].position;
  const double end = lattice[lattice.size() - 1].position + 1.0;
  const complex e = std::exp(-I * k * start);
  const TransferState s = shoot_right(lattice, {e, -I * k * e}, start, end, k);
  return growing_coefficient_at(s, end, k);
}

complex halfline_growing_coefficient(const Lattice& lattice, Wall wall, complex k) {
  const double end = (lattice.empty() ? 0.0 : lattice[lattice.size() - 1].position) + 1.0;
  const TransferState s = shoot_right(lattice, wall_state(wall), 0.0, end, k);
  return growing_coefficient_at(s, end, k);
}

}  // namespace pointscatter::oracle
