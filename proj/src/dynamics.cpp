#include "pointscatter/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>

#include "parallel.hpp"
#include "pointscatter/errors.hpp"
#include "pointscatter/greens.hpp"
#include "pointscatter/spectrum.hpp"

namespace pointscatter {
namespace {

constexpr complex I(0.0, 1.0);
constexpr double pi = std::numbers::pi;
constexpr double kLeakTolerance = 1e-12;
constexpr double kMinWallSigmas = 4.0;
constexpr double kSiteNudge = 1e-9;
constexpr int kRefinements = 2;
constexpr std::size_t kPanelNodes = 16;
constexpr double kMomentumReach = 6.0;

struct Node {
  double x;
  double w;
};

// Composite 16-point Gauss-Legendre on [a, b] split at `cuts`, panel width <= h.
std::vector<Node> panel_nodes(double a, double b, std::vector<double> cuts, double h) {
  using Rule = boost::math::quadrature::gauss<double, kPanelNodes>;
  cuts.push_back(a);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  std::vector<Node> out;
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const double lo = std::max(a, cuts[c]);
    const double hi = std::min(b, cuts[c + 1]);
    if (!(hi > lo)) continue;
    const auto panels = static_cast<std::size_t>(std::max(1.0, std::ceil((hi - lo) / h)));
    const double width = (hi - lo) / static_cast<double>(panels);
    for (std::size_t p = 0; p < panels; ++p) {
      const double mid = lo + (static_cast<double>(p) + 0.5) * width;
      const double half = 0.5 * width;
      for (std::size_t j = 0; j < Rule::abscissa().size(); ++j) {
        const double xi = Rule::abscissa()[j];
        const double wj = Rule::weights()[j] * half;
        out.push_back({mid - half * xi, wj});
        if (xi != 0.0) out.push_back({mid + half * xi, wj});
      }
    }
  }
  return out;
}

std::vector<double> site_positions(const Lattice& lattice) {
  std::vector<double> out;
  for (const auto& s : lattice) out.push_back(s.position);
  return out;
}

// Moves grid points off walls (inwards) and off sites (to the left limit).
double admissible_point(const Geometry& geometry, const Lattice& lattice, double x) {
  if (!std::isfinite(x)) throw Error(ErrorKind::NonFinite, "grid point is not finite");
  const double lo = geometry.lower();
  const double hi = geometry.upper();
  if (x < lo || x > hi) {
    std::ostringstream os;
    os << "grid point x = " << x << " lies outside the domain";
    throw Error(ErrorKind::OutOfDomain, os.str());
  }
  if (!geometry.is_ring()) {
    if (x - lo < kSiteNudge) x = lo + kSiteNudge;
    if (hi - x < kSiteNudge) x = hi - kSiteNudge;
  }
  for (const auto& s : lattice)
    if (std::abs(x - s.position) < kSiteNudge) x = s.position - kSiteNudge;
  return x;
}

void check_packet(const Geometry& geometry, const GaussianPacket& packet) {
  if (!std::isfinite(packet.x0) || !std::isfinite(packet.k0) || !std::isfinite(packet.sigma) ||
      !(packet.sigma > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "packet needs finite x0, k0 and sigma > 0");
  }
  for (double wall : {geometry.lower(), geometry.upper()}) {
    if (!std::isfinite(wall)) continue;
    const double gap = std::abs(packet.x0 - wall);
    const double leak = 0.5 * std::erfc(gap / (packet.sigma * std::numbers::sqrt2));
    const bool inside = packet.x0 > geometry.lower() && packet.x0 < geometry.upper();
    if (!inside || gap < kMinWallSigmas * packet.sigma || leak > kLeakTolerance) {
      std::ostringstream os;
      os << "packet at x0 = " << packet.x0 << " with sigma = " << packet.sigma << " is too close to the edge at "
         << wall;
      throw Error(ErrorKind::PacketTooWideForDomain, os.str());
    }
  }
}

// Upper bound on kappa for levels below zero: twice the sum of the single-site
// pole radii, plus one.
double kappa_bound(const Lattice& lattice) {
  double sum = 0.0;
  for (const auto& s : lattice) {
    const auto& p = s.params;
    const double trace = std::abs(p.a() + p.d());
    sum += p.b() != 0.0 ? 1.0 + std::max(trace, std::abs(p.c())) / std::abs(p.b()) : std::abs(p.c()) / trace;
  }
  return 2.0 * (1.0 + sum);
}

// A discrete level: eigenvalue k (real, i kappa, or 0) with its eigenspace.
struct Level {
  complex k;
  int multiplicity;
  double radius;  // residue circle radius in k
};

// Projector columns P(x, c) = Res_E G(x, c; E) for a fixed set of columns c,
// evaluated through trapezoid nodes on a circle around the level.
class Residue {
 public:
  Residue(const Geometry& g, const Lattice& lat, const Level& level, int nodes) {
    for (int j = 0; j < nodes; ++j) {
      const complex u = std::polar(1.0, 2.0 * pi * j / nodes);
      const complex k = level.k + level.radius * u;
      // (1/2 pi i) \oint G dE with dE = 2k dk = 2k i r u dtheta.
      weights_.push_back(2.0 * k * level.radius * u / static_cast<double>(nodes));
      kernels_.emplace_back(g, lat, k);
    }
  }

  complex operator()(double x, double c) const {
    complex sum = 0.0;
    for (std::size_t j = 0; j < kernels_.size(); ++j) sum += weights_[j] * kernels_[j](x, c);
    return sum;
  }

 private:
  std::vector<complex> weights_;
  std::vector<GreenKernel> kernels_;
};

// Orthonormal basis of a level's eigenspace as combinations of projector
// columns: v_i(x) = sum_a P(x, c_a) W(a, i).
struct LevelBasis {
  std::vector<double> columns;
  Eigen::MatrixXcd w;
};

LevelBasis level_basis(const Residue& residue, const std::vector<double>& candidates, int multiplicity) {
  const auto n = static_cast<Eigen::Index>(candidates.size());
  Eigen::MatrixXcd p(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b) p(a, b) = residue(candidates[a], candidates[b]);
  p = 0.5 * (p + p.adjoint()).eval();

  // Greedy diagonal pivoting: each pivot is the candidate the eigenspace
  // explains worst so far.
  std::vector<Eigen::Index> pivots;
  Eigen::MatrixXcd rest = p;
  const double scale = p.diagonal().real().maxCoeff();
  for (int step = 0; step < multiplicity; ++step) {
    Eigen::Index best = 0;
    rest.diagonal().real().maxCoeff(&best);
    const double d = rest(best, best).real();
    if (!(d > 1e-10 * scale)) break;
    pivots.push_back(best);
    const Eigen::VectorXcd col = rest.col(best) / std::sqrt(d);
    rest -= col * col.adjoint();
  }
  if (pivots.empty()) throw Error(ErrorKind::QuadratureUnderResolved, "could not resolve an eigenfunction");

  const auto m = static_cast<Eigen::Index>(pivots.size());
  Eigen::MatrixXcd sub(m, m);
  for (Eigen::Index a = 0; a < m; ++a)
    for (Eigen::Index b = 0; b < m; ++b) sub(a, b) = p(pivots[a], pivots[b]);
  const Eigen::LLT<Eigen::MatrixXcd> llt(sub);
  // W = L^{-H}, so that col^T W W^H conj(col) = col^T sub^{-1} conj(col).
  const Eigen::MatrixXcd l_inv = llt.matrixL().solve(Eigen::MatrixXcd::Identity(m, m));
  LevelBasis basis;
  for (auto i : pivots) basis.columns.push_back(candidates[i]);
  basis.w = l_inv.adjoint();
  return basis;
}

// Zero-energy eigenfunction, linear between sites.
struct ZeroMode {
  std::vector<double> starts;
  std::vector<std::array<complex, 2>> states;  // (psi, psi') at each start
  double scale = 1.0;

  complex operator()(double x) const {
    std::size_t i = 0;
    while (i + 1 < starts.size() && starts[i + 1] < x) ++i;
    return scale * (states[i][0] + (x - starts[i]) * states[i][1]);
  }
};

ZeroMode propagate_zero(const Lattice& lattice, double from, std::array<complex, 2> s) {
  ZeroMode mode;
  mode.starts.push_back(from);
  mode.states.push_back(s);
  double at = from;
  for (const auto& site : lattice) {
    s[0] += (site.position - at) * s[1];
    const auto& p = site.params;
    const complex om = p.omega();
    s = {om * (p.a() * s[0] + p.b() * s[1]), om * (p.c() * s[0] + p.d() * s[1])};
    at = site.position;
    mode.starts.push_back(at);
    mode.states.push_back(s);
  }
  return mode;
}

std::array<complex, 2> end_state(const ZeroMode& mode, double to) {
  const auto& s = mode.states.back();
  return {s[0] + (to - mode.starts.back()) * s[1], s[1]};
}

std::vector<ZeroMode> zero_modes(const Geometry& geometry, const Lattice& lattice) {
  std::vector<ZeroMode> modes;
  if (const auto* box = std::get_if<BoxGeometry>(&geometry.variant())) {
    const std::array<complex, 2> start =
        box->left == Wall::Dirichlet ? std::array<complex, 2>{0.0, 1.0} : std::array<complex, 2>{1.0, 0.0};
    ZeroMode mode = propagate_zero(lattice, 0.0, start);
    const auto end = end_state(mode, box->length);
    double size = 1.0;
    for (const auto& s : mode.states) size = std::max({size, std::abs(s[0]), std::abs(s[1])});
    const complex miss = box->right == Wall::Dirichlet ? end[0] : end[1];
    if (std::abs(miss) <= 1e-10 * size) modes.push_back(std::move(mode));
  } else if (geometry.is_ring()) {
    const double lo = geometry.lower();
    const double hi = geometry.upper();
    Eigen::Matrix2cd m;
    for (int col = 0; col < 2; ++col) {
      std::array<complex, 2> unit{col == 0 ? 1.0 : 0.0, col == 1 ? 1.0 : 0.0};
      const auto end = end_state(propagate_zero(lattice, lo, unit), hi);
      m(0, col) = end[0];
      m(1, col) = end[1];
    }
    const Eigen::Matrix2cd defect = m - Eigen::Matrix2cd::Identity();
    const Eigen::JacobiSVD<Eigen::Matrix2cd> svd(defect, Eigen::ComputeFullV);
    const double size = std::max(1.0, m.norm());
    for (int i = 0; i < 2; ++i) {
      if (svd.singularValues()(i) > 1e-10 * size) continue;
      const Eigen::Vector2cd v = svd.matrixV().col(i);
      modes.push_back(propagate_zero(lattice, lo, {v(0), v(1)}));
    }
  }
  if (modes.empty()) return modes;

  // Exact inner products (the modes are piecewise linear) and Gram-Schmidt.
  auto cuts = site_positions(lattice);
  const auto nodes = panel_nodes(geometry.lower(), geometry.upper(), cuts, geometry.length());
  const auto inner = [&](const ZeroMode& a, const ZeroMode& b) {
    complex s = 0.0;
    for (const auto& n : nodes) s += n.w * std::conj(a(n.x)) * b(n.x);
    return s;
  };
  for (std::size_t i = 0; i < modes.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const complex proj = inner(modes[j], modes[i]);
      auto& mi = modes[i];
      // Subtract proj * modes[j] state by state; both share the same starts.
      for (std::size_t s = 0; s < mi.states.size(); ++s) {
        mi.states[s][0] = mi.scale * mi.states[s][0] - proj * modes[j].scale * modes[j].states[s][0];
        mi.states[s][1] = mi.scale * mi.states[s][1] - proj * modes[j].scale * modes[j].states[s][1];
      }
      mi.scale = 1.0;
    }
    modes[i].scale /= std::sqrt(inner(modes[i], modes[i]).real());
  }
  return modes;
}

// Accumulates Psi(x, t) = sum_j a_j exp(-i E_j t) phi_j(x) over components.
class Assembly {
 public:
  Assembly(std::span<const double> times, std::size_t points, unsigned workers)
      : times_(times.begin(), times.end()),
        points_(points),
        buffers_(workers, std::vector<complex>(times.size() * points, 0.0)),
        weights_(workers, 0.0),
        energies_(workers, 0.0) {}

  // `weight` is the component's share of the squared norm.
  void add(unsigned worker, complex energy, complex amplitude, double weight, std::span<const complex> values) {
    auto& buf = buffers_[worker];
    for (std::size_t t = 0; t < times_.size(); ++t) {
      const complex a = amplitude * std::exp(-I * energy * times_[t]);
      complex* row = buf.data() + t * points_;
      for (std::size_t x = 0; x < points_; ++x) row[x] += a * values[x];
    }
    weights_[worker] += weight;
    energies_[worker] += weight * energy.real();
  }

  std::vector<complex> total() const {
    std::vector<complex> out(times_.size() * points_, 0.0);
    for (const auto& b : buffers_)
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
    return out;
  }
  double weight() const {
    double s = 0.0;
    for (double w : weights_) s += w;
    return s;
  }
  double energy() const {
    double s = 0.0;
    for (double e : energies_) s += e;
    return s;
  }

 private:
  std::vector<double> times_;
  std::size_t points_;
  std::vector<std::vector<complex>> buffers_;
  std::vector<double> weights_;
  std::vector<double> energies_;
};

struct Plan {
  std::vector<Node> packet;     // quadrature for <phi|Psi0>
  std::vector<double> outputs;  // user grid followed by the norm nodes
  std::vector<double> norm_weights;
  std::size_t grid_size = 0;
  double k_lo = 0.0;
  double k_hi = 0.0;
  double extent = 0.0;  // spatial spread that sets the k-phase variation
};

std::vector<Level> discrete_levels(const Geometry& geometry, const Lattice& lattice, double k_top) {
  std::vector<Level> levels;
  if (!lattice.empty()) {
    const auto below = find_bound_states(geometry, lattice, kappa_bound(lattice));
    for (const auto& b : below.bound_k) levels.push_back({b.k, b.multiplicity, 0.0});
  }
  if (geometry.is_box() || geometry.is_ring()) {
    const double margin = std::max(1.0, pi / geometry.length());
    const auto above = find_eigenvalues(geometry, lattice, 1e-4, k_top + margin);
    for (const auto& e : above.eigen_k)
      if (e.k < k_top + 0.5 * margin) levels.push_back({e.k, e.multiplicity, 0.0});
    // The topmost kept level needs a neighbour to size its circle.
    double next = k_top + margin;
    for (const auto& e : above.eigen_k)
      if (e.k >= k_top + 0.5 * margin) {
        next = e.k;
        break;
      }
    for (auto& l : levels) {
      if (l.k.imag() != 0.0) continue;
      double gap = std::min(l.k.real(), next - l.k.real());
      for (const auto& o : levels)
        if (&o != &l && o.k.imag() == 0.0) gap = std::min(gap, std::abs(o.k.real() - l.k.real()));
      l.radius = 0.4 * gap;
    }
  }
  for (auto& l : levels) {
    if (l.k.imag() == 0.0) continue;
    double gap = l.k.imag();
    for (const auto& o : levels)
      if (&o != &l && o.k.real() == 0.0 && o.k.imag() > 0.0) gap = std::min(gap, std::abs(o.k.imag() - l.k.imag()));
    l.radius = 0.4 * gap;
  }
  return levels;
}

std::vector<double> reference_candidates(const Geometry& geometry, const Lattice& lattice, const Level& level) {
  double lo = geometry.lower();
  double hi = geometry.upper();
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    const double reach = 3.0 / std::max(1e-3, level.k.imag());
    const double first = lattice.empty() ? 0.0 : lattice[0].position;
    const double last = lattice.empty() ? 0.0 : lattice[lattice.size() - 1].position;
    if (!std::isfinite(lo)) lo = first - reach;
    hi = last + reach;
    lo = std::max(lo, geometry.lower());
  }
  constexpr int count = 24;
  std::vector<double> out;
  for (int j = 0; j < count; ++j) {
    // Irrational offsets keep candidates off symmetric nodal points.
    double x = lo + (hi - lo) * (j + 0.5 + 0.1 * std::numbers::inv_sqrt3) / count;
    for (const auto& s : lattice)
      if (std::abs(x - s.position) < 1e-6 * (hi - lo)) x += 1e-3 * (hi - lo);
    if (x > geometry.lower() && x < geometry.upper()) out.push_back(x);
  }
  return out;
}

}  // namespace

complex GaussianPacket::operator()(double x) const {
  const double norm = std::pow(2.0 * pi * sigma * sigma, -0.25);
  const double d = x - x0;
  return norm * std::exp(complex(-d * d / (4.0 * sigma * sigma), k0 * x));
}

complex free_gaussian(const GaussianPacket& p, double x, double t) {
  const double norm = std::pow(2.0 * pi * p.sigma * p.sigma, -0.25);
  const complex alpha(p.sigma * p.sigma, t);
  const double d = x - p.x0 - 2.0 * p.k0 * t;
  return norm * std::sqrt(p.sigma * p.sigma / alpha) * std::exp(-d * d / (4.0 * alpha) + I * (p.k0 * x - p.k0 * p.k0 * t));
}

EvolutionResult evolve(const Geometry& geometry, const Lattice& lattice, const GaussianPacket& packet,
                       std::span<const double> times, std::span<const double> grid,
                       const EvolutionSettings& settings) {
  geometry.validate(lattice);
  check_packet(geometry, packet);
  for (double t : times)
    if (!std::isfinite(t) || t < 0.0) throw Error(ErrorKind::InvalidArgument, "times must be finite and >= 0");
  if (!(settings.norm_tolerance > 0.0) || !(settings.width_sigmas > 0.0) || !(settings.nodes_per_turn > 0.0) ||
      settings.contour_nodes < 8) {
    throw Error(ErrorKind::InvalidArgument, "invalid evolution settings");
  }

  const double sigma = packet.sigma;
  const double width = settings.width_sigmas;
  const double t_max = times.empty() ? 0.0 : *std::max_element(times.begin(), times.end());
  const bool bounded = geometry.is_box() || geometry.is_ring();
  const auto sites = site_positions(lattice);

  Plan plan;
  plan.k_hi = std::abs(packet.k0) + width / sigma;
  // Gauss nodes never touch k = 0, so the window may start there.
  plan.k_lo = std::max(0.0, std::abs(packet.k0) - width / sigma);
  const double h = std::min(sigma, 6.0 / (plan.k_hi + std::abs(packet.k0)));
  plan.packet = panel_nodes(std::max(geometry.lower(), packet.x0 - width * sigma),
                            std::min(geometry.upper(), packet.x0 + width * sigma), sites, h);

  for (double x : grid) plan.outputs.push_back(admissible_point(geometry, lattice, x));
  plan.grid_size = plan.outputs.size();
  double norm_lo = geometry.lower();
  double norm_hi = geometry.upper();
  if (!bounded) {
    // Anything faster than k0 +- 6/sigma carries less than e^-72 of the weight.
    const double reach = width * sigma + 2.0 * (std::abs(packet.k0) + kMomentumReach / sigma) * t_max;
    norm_lo = std::max(norm_lo, std::min(packet.x0 - reach, sites.empty() ? packet.x0 : sites.front() - reach));
    norm_hi = std::max(packet.x0 + reach, sites.empty() ? packet.x0 : sites.back() + reach);
  }
  // |Psi|^2 oscillates at up to twice the reach momentum; 16-point panels
  // integrate that to well below the norm tolerance at this width.
  const double k_reach = std::abs(packet.k0) + kMomentumReach / sigma;
  for (const auto& n : panel_nodes(norm_lo, norm_hi, sites, std::min(sigma, 6.0 / k_reach))) {
    plan.outputs.push_back(n.x);
    plan.norm_weights.push_back(n.w);
  }
  // Longest path from the packet to an output point, possibly via a reflection
  // off the outermost sites or the wall: sets the k-phase of the integrand.
  std::vector<double> turning(sites);
  if (geometry.is_half_line()) turning.push_back(0.0);
  double span_lo = packet.x0 - width * sigma;
  double span_hi = packet.x0 + width * sigma;
  for (double x : plan.outputs) {
    span_lo = std::min(span_lo, x);
    span_hi = std::max(span_hi, x);
    plan.extent = std::max(plan.extent, std::abs(x - packet.x0));
    for (double y : turning) plan.extent = std::max(plan.extent, std::abs(packet.x0 - y) + std::abs(y - x));
  }
  plan.extent += width * sigma;
  if (!sites.empty()) {
    span_lo = std::min(span_lo, sites.front());
    span_hi = std::max(span_hi, sites.back());
  }

  std::vector<complex> psi0;
  for (const auto& n : plan.packet) psi0.push_back(packet(n.x));
  const auto overlap = [&](std::span<const complex> phi) {
    complex s = 0.0;
    for (std::size_t q = 0; q < phi.size(); ++q) s += plan.packet[q].w * std::conj(phi[q]) * psi0[q];
    return s;
  };

  // Region r lies between sites r-1 and r; remember one point inside each.
  std::vector<double> regions(sites.size() + 1, std::numeric_limits<double>::quiet_NaN());
  const auto region_of = [&](double x) {
    const auto r = static_cast<std::size_t>(std::lower_bound(sites.begin(), sites.end(), x) - sites.begin());
    regions[r] = x;
    return r;
  };
  std::vector<std::size_t> packet_region;
  std::vector<std::size_t> out_region;
  for (const auto& n : plan.packet) packet_region.push_back(region_of(n.x));
  for (double x : plan.outputs) out_region.push_back(region_of(x));

  const std::size_t n_packet = plan.packet.size();
  const std::size_t n_out = plan.outputs.size();
  const auto levels = discrete_levels(geometry, lattice, plan.k_hi);
  const auto zeros = zero_modes(geometry, lattice);

  double turns_scale = settings.nodes_per_turn;
  for (int attempt = 0;; ++attempt, turns_scale *= 2.0) {
    std::vector<Node> knodes;
    if (!bounded) {
      const double phase = (plan.k_hi * plan.k_hi - plan.k_lo * plan.k_lo) * t_max + (plan.k_hi - plan.k_lo) * plan.extent;
      const double count = std::max(128.0, turns_scale * phase / (2.0 * pi));
      const double panels = std::ceil(count / kPanelNodes);
      knodes = panel_nodes(plan.k_lo, plan.k_hi, {}, (plan.k_hi - plan.k_lo) / panels);
    }
    const std::size_t jobs = knodes.size() + levels.size() + zeros.size();
    const unsigned workers = detail::worker_count(jobs, settings.threads);
    Assembly assembly(times, n_out, workers);

    const double x_left = std::min(span_lo, geometry.is_line() ? span_lo : 0.0) - 1.0;
    const double x_right = span_hi + 1.0;

    std::vector<std::vector<complex>> waves_packet(workers, std::vector<complex>(n_packet));
    std::vector<std::vector<complex>> waves_out(workers, std::vector<complex>(n_out));
    detail::parallel_for(jobs, workers, [&](unsigned worker, std::size_t job) {
      std::vector<complex> at_packet(n_packet);
      std::vector<complex> at_out(n_out);
      if (job < knodes.size()) {
        // Continuum: scattering states incident from the left (+) and right (-),
        //   psi+(x) = 2ik e^{ik xL} G(x, xL),  psi-(x) = 2ik e^{-ik xR} G(x, xR).
        const double k = knodes[job].x;
        const double w = knodes[job].w / (2.0 * pi);
        const GreenKernel kernel(geometry, lattice, k);
        for (std::size_t q = 0; q < n_packet; ++q) waves_packet[worker][q] = std::polar(1.0, k * plan.packet[q].x);
        for (std::size_t q = 0; q < n_out; ++q) waves_out[worker][q] = std::polar(1.0, k * plan.outputs[q]);
        for (int side = geometry.is_line() ? 0 : 1; side < 2; ++side) {
          const double ref = side == 0 ? x_left : x_right;
          const complex pref = 2.0 * I * k * std::exp((side == 0 ? 1.0 : -1.0) * I * k * ref);
          const complex e_ref = std::exp(I * k * ref);
          // Between sites psi = A e^{ikx} + B e^{-ikx}; read A, B off the
          // exponential form of G(x, ref) in each region.
          std::vector<std::array<complex, 2>> coef(regions.size());
          for (std::size_t r = 0; r < regions.size(); ++r) {
            if (!std::isfinite(regions[r])) continue;
            const ExpForm& f = kernel.form(regions[r], ref);
            coef[r] = {pref * (f.pp * e_ref + f.pm / e_ref), pref * (f.mp * e_ref + f.mm / e_ref)};
          }
          const auto fill = [&](std::span<const std::size_t> region, std::span<const complex> wave,
                                std::span<complex> out) {
            for (std::size_t q = 0; q < out.size(); ++q) {
              const auto& c = coef[region[q]];
              out[q] = c[0] * wave[q] + c[1] / wave[q];
            }
          };
          fill(packet_region, waves_packet[worker], at_packet);
          const complex c = overlap(at_packet);
          fill(out_region, waves_out[worker], at_out);
          assembly.add(worker, k * k, w * c, w * std::norm(c), at_out);
        }
        return;
      }
      if (job < knodes.size() + levels.size()) {
        const Level& level = levels[job - knodes.size()];
        const Residue residue(geometry, lattice, level, settings.contour_nodes);
        const LevelBasis basis = level_basis(residue, reference_candidates(geometry, lattice, level), level.multiplicity);
        const auto m = static_cast<Eigen::Index>(basis.columns.size());
        Eigen::MatrixXcd cols_packet(static_cast<Eigen::Index>(n_packet), m);
        Eigen::MatrixXcd cols_out(static_cast<Eigen::Index>(n_out), m);
        for (Eigen::Index a = 0; a < m; ++a) {
          for (std::size_t q = 0; q < n_packet; ++q) cols_packet(q, a) = residue(plan.packet[q].x, basis.columns[a]);
          for (std::size_t q = 0; q < n_out; ++q) cols_out(q, a) = residue(plan.outputs[q], basis.columns[a]);
        }
        const Eigen::MatrixXcd v_packet = cols_packet * basis.w;
        const Eigen::MatrixXcd v_out = cols_out * basis.w;
        for (Eigen::Index i = 0; i < m; ++i) {
          for (std::size_t q = 0; q < n_packet; ++q) at_packet[q] = v_packet(q, i);
          for (std::size_t q = 0; q < n_out; ++q) at_out[q] = v_out(q, i);
          const complex c = overlap(at_packet);
          assembly.add(worker, level.k * level.k, c, std::norm(c), at_out);
        }
        return;
      }
      const ZeroMode& mode = zeros[job - knodes.size() - levels.size()];
      for (std::size_t q = 0; q < n_packet; ++q) at_packet[q] = mode(plan.packet[q].x);
      for (std::size_t q = 0; q < n_out; ++q) at_out[q] = mode(plan.outputs[q]);
      const complex c = overlap(at_packet);
      assembly.add(worker, 0.0, c, std::norm(c), at_out);
    });

    const auto values = assembly.total();
    EvolutionResult result;
    result.times.assign(times.begin(), times.end());
    result.grid.assign(grid.begin(), grid.end());
    result.spectral_weight = assembly.weight();
    result.continuum_nodes = knodes.size();
    result.discrete_levels = levels.size() + zeros.size();
    double drift = 0.0;
    for (std::size_t t = 0; t < times.size(); ++t) {
      const complex* row = values.data() + t * n_out;
      result.values.emplace_back(row, row + plan.grid_size);
      double sq = 0.0;
      for (std::size_t q = 0; q < plan.norm_weights.size(); ++q) {
        sq += plan.norm_weights[q] * std::norm(row[plan.grid_size + q]);
      }
      result.norms.push_back(std::sqrt(sq));
      result.energies.push_back(assembly.energy() / std::max(assembly.weight(), 1e-300));
      drift = std::max(drift, std::abs(result.norms.back() - 1.0));
    }
    if (drift <= settings.norm_tolerance) return result;
    if (bounded || attempt >= kRefinements) {
      std::ostringstream os;
      os << "norm drifts by " << drift << " (tolerance " << settings.norm_tolerance << ")";
      throw Error(ErrorKind::QuadratureUnderResolved, os.str());
    }
  }
}

}  // namespace pointscatter
