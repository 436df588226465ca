#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"
#include "pointscatter/amplitudes.hpp"
#include "pointscatter/errors.hpp"
#include "pointscatter/oracle.hpp"
#include "pointscatter/spectrum.hpp"
#include "random_lattice.hpp"

using namespace pointscatter;
using testsupport::random_lattice;

namespace {

constexpr double pi = std::numbers::pi;

Lattice single(InteractionParams p, double y) { return Lattice::make({{p, y}}); }

std::vector<double> ks(const SpectrumResult& r) {
  std::vector<double> out;
  for (const auto& root : r.eigen_k) out.push_back(root.k);
  return out;
}

int total_multiplicity(const SpectrumResult& r) {
  int m = 0;
  for (const auto& root : r.eigen_k) m += root.multiplicity;
  return m + static_cast<int>(r.rejected_k.size());
}

// Bisection on a real-valued oracle residual, used as an independent root finder.
template <class F>
double bisect(F f, double a, double b) {
  double fa = f(a);
  for (int i = 0; i < 200 && b - a > 1e-15 * std::max(1.0, b); ++i) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if ((fm < 0) == (fa < 0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

TEST_CASE("empty Dirichlet box has k = n pi / L") {
  const auto r = find_eigenvalues(Geometry::box(pi, Wall::Dirichlet, Wall::Dirichlet), {}, 0.5, 10.5);
  REQUIRE(r.eigen_k.size() == 10);
  for (int n = 1; n <= 10; ++n) {
    CHECK(std::abs(r.eigen_k[n - 1].k - n) < 1e-8);
    CHECK(r.eigen_k[n - 1].multiplicity == 1);
  }
  CHECK(r.winding_count == 10);
}

TEST_CASE("empty Dirichlet-Neumann box has half-integer k") {
  const auto r = find_eigenvalues(Geometry::box(pi, Wall::Dirichlet, Wall::Neumann), {}, 0.1, 10.2);
  REQUIRE(r.eigen_k.size() == 10);
  for (int n = 1; n <= 10; ++n) CHECK(std::abs(r.eigen_k[n - 1].k - (n - 0.5)) < 1e-8);
  CHECK(r.winding_count == total_multiplicity(r));
}

TEST_CASE("empty ring roots are double") {
  const auto r = find_eigenvalues(Geometry::ring(2.0 * pi), {}, 0.5, 10.5);
  REQUIRE(r.eigen_k.size() == 10);
  for (int n = 1; n <= 10; ++n) {
    CHECK(std::abs(r.eigen_k[n - 1].k - n) < 1e-8);
    CHECK(r.eigen_k[n - 1].multiplicity == 2);
  }
  CHECK(r.winding_count == 20);
}

TEST_CASE("centred delta in a box matches oracle shooting") {
  const auto lat = single(InteractionParams::delta(2.0), 0.5);
  const auto r = find_eigenvalues(Geometry::box(1.0, Wall::Dirichlet, Wall::Dirichlet), lat, 0.5, 30.0);
  REQUIRE(!r.eigen_k.empty());
  CHECK(r.winding_count == total_multiplicity(r));
  for (const auto& root : r.eigen_k) {
    const auto shoot = [&](double k) {
      return oracle::box_shooting_residual(lat, 1.0, Wall::Dirichlet, Wall::Dirichlet, k).real();
    };
    const double ref = bisect(shoot, root.k - 1e-4, root.k + 1e-4);
    CHECK(std::abs(root.k - ref) < 1e-8);
  }
  // Odd states do not feel the delta: k = 2 pi n.
  int odd = 0;
  for (double k : ks(r))
    if (std::abs(std::remainder(k, 2.0 * pi)) < 1e-8) ++odd;
  CHECK(odd == 4);
}

TEST_CASE("random lattices: count and residuals agree") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 12; ++trial) {
    const double len = 3.0;
    const bool ring = trial % 2 == 1;
    const double lo = ring ? -len / 2 : 0.0;
    const auto lat = random_lattice(rng, 1 + trial % 4, lo + 0.2, lo + len - 0.2);
    const Geometry g = ring ? Geometry::ring(len) : Geometry::box(len, Wall::Dirichlet, Wall::Neumann);
    const auto r = find_eigenvalues(g, lat, 0.3, 12.0);
    CHECK(r.winding_count == total_multiplicity(r));
    for (const auto& root : r.eigen_k) {
      CHECK(root.residual < 1e-8);
      if (ring) CHECK(std::abs(oracle::ring_closure_determinant(len, lat, root.k)) < 1e-6);
    }
  }
}

TEST_CASE("ring spectrum is translation invariant") {
  std::mt19937_64 rng(3);
  const double len = 4.0;
  const auto lat = random_lattice(rng, 3, -1.5, 1.5);
  const auto a = find_eigenvalues(Geometry::ring(len), lat, 0.3, 8.0);
  const auto b = find_eigenvalues(Geometry::ring(len), lat.translated(0.37), 0.3, 8.0);
  REQUIRE(a.eigen_k.size() == b.eigen_k.size());
  for (std::size_t i = 0; i < a.eigen_k.size(); ++i) {
    CHECK(std::abs(a.eigen_k[i].k - b.eigen_k[i].k) < 1e-8);
    CHECK(a.eigen_k[i].multiplicity == b.eigen_k[i].multiplicity);
  }
}

TEST_CASE("attractive delta lowers the ground state") {
  const Geometry box = Geometry::box(2.0, Wall::Dirichlet, Wall::Dirichlet);
  const auto empty = find_eigenvalues(box, {}, 0.2, 5.0);
  const auto with = find_eigenvalues(box, single(InteractionParams::delta(-1.5), 0.7), 0.2, 5.0);
  REQUIRE(!empty.eigen_k.empty());
  REQUIRE(!with.eigen_k.empty());
  CHECK(with.eigen_k.front().k < empty.eigen_k.front().k);
}

TEST_CASE("eigenvalue search rejects bad input") {
  const Geometry box = Geometry::box(1.0, Wall::Dirichlet, Wall::Dirichlet);
  CHECK_THROWS_AS(find_eigenvalues(box, {}, 2.0, 1.0), Error);
  CHECK_THROWS_AS(find_eigenvalues(box, {}, 0.0, 1.0), Error);
  CHECK_THROWS_AS(find_eigenvalues(Geometry::line(), {}, 1.0, 2.0), Error);
  CHECK_THROWS_AS(find_bound_states(box, {}, 0.0), Error);
}

TEST_CASE("negative levels of a box and a ring") {
  const auto lat = single(InteractionParams::delta(-2.0), 0.0);
  // A wide domain barely perturbs the free-space level at E = -1.
  const auto box = find_bound_states(Geometry::box(30.0, Wall::Dirichlet, Wall::Neumann), lat.translated(15.0), 5.0);
  REQUIRE(box.bound_k.size() == 1);
  CHECK(std::abs(box.bound_k[0].energy + 1.0) < 1e-10);
  const auto ring = find_bound_states(Geometry::ring(30.0), lat, 5.0);
  REQUIRE(ring.bound_k.size() == 1);
  CHECK(std::abs(ring.bound_k[0].energy + 1.0) < 1e-10);
  CHECK(ring.bound_k[0].multiplicity == 1);
  // In a small ring the level is pushed down: kappa tanh(kappa L / 2) = 1.
  const auto small = find_bound_states(Geometry::ring(1.0), lat, 5.0);
  REQUIRE(small.bound_k.size() == 1);
  const double kappa = small.bound_k[0].k.imag();
  CHECK(std::abs(kappa * std::tanh(0.5 * kappa) - 1.0) < 1e-10);
  CHECK(find_bound_states(Geometry::box(2.0, Wall::Neumann, Wall::Neumann), {}, 5.0).bound_k.empty());
}

TEST_CASE("single delta bound state") {
  const auto r = find_bound_states(Geometry::line(), single(InteractionParams::delta(-2.0), 0.3), 5.0);
  REQUIRE(r.bound_k.size() == 1);
  CHECK(std::abs(r.bound_k[0].energy + 1.0) < 1e-10);
  CHECK(std::abs(r.bound_k[0].k - complex(0.0, 1.0)) < 1e-10);
  const auto closed = single_bound_poles(InteractionParams::delta(-2.0));
  REQUIRE(closed.size() == 1);
  CHECK(std::abs(closed[0].k - r.bound_k[0].k) < 1e-10);

  CHECK(find_bound_states(Geometry::line(), single(InteractionParams::delta(2.0), 0.0), 5.0).bound_k.empty());
  CHECK(find_bound_states(Geometry::line(), {}, 5.0).bound_k.empty());
}

TEST_CASE("delta-prime and phased interactions agree with the closed form") {
  for (auto p : {InteractionParams::delta_prime(1.0), InteractionParams::make(1.0, 0.5, -1.2, 0.4, 0.7),
                 InteractionParams::make(2.0, 0.0, -3.0, 0.5, -1.1)}) {
    const auto r = find_bound_states(Geometry::line(), single(p, 0.0), 20.0);
    std::vector<complex> expected;
    for (const auto& [k, energy] : single_bound_poles(p))
      if (k.imag() > 1e-9 && std::abs(k.real()) < 1e-12 && k.imag() <= 20.0) expected.push_back(k);
    REQUIRE(r.bound_k.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
      bool hit = false;
      for (const auto& b : r.bound_k) hit = hit || std::abs(b.k - expected[i]) < 1e-9;
      CHECK(hit);
    }
  }
}

TEST_CASE("two attractive deltas form a doublet near E = -1") {
  const auto lat = Lattice::make({{InteractionParams::delta(-2.0), 0.0}, {InteractionParams::delta(-2.0), 5.0}});
  const auto r = find_bound_states(Geometry::line(), lat, 5.0);
  REQUIRE(r.bound_k.size() == 2);
  for (const auto& b : r.bound_k) {
    CHECK(std::abs(b.energy + 1.0) < 0.05);
    const auto grow = [&](double kappa) {
      return oracle::line_growing_coefficient(lat, complex(0.0, kappa)).real();
    };
    const double kappa = b.k.imag();
    CHECK(std::abs(bisect(grow, kappa - 1e-5, kappa + 1e-5) - kappa) < 1e-8);
  }
  CHECK(r.bound_k[0].energy < r.bound_k[1].energy);
}

TEST_CASE("half-line bound states") {
  // Dirichlet wall kills the even partner; a far delta keeps only its own state.
  const auto lat = single(InteractionParams::delta(-2.0), 1.0);
  const auto r = find_bound_states(Geometry::half_line(Wall::Dirichlet), lat, 5.0);
  REQUIRE(r.bound_k.size() == 1);
  const auto grow = [&](double kappa) {
    return oracle::halfline_growing_coefficient(lat, Wall::Dirichlet, complex(0.0, kappa)).real();
  };
  const double kappa = r.bound_k[0].k.imag();
  CHECK(std::abs(bisect(grow, kappa - 1e-4, kappa + 1e-4) - kappa) < 1e-8);
  // Neumann mirror image doubles the well: deeper than the single delta.
  const auto n = find_bound_states(Geometry::half_line(Wall::Neumann), lat, 5.0);
  REQUIRE(n.bound_k.size() == 1);
  CHECK(n.bound_k[0].energy < -1.0);
  CHECK(r.bound_k[0].energy > -1.0);
}

TEST_CASE("free line density of states") {
  const std::vector<double> e{4.0};
  const auto rho = density_of_states(Geometry::line(), {}, e, 1e-6, 0.0, 1.0);
  CHECK(std::abs(rho[0] - 1.0 / (4.0 * pi)) < 1e-6);
}

TEST_CASE("broadened box level carries unit weight") {
  const Geometry box = Geometry::box(pi, Wall::Dirichlet, Wall::Dirichlet);
  const double eta = 1e-3;
  std::vector<double> grid;
  const int n = 20000;
  for (int i = 0; i <= n; ++i) grid.push_back(0.5 + static_cast<double>(i) / n);
  const auto rho = density_of_states(box, {}, grid, eta, 0.0, pi, 4);
  double weight = 0.0;
  for (int i = 0; i < n; ++i) weight += 0.5 * (rho[i] + rho[i + 1]) * (grid[i + 1] - grid[i]);
  CHECK(std::abs(weight - 1.0) < 0.02);
  for (double v : rho) CHECK(v > -1e-9);
}

TEST_CASE("density of states is positive and threads do not change it") {
  std::mt19937_64 rng(11);
  const auto lat = random_lattice(rng, 3, 0.3, 2.7);
  const Geometry box = Geometry::box(3.0, Wall::Neumann, Wall::Dirichlet);
  std::vector<double> grid;
  for (int i = 0; i < 200; ++i) grid.push_back(-2.0 + 0.1 * i);
  const auto one = density_of_states(box, lat, grid, 1e-2, 0.0, 3.0, 1);
  const auto four = density_of_states(box, lat, grid, 1e-2, 0.0, 3.0, 4);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(one[i] > -1e-9);
    CHECK(one[i] == four[i]);
  }
}

TEST_CASE("delta bound state shows up as a peak at E = -1") {
  const auto lat = single(InteractionParams::delta(-2.0), 0.0);
  std::vector<double> grid;
  for (int i = 0; i <= 400; ++i) grid.push_back(-1.2 + 0.001 * i);
  const auto rho = density_of_states(Geometry::line(), lat, grid, 1e-3, -20.0, 20.0);
  std::size_t best = 0;
  for (std::size_t i = 0; i < rho.size(); ++i)
    if (rho[i] > rho[best]) best = i;
  CHECK(std::abs(grid[best] + 1.0) < 1.5e-3);
}

TEST_CASE("density of states input checks") {
  const std::vector<double> e{1.0};
  const Geometry box = Geometry::box(1.0, Wall::Dirichlet, Wall::Dirichlet);
  CHECK_THROWS_AS(density_of_states(box, {}, e, 0.0, 0.0, 1.0), Error);
  try {
    density_of_states(box, {}, e, 1e-3, -0.5, 1.0);
    FAIL("expected OutOfDomain");
  } catch (const Error& err) {
    CHECK(err.kind() == ErrorKind::OutOfDomain);
  }
  // Exactly on the first level with vanishing broadening.
  const std::vector<double> level{pi * pi};
  try {
    density_of_states(box, {}, level, 1e-300, 0.0, 1.0);
    FAIL("expected EtaTooSmall");
  } catch (const Error& err) {
    CHECK(err.kind() == ErrorKind::EtaTooSmall);
  }
}
