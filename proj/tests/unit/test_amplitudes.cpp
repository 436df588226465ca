#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "pointscatter/amplitudes.hpp"
#include "pointscatter/errors.hpp"
#include "random_lattice.hpp"

using namespace pointscatter;
using testsupport::uniform;

namespace {
constexpr complex I(0.0, 1.0);

InteractionParams random_general(std::mt19937_64& rng) {
  // a, d in [-3, 3]; b, c chosen so that ad - bc = 1.
  const double a = uniform(rng, -3.0, 3.0);
  const double d = uniform(rng, -3.0, 3.0);
  const double rest = a * d - 1.0;
  if (std::abs(rest) < 1e-3) return InteractionParams::make(1, 0, 0, 1, uniform(rng, 0, 2 * std::numbers::pi));
  const double b = uniform(rng, 0.2, 2.0) * (rng() % 2 ? 1 : -1);
  return InteractionParams::make(a, b, rest / b, d, uniform(rng, 0.0, 2.0 * std::numbers::pi));
}
}  // namespace

TEST_CASE("worked values") {
  const auto delta = bare_amplitudes(InteractionParams::delta(2.0), 1.0);
  CHECK(std::abs(delta.r_plus - complex(-0.5, -0.5)) < 1e-15);
  CHECK(std::abs(delta.r_minus - complex(-0.5, -0.5)) < 1e-15);
  CHECK(std::abs(delta.t_plus - complex(0.5, -0.5)) < 1e-15);
  CHECK(std::abs(delta.t_minus - complex(0.5, -0.5)) < 1e-15);

  const auto dp = bare_amplitudes(InteractionParams::delta_prime(2.0), 1.0);
  CHECK(std::abs(dp.r_plus - complex(0.5, -0.5)) < 1e-15);
  CHECK(std::abs(dp.t_plus - complex(0.5, 0.5)) < 1e-15);

  const auto id = bare_amplitudes(InteractionParams::identity(), 3.7);
  CHECK(std::abs(id.r_plus) == 0.0);
  CHECK(std::abs(id.t_plus - 1.0) < 1e-15);

  const auto phased = bare_amplitudes(InteractionParams::make(1.3, 0.2, -0.4, (1.0 + 0.2 * -0.4) / 1.3, 0.7), 1.9);
  CHECK(std::abs(phased.t_plus / phased.t_minus - std::exp(2.0 * I * 0.7)) < 1e-13);
}

TEST_CASE("dressed reflections") {
  const auto p = InteractionParams::delta(2.0);
  const auto bare = bare_amplitudes(p, 1.0);
  const auto at0 = dressed_reflections(p, 0.0, 1.0);
  CHECK(at0.r_plus == bare.r_plus);
  CHECK(at0.r_minus == bare.r_minus);
  const auto at1 = dressed_reflections(p, 1.0, 1.0);
  CHECK(std::abs(at1.r_plus - complex(-0.5, -0.5) * std::exp(2.0 * I)) < 1e-15);
  CHECK(std::abs(at1.r_minus - complex(-0.5, -0.5) * std::exp(-2.0 * I)) < 1e-15);
  CHECK(at1.t_plus == bare.t_plus);
  const auto id = dressed_reflections(InteractionParams::identity(), 4.0, 2.0);
  CHECK(id.r_plus == 0.0);
  CHECK(id.t_minus == 1.0);
}

TEST_CASE("unitarity and conjugation properties") {
  std::mt19937_64 rng(1);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const auto p = random_general(rng);
    const double k = uniform(rng, 0.05, 50.0);
    const auto res = unitarity_residuals(bare_amplitudes(p, k));
    worst = std::max(worst, res.max());
    const auto conj = conjugation_residuals(p, k);
    worst = std::max({worst, conj.reflection, conj.transmission});
  }
  CHECK(worst < 1e-12);
  CHECK(unitarity_residuals(bare_amplitudes(InteractionParams::identity(), 1.0)).max() == 0.0);
}

TEST_CASE("time reversal: T+ = T- iff omega = +-1") {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 200; ++i) {
    const double k = uniform(rng, 0.1, 10.0);
    const double a = uniform(rng, 0.5, 2.0), b = uniform(rng, -1.0, 1.0), c = uniform(rng, -1.0, 1.0);
    const double d = (1.0 + b * c) / a;
    const double phase = (i % 3 == 0) ? 0.0 : (i % 3 == 1 ? std::numbers::pi : uniform(rng, 0.1, 3.0));
    const auto amp = bare_amplitudes(InteractionParams::make(a, b, c, d, phase), k);
    if (i % 3 == 2)
      CHECK(std::abs(amp.t_plus - amp.t_minus) > 1e-6);
    else
      CHECK(std::abs(amp.t_plus - amp.t_minus) < 1e-14);
  }
}

TEST_CASE("amplitudes satisfy the matching condition at the origin") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 500; ++i) {
    const auto p = random_general(rng);
    const double k = uniform(rng, 0.1, 10.0);
    const auto amp = bare_amplitudes(p, k);
    const complex w = p.omega();
    // Incident from the left: psi = e^{ikx} + R+ e^{-ikx} (x<0), T+ e^{ikx} (x>0).
    const complex psi_l = 1.0 + amp.r_plus, dpsi_l = I * k * (1.0 - amp.r_plus);
    const complex psi_r = amp.t_plus, dpsi_r = I * k * amp.t_plus;
    CHECK(std::abs(psi_r - w * (p.a() * psi_l + p.b() * dpsi_l)) < 1e-12 * (1 + k));
    CHECK(std::abs(dpsi_r - w * (p.c() * psi_l + p.d() * dpsi_l)) < 1e-12 * (1 + k * k));
    // Incident from the right: psi = T- e^{-ikx} (x<0), e^{-ikx} + R- e^{ikx} (x>0).
    const complex qpsi_l = amp.t_minus, qdpsi_l = -I * k * amp.t_minus;
    const complex qpsi_r = 1.0 + amp.r_minus, qdpsi_r = I * k * (amp.r_minus - 1.0);
    CHECK(std::abs(qpsi_r - w * (p.a() * qpsi_l + p.b() * qdpsi_l)) < 1e-12 * (1 + k));
    CHECK(std::abs(qdpsi_r - w * (p.c() * qpsi_l + p.d() * qdpsi_l)) < 1e-12 * (1 + k * k));
  }
}

TEST_CASE("bound-state poles") {
  const auto attractive = single_bound_poles(InteractionParams::delta(-2.0));
  REQUIRE(attractive.size() == 1);
  CHECK(std::abs(attractive[0].k - I) < 1e-15);
  CHECK(attractive[0].energy == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(single_bound_poles(InteractionParams::delta(2.0)).empty());
  CHECK(single_bound_poles(InteractionParams::identity()).empty());

  std::mt19937_64 rng(4);
  for (int i = 0; i < 300; ++i) {
    const auto p = random_general(rng);
    for (const auto& pole : single_bound_poles(p)) {
      const complex k = pole.k;
      const complex den = -p.c() + I * k * (p.d() + p.a()) + p.b() * k * k;
      const double scale = std::max({std::abs(p.c()), std::abs(k) * (std::abs(p.a()) + std::abs(p.d())),
                                     std::abs(p.b()) * std::norm(k), 1.0});
      CHECK(std::abs(den) < 1e-10 * scale);
      CHECK(k.imag() > 0.0);
    }
  }
}

TEST_CASE("pole hit and small k are rejected") {
  CHECK_THROWS_AS(bare_amplitudes(InteractionParams::delta(-2.0), complex(0.0, 1.0)), Error);
  CHECK_THROWS_AS(bare_amplitudes(InteractionParams::delta(1.0), 1e-12), Error);
}
