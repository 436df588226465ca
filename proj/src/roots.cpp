#include "pointscatter/roots.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace pointscatter::roots {
namespace {

constexpr double kMaxPhaseStep = std::numbers::pi / 4.0;
constexpr int kMaxDepth = 30;

struct Sample {
  complex z;
  complex f;
};

bool usable(complex v) { return std::isfinite(v.real()) && std::isfinite(v.imag()) && std::abs(v) > 1e-300; }

// Accumulates arg changes along [a, b], bisecting until each step is small.
bool accumulate(const Function& f, const Sample& a, const Sample& b, int depth, double& total) {
  const double step = std::arg(b.f / a.f);
  if (std::abs(step) < kMaxPhaseStep) {
    total += step;
    return true;
  }
  if (depth >= kMaxDepth) return false;
  const complex zm = 0.5 * (a.z + b.z);
  const Sample m{zm, f(zm)};
  if (!usable(m.f)) return false;
  return accumulate(f, a, m, depth + 1, total) && accumulate(f, m, b, depth + 1, total);
}

}  // namespace

std::optional<int> winding_number(const Function& f, double re_lo, double re_hi, double im_lo, double im_hi,
                                  double max_segment) {
  const complex corners[5] = {{re_lo, im_lo}, {re_hi, im_lo}, {re_hi, im_hi}, {re_lo, im_hi}, {re_lo, im_lo}};
  std::vector<complex> path;
  for (int side = 0; side < 4; ++side) {
    const complex a = corners[side];
    const complex b = corners[side + 1];
    const int pieces = std::max(4, static_cast<int>(std::ceil(std::abs(b - a) / max_segment)));
    for (int i = 0; i < pieces; ++i) path.push_back(a + (b - a) * (static_cast<double>(i) / pieces));
  }
  path.push_back(corners[0]);

  std::vector<Sample> samples;
  samples.reserve(path.size());
  for (complex z : path) {
    const complex v = f(z);
    if (!usable(v)) return std::nullopt;
    samples.push_back({z, v});
  }
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
    if (!accumulate(f, samples[i], samples[i + 1], 0, total)) return std::nullopt;
  }
  const double turns = total / (2.0 * std::numbers::pi);
  const double rounded = std::round(turns);
  if (std::abs(turns - rounded) > 0.1) return std::nullopt;
  return static_cast<int>(rounded);
}

complex derivative(const Function& f, complex z, double h) { return (f(z + h) - f(z - h)) / (2.0 * h); }

double newton_real(const Function& f, double start, int multiplicity, double lo, double hi) {
  double k = start;
  double fk = std::abs(f(k));
  for (int iter = 0; iter < 80 && fk > 0.0; ++iter) {
    const double h = 1e-7 * std::max(1.0, std::abs(k));
    const complex d = derivative(f, k, h);
    if (!usable(d)) break;
    double step = multiplicity * std::real(f(k) / d);
    if (!std::isfinite(step)) break;
    // Damping: halve the step until |f| does not grow.
    double next = std::clamp(k - step, lo, hi);
    double fn = std::abs(f(next));
    int halvings = 0;
    while (fn > fk && halvings < 30) {
      step *= 0.5;
      next = std::clamp(k - step, lo, hi);
      fn = std::abs(f(next));
      ++halvings;
    }
    if (fn > fk) break;
    const bool done = std::abs(next - k) <= 4e-16 * std::max(1.0, std::abs(k));
    k = next;
    fk = fn;
    if (done) break;
  }
  return k;
}

complex root_centroid(const Function& f, complex center, double radius, int multiplicity, int nodes) {
  complex sum = 0.0;
  const double h = 1e-3 * radius;
  for (int j = 0; j < nodes; ++j) {
    const double theta = 2.0 * std::numbers::pi * j / nodes;
    const complex u = std::polar(1.0, theta);
    const complex z = center + radius * u;
    // dz = i r u dtheta; (1/2 pi i) sum z f'/f i r u (2 pi / n) = (1/n) sum z f'/f r u
    sum += (z - center) * derivative(f, z, h) / f(z) * radius * u;
  }
  return center + sum / (static_cast<double>(nodes) * multiplicity);
}

}  // namespace pointscatter::roots
