#include "pointscatter/composition.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pointscatter/errors.hpp"

namespace pointscatter {
namespace {

constexpr complex I(0.0, 1.0);
constexpr double kResonanceFloor = 1e-14;

}  // namespace

ScatteringCell interaction_cell(const PlacedInteraction& site, Wavenumber k) {
  const Amplitudes amp = bare_amplitudes(site.params, k);
  return ScatteringCell{amp.r_plus, amp.r_minus, amp.t_plus, amp.t_minus, site.position};
}

ScatteringCell wall_cell(Wall wall, double position) {
  const double r = wall_reflection(wall);
  return ScatteringCell{r, r, 0.0, 0.0, position};
}

std::vector<ScatteringCell> lattice_cells(const Lattice& lattice, Wavenumber k) {
  std::vector<ScatteringCell> cells;
  cells.reserve(lattice.size());
  for (const auto& site : lattice) cells.push_back(interaction_cell(site, k));
  return cells;
}

std::vector<ScatteringCell> mirror_cells(std::span<const ScatteringCell> cells) {
  std::vector<ScatteringCell> out;
  out.reserve(cells.size());
  for (auto it = cells.rbegin(); it != cells.rend(); ++it) out.push_back(it->mirrored());
  return out;
}

BlockAmplitudes compose_cells(std::span<const ScatteringCell> cells, Wavenumber wk, double empty_at) {
  if (cells.empty()) return BlockAmplitudes::transparent(empty_at);

  const complex k = wk.value();
  const ScatteringCell& first = cells.front();
  BlockAmplitudes block{first.r_plus, first.r_minus, first.t_plus, first.t_minus, 1, 1,
                        first.position, first.position};

  for (std::size_t n = 1; n < cells.size(); ++n) {
    const ScatteringCell& cell = cells[n];
    const double gap = cell.position - block.right_position;
    const complex hop = std::exp(I * k * gap);
    const complex round_trip = hop * hop;
    const complex den = 1.0 - block.r_minus * cell.r_plus * round_trip;
    if (std::abs(den) < kResonanceFloor) {
      std::ostringstream os;
      os << "block denominator vanishes when absorbing cell " << n + 1 << " at y = " << cell.position;
      throw Error(ErrorKind::ResonanceDenominator, os.str());
    }
    const complex r_plus = block.r_plus + block.t_plus * block.t_minus * cell.r_plus * round_trip / den;
    const complex r_minus = cell.r_minus + cell.t_plus * cell.t_minus * block.r_minus * round_trip / den;
    const complex t_plus = block.t_plus * cell.t_plus * hop / den;
    const complex t_minus = block.t_minus * cell.t_minus * hop / den;
    block.r_plus = r_plus;
    block.r_minus = r_minus;
    block.t_plus = t_plus;
    block.t_minus = t_minus;
    block.right_position = cell.position;
    block.last_index = n + 1;
  }
  return block;
}

BlockAmplitudes compose_block(const Lattice& lattice, std::size_t l, std::size_t n, Wavenumber k) {
  if (l == 0 || n > lattice.size()) {
    throw Error(ErrorKind::InvalidArgument, "block indices are 1-based and must not exceed the lattice size");
  }
  if (l > n) {
    const double at = (l <= lattice.size()) ? lattice[l - 1].position
                                            : (lattice.empty() ? 0.0 : lattice[lattice.size() - 1].position);
    return BlockAmplitudes::transparent(at, l);
  }
  std::vector<ScatteringCell> cells;
  cells.reserve(n - l + 1);
  for (std::size_t i = l; i <= n; ++i) cells.push_back(interaction_cell(lattice[i - 1], k));
  BlockAmplitudes block = compose_cells(cells, k);
  block.first_index = l;
  block.last_index = n;
  return block;
}

complex k_factor(const BlockAmplitudes& block, Wavenumber wk) {
  const complex k = wk.value();
  const double ya = block.left_position;
  const double yb = block.right_position;
  return block.r_plus * block.r_minus * std::exp(2.0 * I * k * (ya - yb)) -
         block.t_plus * block.t_minus * std::exp(-2.0 * I * k * (yb - ya));
}

}  // namespace pointscatter
