#pragma once

// JSON run configuration for the command-line tool.
//
//   {
//     "geometry": {"variant": "box", "L": 3.0, "left_wall": "dirichlet", "right_wall": "neumann"},
//     "lattice": [{"a": 1, "b": 0, "c": 2, "d": 1, "omega_phase": 0, "y": 0.5}],
//     "spectrum": {"k_min": 0.1, "k_max": 10},
//     "output": {"path": "out.csv", "format": "csv", "precision": 15}
//   }
//
// Grids are either arrays of numbers or {"from": a, "to": b, "count": n}.

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pointscatter/dynamics.hpp"
#include "pointscatter/model.hpp"

namespace pointscatter::cli {

enum class Command { Amplitudes, Green, Spectrum, Bound, Dos, Evolve };

std::string_view to_string(Command c);
std::optional<Command> command_from_string(std::string_view name);

struct AmplitudesBlock {
  std::vector<double> k;
};
struct GreenBlock {
  std::vector<double> x_f_grid;
  double x_i = 0.0;
  double k = 1.0;
};
struct SpectrumBlock {
  double k_min = 0.0;
  double k_max = 0.0;
};
struct BoundBlock {
  double kappa_max = 0.0;
};
struct DosBlock {
  std::vector<double> energies;
  std::optional<double> eta;  // default 1e-3 max(1, |E|) per energy
  double x_lo = 0.0;
  double x_hi = 0.0;
};
struct EvolveBlock {
  GaussianPacket packet;
  std::vector<double> times;
  std::vector<double> grid;
  EvolutionSettings settings;
};

enum class Format { Csv, Json };

struct OutputBlock {
  std::optional<std::string> path;  // stdout when absent
  Format format = Format::Csv;
  int precision = 15;
};

struct RunConfig {
  Geometry geometry = Geometry::line();
  Lattice lattice;
  Command command = Command::Amplitudes;
  AmplitudesBlock amplitudes;
  GreenBlock green;
  SpectrumBlock spectrum;
  BoundBlock bound;
  DosBlock dos;
  EvolveBlock evolve;
  OutputBlock output;
};

/// Parses a configuration. `expected` names the subcommand: its block must be
/// present (except for amplitudes, whose k may come from the command line) and
/// no other command block may be. Throws Error(ConfigError) naming the field.
RunConfig parse_config(const nlohmann::json& doc, Command expected);
RunConfig load_config(const std::string& path, Command expected);

/// Geometry and lattice in the config schema; parse_model(model_to_json(...))
/// reproduces the doubles bit for bit.
nlohmann::json model_to_json(const Geometry& geometry, const Lattice& lattice);
void parse_model(const nlohmann::json& doc, Geometry& geometry, Lattice& lattice);

}  // namespace pointscatter::cli
