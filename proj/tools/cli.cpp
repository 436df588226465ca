#include "cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "config.hpp"
#include "pointscatter/amplitudes.hpp"
#include "pointscatter/composition.hpp"
#include "pointscatter/errors.hpp"
#include "pointscatter/greens.hpp"
#include "pointscatter/spectrum.hpp"

namespace pointscatter::cli {
namespace {

using Cell = std::variant<double, long long, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

std::string format_number(double v, int precision) {
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

void write_csv(const Table& t, int precision, std::ostream& out) {
  for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) {
              out << format_number(v, precision);
            } else {
              out << v;
            }
          },
          row[i]);
    }
    out << '\n';
  }
}

void write_json(const Table& t, Command command, int precision, std::ostream& out) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : t.rows) {
    nlohmann::json r = nlohmann::json::array();
    for (const auto& cell : row) {
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            // Rounded through the decimal form so both formats carry the same digits.
            if constexpr (std::is_same_v<T, double>) {
              r.push_back(std::stod(format_number(v, precision)));
            } else {
              r.push_back(v);
            }
          },
          cell);
    }
    rows.push_back(std::move(r));
  }
  nlohmann::json doc{{"command", std::string(to_string(command))}, {"columns", t.columns}, {"rows", rows}};
  out << doc.dump(2) << '\n';
}

Table amplitudes_table(const RunConfig& cfg) {
  Table t{{"k", "Re(R+)", "Im(R+)", "Re(R-)", "Im(R-)", "Re(T+)", "Im(T+)", "Re(T-)", "Im(T-)"}, {}};
  if (cfg.amplitudes.k.empty()) throw Error(ErrorKind::ConfigError, "amplitudes.k: give --k or amplitudes.k");
  for (double k : cfg.amplitudes.k) {
    const auto b = compose_block(cfg.lattice, 1, cfg.lattice.size(), k);
    t.rows.push_back({k, b.r_plus.real(), b.r_plus.imag(), b.r_minus.real(), b.r_minus.imag(), b.t_plus.real(),
                      b.t_plus.imag(), b.t_minus.real(), b.t_minus.imag()});
  }
  return t;
}

Table green_table(const RunConfig& cfg) {
  Table t{{"x_f", "x_i", "k", "Re_G", "Im_G", "branch"}, {}};
  const GreenKernel kernel(cfg.geometry, cfg.lattice, cfg.green.k);
  for (double x_f : cfg.green.x_f_grid) {
    const auto g = kernel.evaluate(x_f, cfg.green.x_i);
    t.rows.push_back({x_f, cfg.green.x_i, cfg.green.k, g.value.real(), g.value.imag(), std::string(to_string(g.branch))});
  }
  return t;
}

Table spectrum_table(const RunConfig& cfg) {
  Table t{{"k", "E", "multiplicity", "residual"}, {}};
  const auto r = find_eigenvalues(cfg.geometry, cfg.lattice, cfg.spectrum.k_min, cfg.spectrum.k_max);
  for (const auto& e : r.eigen_k) t.rows.push_back({e.k, e.k * e.k, static_cast<long long>(e.multiplicity), e.residual});
  return t;
}

Table bound_table(const RunConfig& cfg) {
  Table t{{"kappa", "E", "multiplicity", "residual"}, {}};
  const auto r = find_bound_states(cfg.geometry, cfg.lattice, cfg.bound.kappa_max);
  for (const auto& b : r.bound_k) {
    t.rows.push_back({b.k.imag(), b.energy, static_cast<long long>(b.multiplicity), b.residual});
  }
  return t;
}

Table dos_table(const RunConfig& cfg, unsigned threads) {
  Table t{{"E", "rho"}, {}};
  const auto& d = cfg.dos;
  std::vector<double> rho;
  if (d.eta) {
    rho = density_of_states(cfg.geometry, cfg.lattice, d.energies, *d.eta, d.x_lo, d.x_hi, threads);
  } else {
    for (double e : d.energies) {
      const double eta = 1e-3 * std::max(1.0, std::abs(e));
      rho.push_back(density_of_states(cfg.geometry, cfg.lattice, std::span(&e, 1), eta, d.x_lo, d.x_hi, 1)[0]);
    }
  }
  for (std::size_t i = 0; i < rho.size(); ++i) t.rows.push_back({d.energies[i], rho[i]});
  return t;
}

Table evolve_table(const RunConfig& cfg, unsigned threads) {
  Table t{{"t", "x", "Re_psi", "Im_psi", "prob"}, {}};
  auto settings = cfg.evolve.settings;
  settings.threads = threads;
  const auto r = evolve(cfg.geometry, cfg.lattice, cfg.evolve.packet, cfg.evolve.times, cfg.evolve.grid, settings);
  for (std::size_t i = 0; i < r.times.size(); ++i) {
    for (std::size_t j = 0; j < r.grid.size(); ++j) {
      const complex v = r.values[i][j];
      t.rows.push_back({r.times[i], r.grid[j], v.real(), v.imag(), std::norm(v)});
    }
  }
  return t;
}

// Closed-form single-site regressions and the unitarity suite, fixed seeds.
bool selftest(std::ostream& out) {
  std::mt19937_64 rng(20240607);
  const auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  bool ok = true;

  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const bool prime = i % 2 == 1;
    const double gamma = uniform(-3.0, 3.0);
    const double k = uniform(0.2, 5.0);
    const double x_f = uniform(-4.0, 4.0);
    const double x_i = uniform(-4.0, 4.0);
    const auto p = prime ? InteractionParams::delta_prime(gamma) : InteractionParams::delta(gamma);
    const complex got = green_single(p, 0.0, x_f, x_i, k).value;
    const complex want = prime ? closed_form::delta_prime_line(gamma, x_f, x_i, k)
                               : closed_form::delta_line(gamma, x_f, x_i, k);
    worst = std::max(worst, std::abs(got - want) / std::abs(want));
  }
  const bool closed_ok = worst <= 1e-12;
  out << (closed_ok ? "PASS" : "FAIL") << " closed-form single-site Green functions (100 samples, max rel err "
      << worst << ")\n";
  ok = ok && closed_ok;

  double residual = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double a = uniform(0.2, 3.0) * (uniform(0, 1) < 0.5 ? -1.0 : 1.0);
    const double b = uniform(-2.0, 2.0);
    const double c = uniform(-3.0, 3.0);
    const auto p = make_interaction(a, b, c, (1.0 + b * c) / a, uniform(-3.1, 3.1));
    residual = std::max(residual, unitarity_residuals(bare_amplitudes(p, uniform(0.1, 10.0))).max());
  }
  const bool unitary_ok = residual < 1e-12;
  out << (unitary_ok ? "PASS" : "FAIL") << " unitarity (10000 interactions, max residual " << residual << ")\n";
  return ok && unitary_ok;
}

}  // namespace

unsigned thread_budget() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("POINTSCATTER_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return n;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Green functions, spectra and wave packets for lattices of point interactions", "pointscatter"};
  app.require_subcommand(1);
  std::string config_path;
  std::vector<double> ks;
  std::vector<CLI::App*> commands;
  for (std::string_view name : {"amplitudes", "green", "spectrum", "bound", "dos", "evolve"}) {
    auto* sub = app.add_subcommand(std::string(name));
    sub->add_option("--config", config_path, "JSON configuration file")->required();
    if (name == "amplitudes") sub->add_option("--k", ks, "wavenumber(s); overrides amplitudes.k");
    commands.push_back(sub);
  }
  auto* self = app.add_subcommand("selftest", "run the built-in regression checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    if (self->parsed()) return selftest(out) ? kOk : kNumericalError;
    Command command = Command::Amplitudes;
    for (auto* sub : commands)
      if (sub->parsed()) command = *command_from_string(sub->get_name());

    RunConfig cfg = load_config(config_path, command);
    if (!ks.empty()) cfg.amplitudes.k = ks;
    const unsigned threads = thread_budget();

    Table table;
    switch (command) {
      case Command::Amplitudes: table = amplitudes_table(cfg); break;
      case Command::Green: table = green_table(cfg); break;
      case Command::Spectrum: table = spectrum_table(cfg); break;
      case Command::Bound: table = bound_table(cfg); break;
      case Command::Dos: table = dos_table(cfg, threads); break;
      case Command::Evolve: table = evolve_table(cfg, threads); break;
    }

    std::ofstream file;
    std::ostream* sink = &out;
    if (cfg.output.path) {
      file.open(*cfg.output.path, std::ios::binary);
      if (!file) throw Error(ErrorKind::ConfigError, "output.path: cannot write '" + *cfg.output.path + "'");
      sink = &file;
    }
    if (cfg.output.format == Format::Csv) {
      write_csv(table, cfg.output.precision, *sink);
    } else {
      write_json(table, command, cfg.output.precision, *sink);
    }
    return kOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return is_numerical(e.kind()) ? kNumericalError : kConfigError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternalError;
  }
}

}  // namespace pointscatter::cli
