#include "config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "pointscatter/errors.hpp"

namespace pointscatter::cli {
namespace {

using nlohmann::json;

constexpr std::string_view kCommandNames[] = {"amplitudes", "green", "spectrum", "bound", "dos", "evolve"};

[[noreturn]] void fail(const std::string& field, const std::string& problem) {
  throw Error(ErrorKind::ConfigError, field + ": " + problem);
}

const json& member(const json& obj, const std::string& path, const char* key) {
  if (!obj.contains(key)) fail(path + "." + key, "missing");
  return obj.at(key);
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(path, "must be finite");
  return x;
}

double number_at(const json& obj, const std::string& path, const char* key) {
  return number(member(obj, path, key), path + "." + key);
}

double number_or(const json& obj, const std::string& path, const char* key, double fallback) {
  return obj.contains(key) ? number(obj.at(key), path + "." + key) : fallback;
}

void require_object(const json& v, const std::string& path) {
  if (!v.is_object()) fail(path, "expected an object");
}

std::vector<double> grid(const json& v, const std::string& path) {
  std::vector<double> out;
  if (v.is_array()) {
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], path + "[" + std::to_string(i) + "]"));
  } else if (v.is_object()) {
    const double from = number_at(v, path, "from");
    const double to = number_at(v, path, "to");
    const json& c = member(v, path, "count");
    if (!c.is_number_integer() || c.get<long long>() < 1) fail(path + ".count", "expected a positive integer");
    const auto count = c.get<long long>();
    for (long long i = 0; i < count; ++i) {
      out.push_back(count == 1 ? from : from + (to - from) * static_cast<double>(i) / static_cast<double>(count - 1));
    }
  } else {
    fail(path, "expected an array of numbers or {from, to, count}");
  }
  if (out.empty()) fail(path, "grid is empty");
  return out;
}

Wall wall(const json& obj, const std::string& path, const char* key) {
  if (!obj.contains(key)) return Wall::Dirichlet;
  const json& v = obj.at(key);
  const std::string p = path + "." + key;
  if (!v.is_string()) fail(p, "expected \"dirichlet\" or \"neumann\"");
  const auto s = v.get<std::string>();
  if (s == "dirichlet") return Wall::Dirichlet;
  if (s == "neumann") return Wall::Neumann;
  fail(p, "unknown wall \"" + s + "\"");
}

std::string wall_name(Wall w) { return w == Wall::Dirichlet ? "dirichlet" : "neumann"; }

Geometry parse_geometry(const json& g) {
  require_object(g, "geometry");
  const json& variant = member(g, "geometry", "variant");
  if (!variant.is_string()) fail("geometry.variant", "expected a string");
  const auto name = variant.get<std::string>();
  try {
    if (name == "line") return Geometry::line();
    if (name == "half_line") return Geometry::half_line(wall(g, "geometry", "left_wall"));
    if (name == "box") {
      return Geometry::box(number_at(g, "geometry", "L"), wall(g, "geometry", "left_wall"),
                           wall(g, "geometry", "right_wall"));
    }
    if (name == "ring") return Geometry::ring(number_at(g, "geometry", "L"));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ConfigError) throw;
    fail("geometry.L", e.what());
  }
  fail("geometry.variant", "unknown variant \"" + name + "\" (line, half_line, box, ring)");
}

Lattice parse_lattice(const json& doc) {
  if (!doc.contains("lattice")) return {};
  const json& l = doc.at("lattice");
  if (!l.is_array()) fail("lattice", "expected an array");
  std::vector<PlacedInteraction> sites;
  for (std::size_t i = 0; i < l.size(); ++i) {
    const std::string p = "lattice[" + std::to_string(i) + "]";
    const json& s = l[i];
    require_object(s, p);
    const double y = number_at(s, p, "y");
    try {
      if (s.contains("delta")) {
        sites.push_back({InteractionParams::delta(number_at(s, p, "delta")), y});
      } else if (s.contains("delta_prime")) {
        sites.push_back({InteractionParams::delta_prime(number_at(s, p, "delta_prime")), y});
      } else {
        sites.push_back({make_interaction(number_at(s, p, "a"), number_at(s, p, "b"), number_at(s, p, "c"),
                                          number_at(s, p, "d"), number_or(s, p, "omega_phase", 0.0)),
                         y});
      }
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::ConfigError) throw;
      fail(p, e.what());
    }
  }
  try {
    return Lattice::make(std::move(sites));
  } catch (const Error& e) {
    fail("lattice", e.what());
  }
}

}  // namespace

std::string_view to_string(Command c) { return kCommandNames[static_cast<int>(c)]; }

std::optional<Command> command_from_string(std::string_view name) {
  for (int i = 0; i < 6; ++i)
    if (kCommandNames[i] == name) return static_cast<Command>(i);
  return std::nullopt;
}

void parse_model(const json& doc, Geometry& geometry, Lattice& lattice) {
  require_object(doc, "config");
  geometry = parse_geometry(member(doc, "config", "geometry"));
  lattice = parse_lattice(doc);
  try {
    geometry.validate(lattice);
  } catch (const Error& e) {
    fail("lattice", e.what());
  }
}

json model_to_json(const Geometry& geometry, const Lattice& lattice) {
  json g;
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, LineGeometry>) {
          g["variant"] = "line";
        } else if constexpr (std::is_same_v<T, HalfLineGeometry>) {
          g["variant"] = "half_line";
          g["left_wall"] = wall_name(v.wall);
        } else if constexpr (std::is_same_v<T, BoxGeometry>) {
          g["variant"] = "box";
          g["L"] = v.length;
          g["left_wall"] = wall_name(v.left);
          g["right_wall"] = wall_name(v.right);
        } else {
          g["variant"] = "ring";
          g["L"] = v.length;
        }
      },
      geometry.variant());
  json sites = json::array();
  for (const auto& s : lattice) {
    sites.push_back({{"a", s.params.a()},
                     {"b", s.params.b()},
                     {"c", s.params.c()},
                     {"d", s.params.d()},
                     {"omega_phase", s.params.omega_phase()},
                     {"y", s.position}});
  }
  return {{"geometry", g}, {"lattice", sites}};
}

RunConfig parse_config(const json& doc, Command expected) {
  RunConfig cfg;
  parse_model(doc, cfg.geometry, cfg.lattice);
  cfg.command = expected;

  for (int i = 0; i < 6; ++i) {
    const auto c = static_cast<Command>(i);
    if (c != expected && doc.contains(std::string(kCommandNames[i]))) {
      fail(std::string(kCommandNames[i]), "block does not belong to the '" + std::string(to_string(expected)) +
                                              "' command; exactly one command block is allowed");
    }
  }
  const std::string name(to_string(expected));
  if (!doc.contains(name) && expected != Command::Amplitudes) fail(name, "missing command block");
  const json block = doc.contains(name) ? doc.at(name) : json::object();
  require_object(block, name);

  switch (expected) {
    case Command::Amplitudes:
      if (block.contains("k")) cfg.amplitudes.k = grid(block.at("k"), "amplitudes.k");
      break;
    case Command::Green:
      cfg.green.x_f_grid = grid(member(block, name, "x_f_grid"), "green.x_f_grid");
      cfg.green.x_i = number_at(block, name, "x_i");
      cfg.green.k = number_at(block, name, "k");
      break;
    case Command::Spectrum:
      cfg.spectrum.k_min = number_at(block, name, "k_min");
      cfg.spectrum.k_max = number_at(block, name, "k_max");
      break;
    case Command::Bound:
      cfg.bound.kappa_max = number_at(block, name, "kappa_max");
      break;
    case Command::Dos: {
      cfg.dos.energies = grid(member(block, name, "E_grid"), "dos.E_grid");
      if (block.contains("eta")) cfg.dos.eta = number_at(block, name, "eta");
      const json& w = member(block, name, "x_window");
      if (!w.is_array() || w.size() != 2) fail("dos.x_window", "expected [x_lo, x_hi]");
      cfg.dos.x_lo = number(w[0], "dos.x_window[0]");
      cfg.dos.x_hi = number(w[1], "dos.x_window[1]");
      break;
    }
    case Command::Evolve: {
      const json& p = member(block, name, "packet");
      require_object(p, "evolve.packet");
      cfg.evolve.packet = {number_at(p, "evolve.packet", "x0"), number_or(p, "evolve.packet", "k0", 0.0),
                           number_at(p, "evolve.packet", "sigma")};
      cfg.evolve.times = grid(member(block, name, "times"), "evolve.times");
      cfg.evolve.grid = grid(member(block, name, "grid"), "evolve.grid");
      auto& s = cfg.evolve.settings;
      s.norm_tolerance = number_or(block, name, "norm_tolerance", s.norm_tolerance);
      s.nodes_per_turn = number_or(block, name, "nodes_per_turn", s.nodes_per_turn);
      s.width_sigmas = number_or(block, name, "width_sigmas", s.width_sigmas);
      break;
    }
  }

  if (doc.contains("output")) {
    const json& o = doc.at("output");
    require_object(o, "output");
    if (o.contains("path")) {
      if (!o.at("path").is_string()) fail("output.path", "expected a string");
      cfg.output.path = o.at("path").get<std::string>();
    }
    if (o.contains("format")) {
      const json& f = o.at("format");
      if (f == "csv") {
        cfg.output.format = Format::Csv;
      } else if (f == "json") {
        cfg.output.format = Format::Json;
      } else {
        fail("output.format", "expected \"csv\" or \"json\"");
      }
    }
    if (o.contains("precision")) {
      const json& p = o.at("precision");
      if (!p.is_number_integer() || p.get<long long>() < 1 || p.get<long long>() > 17) {
        fail("output.precision", "expected an integer in 1..17");
      }
      cfg.output.precision = p.get<int>();
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path, Command expected) {
  std::ifstream in(path);
  if (!in) fail("--config", "cannot open '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    fail("--config", std::string("'") + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(doc, expected);
}

}  // namespace pointscatter::cli
