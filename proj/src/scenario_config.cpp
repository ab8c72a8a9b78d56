#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <set>
#include <sstream>

#include "reofilm/constants.hpp"
#include "reofilm/errors.hpp"
#include "reofilm/scenarios_io.hpp"

namespace reofilm {

std::string_view to_string(InitialKind kind) {
  switch (kind) {
    case InitialKind::Uniform:
      return "uniform";
    case InitialKind::GaussianBump:
      return "gaussian_bump";
    case InitialKind::DamBreak:
      return "dam_break";
    case InitialKind::EquilibriumPerturbed:
      return "equilibrium_perturbed";
  }
  return "unknown";
}

std::string_view to_string(OutputFormat format) {
  return format == OutputFormat::Ndjson ? "ndjson" : "csv";
}

OutputFormat parse_output_format(std::string_view name) {
  if (name == "ndjson") return OutputFormat::Ndjson;
  if (name == "csv") return OutputFormat::Csv;
  throw DomainError(fmt::format("unknown output format '{}' (expected ndjson or csv)", name));
}

Grid ScenarioConfig::make_grid() const { return Grid(grid.n, grid.length, grid.bc); }

FilmModel ScenarioConfig::make_model() const {
  ModelParams mp = params;
  mp.gamma = model.gamma;
  return FilmModel(model.family, rheology, mp);
}

StepControl ScenarioConfig::make_control() const {
  StepControl c;
  c.cfl = run.cfl;
  c.dt_max = run.dt_max;
  c.dt_min = run.dt_min;
  c.t_end = run.t_end;
  c.output_every = run.output_every;
  c.implicit_drag = model.implicit_drag;
  c.flux_scheme = model.flux_scheme;
  return c;
}

namespace {

// A YAML mapping whose keys are checked against an allow-list.
class Section {
 public:
  Section(const YAML::Node& node, std::string name, std::set<std::string> allowed)
      : node_(node), name_(std::move(name)) {
    if (!node_) return;
    if (!node_.IsMap()) throw ConfigError(name_, "expected a mapping");
    for (const auto& kv : node_) {
      if (!kv.first.IsScalar()) throw ConfigError(name_, "keys must be plain names");
      const auto key = kv.first.Scalar();
      if (!allowed.count(key)) throw ConfigError(this->key(key), "unknown key");
    }
  }

  bool present() const { return static_cast<bool>(node_); }
  bool has(const std::string& k) const { return node_ && node_[k]; }
  std::string key(const std::string& k) const { return name_ + "." + k; }

  double number(const std::string& k) const {
    const auto n = node_[k];
    if (!n.IsScalar()) throw ConfigError(key(k), "expected a number");
    try {
      const double v = n.as<double>();
      if (!std::isfinite(v)) throw ConfigError(key(k), "must be finite");
      return v;
    } catch (const YAML::BadConversion&) {
      throw ConfigError(key(k), fmt::format("expected a number, got '{}'", n.Scalar()));
    }
  }
  double number(const std::string& k, double fallback) const {
    return has(k) ? number(k) : fallback;
  }
  double required_number(const std::string& k) const {
    if (!has(k)) throw ConfigError(key(k), "missing required key");
    return number(k);
  }

  long long integer(const std::string& k) const {
    const auto n = node_[k];
    try {
      if (!n.IsScalar()) throw YAML::BadConversion(n.Mark());
      return n.as<long long>();
    } catch (const YAML::BadConversion&) {
      throw ConfigError(key(k), "expected an integer");
    }
  }

  std::string string(const std::string& k) const {
    const auto n = node_[k];
    if (!n.IsScalar()) throw ConfigError(key(k), "expected a string");
    return n.as<std::string>();
  }
  std::string string(const std::string& k, const std::string& fallback) const {
    return has(k) ? string(k) : fallback;
  }

  bool boolean(const std::string& k, bool fallback) const {
    if (!has(k)) return fallback;
    try {
      return node_[k].as<bool>();
    } catch (const YAML::BadConversion&) {
      throw ConfigError(key(k), "expected true or false");
    }
  }

  const YAML::Node& node() const { return node_; }

 private:
  YAML::Node node_;
  std::string name_;
};

template <class F>
auto keyed(const std::string& key, F&& f) {
  try {
    return f();
  } catch (const DomainError& e) {
    throw ConfigError(key, e.what());
  }
}

void require_positive(const Section& sec, const std::string& k, double v) {
  if (!(v > 0.0)) throw ConfigError(sec.key(k), fmt::format("must be > 0 (got {})", v));
}

GridConfig parse_grid(const Section& sec) {
  if (!sec.present()) throw ConfigError("grid", "missing required section");
  GridConfig g;
  if (!sec.has("n")) throw ConfigError("grid.n", "missing required key");
  const long long n = sec.integer("n");
  if (n < static_cast<long long>(Grid::kMinCells)) {
    throw ConfigError("grid.n", fmt::format("must be >= {} (got {})", Grid::kMinCells, n));
  }
  g.n = static_cast<std::size_t>(n);
  g.length = sec.required_number("length");
  require_positive(sec, "length", g.length);
  g.bc = keyed("grid.bc", [&] { return parse_boundary(sec.string("bc", "periodic")); });
  return g;
}

ModelConfig parse_model(const Section& sec) {
  ModelConfig m;
  if (!sec.present()) return m;
  m.family = keyed("model.family",
                   [&] { return parse_family(sec.string("family", "power_law_ubar")); });
  m.gamma = sec.number("gamma", 1.0);
  if (!(m.gamma >= 0.0 && m.gamma <= 1.0)) {
    throw ConfigError("model.gamma", fmt::format("must lie in [0, 1] (got {})", m.gamma));
  }
  m.implicit_drag = sec.boolean("implicit_drag", false);
  m.flux_scheme =
      keyed("model.flux_scheme", [&] { return parse_flux_scheme(sec.string("flux_scheme", "central")); });
  return m;
}

Rheology parse_rheology(const Section& sec) {
  if (!sec.present()) throw ConfigError("rheology", "missing required section");
  if (sec.has("preset")) {
    for (const char* k : {"type", "s", "cs", "nu", "table"}) {
      if (sec.has(k)) throw ConfigError(sec.key(k), "cannot be combined with rheology.preset");
    }
    return keyed("rheology.preset", [&] { return rheology_preset(sec.string("preset")); });
  }
  if (!sec.has("type")) throw ConfigError("rheology.type", "missing (give type or preset)");
  const auto type = sec.string("type");
  auto forbid = [&](std::initializer_list<const char*> keys) {
    for (const char* k : keys) {
      if (sec.has(k)) throw ConfigError(sec.key(k), fmt::format("not used by type '{}'", type));
    }
  };
  if (type == "power_law") {
    forbid({"nu", "table"});
    PowerLaw p{sec.required_number("s"), sec.required_number("cs")};
    require_positive(sec, "s", p.s);
    require_positive(sec, "cs", p.cs);
    return p;
  }
  if (type == "newtonian") {
    forbid({"s", "cs", "table"});
    Newtonian nw{sec.number("nu", 1.0)};
    require_positive(sec, "nu", nw.nu);
    return nw;
  }
  if (type == "tabulated") {
    forbid({"s", "cs", "nu"});
    if (!sec.has("table")) throw ConfigError("rheology.table", "missing required key");
    const auto table = sec.node()["table"];
    if (!table.IsSequence()) throw ConfigError("rheology.table", "expected a list of [eps, nu]");
    std::vector<Tabulated::Sample> samples;
    for (std::size_t i = 0; i < table.size(); ++i) {
      const auto row = table[i];
      if (!row.IsSequence() || row.size() != 2) {
        throw ConfigError("rheology.table", fmt::format("entry {} is not an [eps, nu] pair", i));
      }
      try {
        samples.emplace_back(row[0].as<double>(), row[1].as<double>());
      } catch (const YAML::BadConversion&) {
        throw ConfigError("rheology.table", fmt::format("entry {} is not numeric", i));
      }
    }
    return keyed("rheology.table", [&] { return Tabulated(std::move(samples)); });
  }
  throw ConfigError("rheology.type",
                    fmt::format("unknown type '{}' (expected power_law, newtonian or tabulated)",
                                type));
}

ModelParams parse_params(const Section& sec) {
  if (!sec.present()) throw ConfigError("params", "missing required section");
  const double re = sec.required_number("re");
  if (!(re >= 0.0)) throw ConfigError("params.re", fmt::format("must be >= 0 (got {})", re));

  const bool by_direction = sec.has("gr") || sec.has("g_hat1") || sec.has("g_hat2");
  const bool by_components = sec.has("g1") || sec.has("g2");
  if (by_direction && by_components) {
    throw ConfigError("params",
                      "over-specified gravity: give either (gr, g_hat1, g_hat2) or (g1, g2)");
  }
  ModelParams mp;
  if (by_components) {
    mp = ModelParams::from_components(re, sec.number("g1", 0.0), sec.number("g2", 0.0));
  } else {
    mp.re = re;
    mp.gr = sec.number("gr", 0.0);
    if (!(mp.gr >= 0.0)) throw ConfigError("params.gr", fmt::format("must be >= 0 (got {})", mp.gr));
    mp.g_hat1 = sec.number("g_hat1", 0.0);
    mp.g_hat2 = sec.number("g_hat2", 1.0);
    if (mp.gr > 0.0 && mp.g_hat1 == 0.0 && mp.g_hat2 == 0.0) {
      throw ConfigError("params.g_hat1", "gravity direction must be nonzero when gr > 0");
    }
  }
  return mp;
}

InitialCondition parse_ic(const Section& sec) {
  if (!sec.present()) throw ConfigError("ic", "missing required section");
  if (!sec.has("kind")) throw ConfigError("ic.kind", "missing required key");
  const auto kind = sec.string("kind");
  InitialCondition ic;
  ic.eta0 = sec.number("eta0", 1.0);
  ic.u0 = sec.number("u0", 0.0);
  ic.amplitude = sec.number("amplitude", 0.0);
  ic.width = sec.number("width", 1.0);
  ic.center = sec.number("center", 0.0);
  ic.eta_right = sec.number("eta_right", 0.0);
  ic.position = sec.number("position", 0.0);
  if (sec.has("smoothing")) {
    ic.smoothing = sec.number("smoothing");
    require_positive(sec, "smoothing", *ic.smoothing);
  }
  ic.wavenumber = sec.number("wavenumber", 0.0);

  auto floor_check = [&](const std::string& k, double lowest) {
    if (!(lowest >= kThicknessFloor)) {
      throw ConfigError(sec.key(k), fmt::format("drives the thickness to {} below the floor {}",
                                                lowest, kThicknessFloor));
    }
  };
  floor_check("eta0", ic.eta0);
  if (kind == "uniform") {
    ic.kind = InitialKind::Uniform;
  } else if (kind == "gaussian_bump") {
    ic.kind = InitialKind::GaussianBump;
    require_positive(sec, "width", ic.width);
    floor_check("amplitude", ic.eta0 + std::min(0.0, ic.amplitude));
  } else if (kind == "dam_break") {
    ic.kind = InitialKind::DamBreak;
    if (!sec.has("eta_right")) throw ConfigError("ic.eta_right", "missing required key");
    floor_check("eta_right", ic.eta_right);
  } else if (kind == "equilibrium_perturbed") {
    ic.kind = InitialKind::EquilibriumPerturbed;
    floor_check("amplitude", ic.eta0 - std::abs(ic.amplitude));
  } else {
    throw ConfigError("ic.kind", fmt::format("unknown kind '{}' (expected uniform, gaussian_bump, "
                                             "dam_break or equilibrium_perturbed)",
                                             kind));
  }
  return ic;
}

RunConfig parse_run(const Section& sec) {
  if (!sec.present()) throw ConfigError("run", "missing required section");
  RunConfig r;
  r.t_end = sec.required_number("t_end");
  if (!(r.t_end >= 0.0)) throw ConfigError("run.t_end", "must be >= 0");
  r.cfl = sec.number("cfl", 0.4);
  if (!(r.cfl > 0.0 && r.cfl <= 1.0)) throw ConfigError("run.cfl", "must lie in (0, 1]");
  r.output_every = sec.number("output_every", 0.0);
  if (!(r.output_every >= 0.0)) throw ConfigError("run.output_every", "must be >= 0");
  r.dt_max = sec.number("dt_max", 1.0);
  r.dt_min = sec.number("dt_min", 1e-10);
  require_positive(sec, "dt_min", r.dt_min);
  if (!(r.dt_min < r.dt_max)) throw ConfigError("run.dt_max", "must exceed run.dt_min");
  r.out_path = sec.string("out_path", "");
  r.format = keyed("run.format", [&] { return parse_output_format(sec.string("format", "ndjson")); });
  return r;
}

}  // namespace

ScenarioConfig parse_config(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw ConfigError("", fmt::format("malformed config: {}", e.what()));
  }
  if (!root.IsMap()) throw ConfigError("", "config must be a mapping of sections");
  const std::set<std::string> sections{"grid", "model", "rheology", "params", "ic", "run"};
  for (const auto& kv : root) {
    if (!kv.first.IsScalar()) throw ConfigError("", "section names must be plain names");
    const auto name = kv.first.Scalar();
    if (!sections.count(name)) throw ConfigError(name, "unknown section");
  }

  ScenarioConfig cfg;
  cfg.grid = parse_grid(Section(root["grid"], "grid", {"n", "length", "bc"}));
  cfg.model = parse_model(
      Section(root["model"], "model", {"family", "gamma", "implicit_drag", "flux_scheme"}));
  cfg.rheology =
      parse_rheology(Section(root["rheology"], "rheology", {"preset", "type", "s", "cs", "nu", "table"}));
  cfg.params = parse_params(
      Section(root["params"], "params", {"re", "gr", "g_hat1", "g_hat2", "g1", "g2"}));
  cfg.params.gamma = cfg.model.gamma;
  cfg.ic = parse_ic(Section(root["ic"], "ic",
                            {"kind", "eta0", "u0", "amplitude", "width", "center", "eta_right",
                             "position", "smoothing", "wavenumber"}));
  cfg.run = parse_run(Section(root["run"], "run",
                              {"t_end", "cfl", "output_every", "dt_max", "dt_min", "out_path",
                               "format"}));

  if (cfg.model.family != ModelFamily::General && !as_power_law(cfg.rheology)) {
    throw ConfigError("rheology.type",
                      fmt::format("model family {} needs a power-law or newtonian rheology",
                                  to_string(cfg.model.family)));
  }
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", fmt::format("cannot open config file '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

Rheology load_rheology(const std::filesystem::path& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::BadFile&) {
    throw ConfigError("", fmt::format("cannot open config file '{}'", path.string()));
  } catch (const YAML::Exception& e) {
    throw ConfigError("", fmt::format("malformed config: {}", e.what()));
  }
  if (!root.IsMap()) throw ConfigError("", "config must be a mapping of sections");
  return parse_rheology(
      Section(root["rheology"], "rheology", {"preset", "type", "s", "cs", "nu", "table"}));
}

}  // namespace reofilm
