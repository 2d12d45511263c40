#include "beamsi/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "beamsi/hash.hpp"

namespace beamsi {

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) {
    throw ConfigError("config key '" + key + "': '" + v + "' is not a number");
  }
  return out;
}

long long to_integer(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) {
    throw ConfigError("config key '" + key + "': '" + v + "' is not an integer");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("config key '" + key + "': expected true or false, got '" + v + "'");
}

struct Entry {
  std::string key;
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename Access>
Entry real(std::string key, Access access) {
  return {std::move(key),
          [access](RunConfig& c, const std::string& k, const std::string& v) {
            access(c) = to_double(k, v);
          },
          [access](const RunConfig& c) { return format_double(access(const_cast<RunConfig&>(c))); }};
}

template <typename Access>
Entry integer(std::string key, Access access) {
  return {std::move(key),
          [access](RunConfig& c, const std::string& k, const std::string& v) {
            using T = std::remove_reference_t<decltype(access(c))>;
            access(c) = static_cast<T>(to_integer(k, v));
          },
          [access](const RunConfig& c) { return std::to_string(access(const_cast<RunConfig&>(c))); }};
}

template <typename Access>
Entry boolean(std::string key, Access access) {
  return {std::move(key),
          [access](RunConfig& c, const std::string& k, const std::string& v) {
            access(c) = to_bool(k, v);
          },
          [access](const RunConfig& c) {
            return std::string(access(const_cast<RunConfig&>(c)) ? "true" : "false");
          }};
}

Entry data_loss(std::string key, BaselineConfig RunConfig::*block) {
  return {std::move(key),
          [block](RunConfig& c, const std::string& k, const std::string& v) {
            if (v == "mae") (c.*block).data_loss = DataLoss::mae;
            else if (v == "mse") (c.*block).data_loss = DataLoss::mse;
            else throw ConfigError("config key '" + k + "': expected mae or mse, got '" + v + "'");
          },
          [block](const RunConfig& c) {
            return std::string((c.*block).data_loss == DataLoss::mae ? "mae" : "mse");
          }};
}

void baseline_entries(std::vector<Entry>& e, const std::string& p, BaselineConfig RunConfig::*b) {
  e.push_back(integer(p + ".epochs", [b](RunConfig& c) -> int& { return (c.*b).epochs; }));
  e.push_back(integer(p + ".hidden_layers", [b](RunConfig& c) -> int& { return (c.*b).net.hidden_layers; }));
  e.push_back(integer(p + ".hidden_units", [b](RunConfig& c) -> int& { return (c.*b).net.hidden_units; }));
  e.push_back(boolean(p + ".boundary_factor", [b](RunConfig& c) -> bool& { return (c.*b).net.boundary_factor; }));
  e.push_back(data_loss(p + ".data_loss", b));
  e.push_back(real(p + ".w_data", [b](RunConfig& c) -> double& { return (c.*b).weights.data; }));
  e.push_back(real(p + ".w_pde", [b](RunConfig& c) -> double& { return (c.*b).weights.pde; }));
  e.push_back(real(p + ".w_bc", [b](RunConfig& c) -> double& { return (c.*b).weights.boundary; }));
  e.push_back({p + ".residual_fields",
               [b](RunConfig& c, const std::string& k, const std::string& v) {
                 if (v == "truth") (c.*b).physics.fields = ResidualFields::truth;
                 else if (v == "constant") (c.*b).physics.fields = ResidualFields::constant;
                 else throw ConfigError("config key '" + k + "': expected truth or constant, got '" + v + "'");
               },
               [b](const RunConfig& c) {
                 return std::string((c.*b).physics.fields == ResidualFields::truth ? "truth" : "constant");
               }});
  e.push_back(real(p + ".residual_modulus", [b](RunConfig& c) -> double& { return (c.*b).physics.modulus; }));
  e.push_back(real(p + ".residual_damping", [b](RunConfig& c) -> double& { return (c.*b).physics.damping; }));
  e.push_back(integer(p + ".collocation_x", [b](RunConfig& c) -> int& { return (c.*b).collocation_x; }));
  e.push_back(integer(p + ".collocation_t", [b](RunConfig& c) -> int& { return (c.*b).collocation_t; }));
  e.push_back(integer(p + ".boundary_t", [b](RunConfig& c) -> int& { return (c.*b).boundary_t; }));
  e.push_back(integer(p + ".lbfgs_memory", [b](RunConfig& c) -> int& { return (c.*b).lbfgs_memory; }));
  e.push_back(real(p + ".lbfgs_step", [b](RunConfig& c) -> double& { return (c.*b).lbfgs_step; }));
  e.push_back(integer(p + ".max_halvings", [b](RunConfig& c) -> int& { return (c.*b).max_halvings; }));
}

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = [] {
    std::vector<Entry> e;
    e.push_back(real("beam.length", [](RunConfig& c) -> double& { return c.beam.length; }));
    e.push_back(real("beam.width", [](RunConfig& c) -> double& { return c.beam.width; }));
    e.push_back(real("beam.thickness", [](RunConfig& c) -> double& { return c.beam.thickness; }));
    e.push_back(real("beam.density", [](RunConfig& c) -> double& { return c.beam.density; }));
    e.push_back(real("beam.modulus", [](RunConfig& c) -> double& { return c.beam.modulus; }));
    e.push_back(integer("grid.n_interior", [](RunConfig& c) -> int& { return c.nodes; }));
    e.push_back(integer("grid.n_save", [](RunConfig& c) -> int& { return c.n_save; }));
    e.push_back(real("grid.t_end", [](RunConfig& c) -> double& { return c.t_end; }));
    e.push_back(real("solver.safety", [](RunConfig& c) -> double& { return c.solver_safety; }));
    e.push_back(real("solver.modulus_bound", [](RunConfig& c) -> double& { return c.modulus_bound; }));
    e.push_back(real("load.amplitude", [](RunConfig& c) -> double& { return c.load.amplitude; }));
    e.push_back(real("load.cutoff", [](RunConfig& c) -> double& { return c.load.cutoff; }));
    e.push_back(real("truth.modulus_mean", [](RunConfig& c) -> double& { return c.truth.modulus_mean; }));
    e.push_back(real("truth.modulus_amplitude", [](RunConfig& c) -> double& { return c.truth.modulus_amplitude; }));
    e.push_back(real("truth.damping_max", [](RunConfig& c) -> double& { return c.truth.damping_max; }));
    e.push_back(integer("net.hidden_layers", [](RunConfig& c) -> int& { return c.net.hidden_layers; }));
    e.push_back(integer("net.hidden_units", [](RunConfig& c) -> int& { return c.net.hidden_units; }));
    e.push_back(integer("net.embedding_dim", [](RunConfig& c) -> int& { return c.net.embedding.dimension; }));
    e.push_back(real("net.embedding_base", [](RunConfig& c) -> double& { return c.net.embedding.base; }));
    e.push_back(real("net.modulus_min", [](RunConfig& c) -> double& { return c.net.modulus_min; }));
    e.push_back(real("net.modulus_max", [](RunConfig& c) -> double& { return c.net.modulus_max; }));
    e.push_back(boolean("net.shared_trunk", [](RunConfig& c) -> bool& { return c.net.shared_trunk; }));
    e.push_back(integer("train.epochs", [](RunConfig& c) -> int& { return c.train.epochs; }));
    e.push_back(integer("train.batch_size", [](RunConfig& c) -> int& { return c.train.batch_size; }));
    e.push_back(real("train.sample_ratio", [](RunConfig& c) -> double& { return c.train.sample_ratio; }));
    e.push_back(real("train.lr_initial", [](RunConfig& c) -> double& { return c.train.lr.initial; }));
    e.push_back(real("train.lr_later", [](RunConfig& c) -> double& { return c.train.lr.later; }));
    e.push_back(integer("train.lr_switch_after", [](RunConfig& c) -> int& { return c.train.lr.switch_after; }));
    e.push_back(real("train.lr_final", [](RunConfig& c) -> double& { return c.train.lr.final; }));
    e.push_back(integer("train.lr_final_after", [](RunConfig& c) -> int& { return c.train.lr.final_after; }));
    e.push_back(real("train.beta1", [](RunConfig& c) -> double& { return c.train.adamw.beta1; }));
    e.push_back(real("train.beta2", [](RunConfig& c) -> double& { return c.train.adamw.beta2; }));
    e.push_back(real("train.epsilon", [](RunConfig& c) -> double& { return c.train.adamw.epsilon; }));
    e.push_back(real("train.weight_decay", [](RunConfig& c) -> double& { return c.train.adamw.weight_decay; }));
    e.push_back(real("train.max_skip_fraction", [](RunConfig& c) -> double& { return c.train.max_skip_fraction; }));
    baseline_entries(e, "dnn", &RunConfig::dnn);
    baseline_entries(e, "pinn", &RunConfig::pinn);
    e.push_back(integer("eval.extrapolation_multiplier", [](RunConfig& c) -> int& { return c.extrapolation_multiplier; }));
    e.push_back(integer("run.seed", [](RunConfig& c) -> std::uint64_t& { return c.seed; }));
    e.push_back({"run.out_dir",
                 [](RunConfig& c, const std::string&, const std::string& v) { c.out_dir = v; },
                 [](const RunConfig& c) { return c.out_dir; }});
    return e;
  }();
  return table;
}

}  // namespace

BeamProblem RunConfig::problem() const {
  BeamProblem p;
  p.spec = BeamSpec(beam.length, beam.width, beam.thickness, beam.density, beam.modulus);
  p.nodes = nodes;
  p.load = load;
  p.truth = truth;
  p.solver.t_end = t_end;
  p.solver.n_save = n_save;
  p.solver.safety = solver_safety;
  return p.with_resolved_step(modulus_bound);
}

void RunConfig::validate() const {
  if (nodes < 4) throw ConfigError("grid.n_interior must be >= 4");
  if (n_save < 1) throw ConfigError("grid.n_save must be >= 1");
  if (!(t_end > 0.0)) throw ConfigError("grid.t_end must be > 0");
  if (!(solver_safety > 0.0 && solver_safety <= 1.0)) throw ConfigError("solver.safety must lie in (0, 1]");
  if (!(modulus_bound >= net.modulus_max)) {
    throw ConfigError("solver.modulus_bound must be >= net.modulus_max so every network field stays stable");
  }
  if (!(train.sample_ratio > 0.0 && train.sample_ratio <= 1.0)) {
    throw ConfigError("train.sample_ratio must lie in (0, 1]");
  }
  if (extrapolation_multiplier < 1) throw ConfigError("eval.extrapolation_multiplier must be >= 1");
  if (out_dir.empty()) throw ConfigError("run.out_dir must not be empty");
  dnn.validate();
  pinn.validate();
  BeamSpec(beam.length, beam.width, beam.thickness, beam.density, beam.modulus);
}

RunConfig parse_config(const std::string& text) {
  std::map<std::string, const Entry*> index;
  for (const auto& e : entries()) index[e.key] = &e;
  RunConfig cfg;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    const auto it = index.find(key);
    if (it == index.end()) throw ConfigError("unknown config key '" + key + "'");
    if (!seen.insert(key).second) throw ConfigError("config key '" + key + "' given twice");
    if (value.empty()) throw ConfigError("config key '" + key + "' has no value");
    it->second->set(cfg, key, value);
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::string to_text(const RunConfig& cfg) {
  std::string out;
  for (const auto& e : entries()) out += e.key + " = " + e.get(cfg) + "\n";
  return out;
}

std::uint64_t config_hash(const RunConfig& cfg) {
  Fnv1a h;
  for (const auto& e : entries()) {
    if (e.key == "run.out_dir") continue;
    h.text(e.key).text("=").text(e.get(cfg)).text("\n");
  }
  return h.digest();
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& e : entries()) keys.push_back(e.key);
  return keys;
}

}  // namespace beamsi
