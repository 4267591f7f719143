#include "nefk/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"
#include "nefk/errors.hpp"

namespace nefk {

using nlohmann::json;

namespace {

json to_json(const RunConfig& c) {
  json j;
  j["model"] = {{"U", c.U}, {"w1", c.w1}, {"mu_policy", c.mu_policy}, {"mu", c.mu}};
  j["thermal"] = {{"T", c.T}};
  j["field"] = {{"E", c.E}, {"t_on", c.t_on}};
  j["contour"] = {{"t_min", c.t_min}, {"t_max", c.t_max}, {"dt", c.dt}, {"n_tau", c.n_tau}};
  j["quadrature"] = {{"order", c.quad_order}, {"prune", c.quad_prune}};
  j["scf"] = {{"tol", c.scf_tol}, {"max_iter", c.scf_max_iter}, {"mixing", c.scf_mixing}};
  j["equilibrium"] = {{"U", c.eq_U}, {"omega_max", c.eq_omega_max}, {"n_omega", c.eq_n_omega}};
  j["bridge"] = {{"t_fit_start", c.t_fit_start},
                 {"t_patch", c.t_patch},
                 {"t_max_new", c.t_max_new},
                 {"blend_width", c.blend_width},
                 {"steady_window", c.steady_window},
                 {"run", c.bridge_run},
                 {"fit_family", c.fit_family},
                 {"mixed_threshold", c.mixed_threshold}};
  j["analysis"] = {{"min_extent", c.min_extent},
                   {"omega_max", c.omega_max},
                   {"n_omega", c.n_omega},
                   {"slice_step", c.slice_step}};
  j["output"] = {{"dir", c.output_dir}, {"checkpoint_every", c.checkpoint_every}, {"threads", c.threads}};
  return j;
}

template <class T>
void take(const json& j, const char* sec, const char* key, T& dst) {
  if (!j.contains(sec)) return;
  const json& s = j.at(sec);
  if (!s.is_object()) throw ConfigError(std::string("config: section '") + sec + "' must be an object");
  if (s.contains(key)) dst = s.at(key).get<T>();
}

RunConfig from_json(const json& j) {
  static const std::vector<std::string> sections{"model",  "thermal",     "field",  "contour", "quadrature",
                                                 "scf",    "equilibrium", "bridge", "analysis", "output"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find(sections.begin(), sections.end(), it.key()) == sections.end())
      throw ConfigError("config: unknown section '" + it.key() + "'");
  RunConfig c;
  take(j, "model", "U", c.U);
  take(j, "model", "w1", c.w1);
  take(j, "model", "mu_policy", c.mu_policy);
  take(j, "model", "mu", c.mu);
  take(j, "thermal", "T", c.T);
  take(j, "field", "E", c.E);
  take(j, "field", "t_on", c.t_on);
  take(j, "contour", "t_min", c.t_min);
  take(j, "contour", "t_max", c.t_max);
  take(j, "contour", "dt", c.dt);
  take(j, "contour", "n_tau", c.n_tau);
  take(j, "quadrature", "order", c.quad_order);
  take(j, "quadrature", "prune", c.quad_prune);
  take(j, "scf", "tol", c.scf_tol);
  take(j, "scf", "max_iter", c.scf_max_iter);
  take(j, "scf", "mixing", c.scf_mixing);
  take(j, "equilibrium", "U", c.eq_U);
  take(j, "equilibrium", "omega_max", c.eq_omega_max);
  take(j, "equilibrium", "n_omega", c.eq_n_omega);
  take(j, "bridge", "t_fit_start", c.t_fit_start);
  take(j, "bridge", "t_patch", c.t_patch);
  take(j, "bridge", "t_max_new", c.t_max_new);
  take(j, "bridge", "blend_width", c.blend_width);
  take(j, "bridge", "steady_window", c.steady_window);
  take(j, "bridge", "run", c.bridge_run);
  take(j, "bridge", "fit_family", c.fit_family);
  take(j, "bridge", "mixed_threshold", c.mixed_threshold);
  take(j, "analysis", "min_extent", c.min_extent);
  take(j, "analysis", "omega_max", c.omega_max);
  take(j, "analysis", "n_omega", c.n_omega);
  take(j, "analysis", "slice_step", c.slice_step);
  take(j, "output", "dir", c.output_dir);
  take(j, "output", "checkpoint_every", c.checkpoint_every);
  take(j, "output", "threads", c.threads);
  return c;
}

}  // namespace

double RunConfig::chemical_potential() const { return mu_policy == "half_filling" ? U * w1 : mu; }

ModelParams RunConfig::model() const { return model_at(U); }

ModelParams RunConfig::model_at(double u) const {
  ModelParams p;
  p.U = u;
  p.w1 = w1;
  p.mu = mu_policy == "half_filling" ? u * w1 : mu;
  p.T = T;
  p.fp = FieldProtocol{E, t_on};
  return p;
}

void RunConfig::validate() const {
  auto finite = [](double x, const char* name) {
    if (!std::isfinite(x)) throw ConfigError(std::string("config: ") + name + " is not finite");
  };
  finite(U, "model.U");
  finite(w1, "model.w1");
  finite(mu, "model.mu");
  finite(T, "thermal.T");
  finite(E, "field.E");
  finite(t_on, "field.t_on");
  finite(t_min, "contour.t_min");
  finite(t_max, "contour.t_max");
  if (mu_policy != "half_filling" && mu_policy != "fixed")
    throw ConfigError("config: model.mu_policy must be 'half_filling' or 'fixed'");
  if (w1 < 0 || w1 > 1) throw ConfigError("config: model.w1 must lie in [0, 1]");
  if (!(T > 0)) throw ConfigError("config: thermal.T must be positive");
  if (!(t_max > t_min)) throw ConfigError("config: contour.t_max must exceed t_min");
  if (n_tau < 2) throw ConfigError("config: contour.n_tau must be at least 2");
  for (double d : dt) {
    finite(d, "contour.dt");
    if (!(d > 0)) throw ConfigError("config: contour.dt entries must be positive");
    const double steps = (t_max - t_min) / d;
    if (std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps))
      throw ConfigError("config: contour.dt does not divide t_max - t_min");
  }
  if (!(dt[0] > dt[1] && dt[1] > dt[2])) throw ConfigError("config: contour.dt must be strictly decreasing");
  if (quad_order < 1) throw ConfigError("config: quadrature.order must be positive");
  if (!(scf_tol > 0) || scf_max_iter < 1) throw ConfigError("config: scf.tol and scf.max_iter must be positive");
  if (!(scf_mixing > 0 && scf_mixing <= 1)) throw ConfigError("config: scf.mixing must lie in (0, 1]");
  if (eq_n_omega < 2 || !(eq_omega_max > 0)) throw ConfigError("config: equilibrium grid is empty");
  if (!(t_patch > t_min) || !(t_patch <= t_max)) throw ConfigError("config: bridge.t_patch must lie in (t_min, t_max]");
  if (!(t_max_new >= t_max)) throw ConfigError("config: bridge.t_max_new must not be earlier than t_max");
  if (blend_width < 0) throw ConfigError("config: bridge.blend_width must be non-negative");
  if (bridge_run < 0 || bridge_run > 2) throw ConfigError("config: bridge.run must index the dt triple");
  if (fit_family != "auto" && fit_family != "exp" && fit_family != "exp2")
    throw ConfigError("config: bridge.fit_family must be auto, exp or exp2");
  if (!(mixed_threshold > 0)) throw ConfigError("config: bridge.mixed_threshold must be positive");
  if (!(min_extent > 0) || !(omega_max > 0) || n_omega < 2 || !(slice_step > 0))
    throw ConfigError("config: analysis parameters must be positive");
  if (checkpoint_every < 0) throw ConfigError("config: output.checkpoint_every must be non-negative");
}

namespace {

// FNV-1a over a canonical JSON dump.
std::string fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

}  // namespace

std::string RunConfig::hash() const { return fnv1a(to_json(*this).dump()); }

std::string RunConfig::solver_hash() const {
  const json j = to_json(*this);
  json sub;
  for (const char* k : {"model", "thermal", "field", "contour", "quadrature", "scf"}) sub[k] = j.at(k);
  return fnv1a(sub.dump());
}

RunConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: parse error: ") + e.what());
  }
  try {
    RunConfig c = from_json(j);
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: type error: ") + e.what());
  }
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

std::string config_to_json(const RunConfig& c) { return to_json(c).dump(2); }

void apply_override(RunConfig& c, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq), value = assignment.substr(eq + 1);
  const auto dot = key.find('.');
  if (dot == std::string::npos) throw ConfigError("override key '" + key + "' must be section.name");
  json j = to_json(c);
  const std::string sec = key.substr(0, dot), name = key.substr(dot + 1);
  if (!j.contains(sec) || !j[sec].contains(name)) throw ConfigError("override: unknown key '" + key + "'");
  json v;
  try {
    v = json::parse(value);
  } catch (const json::exception&) {
    v = value;  // bare string
  }
  j[sec][name] = v;
  try {
    c = from_json(j);
  } catch (const json::exception& e) {
    throw ConfigError("override '" + assignment + "': " + e.what());
  }
}

}  // namespace nefk
