#include "retq/config_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace retq {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw std::runtime_error("config error at " + path + ": " + msg);
}

Matrix read_matrix(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty() || !j[0].is_array())
    fail(path, "expected a matrix (array of rows)");
  const size_t rows = j.size(), cols = j[0].size();
  Matrix m(rows, cols);
  for (size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) fail(path, "ragged matrix rows");
    for (size_t c = 0; c < cols; ++c) {
      if (!j[r][c].is_number()) fail(path, "non-numeric matrix entry");
      m(r, c) = j[r][c].get<double>();
    }
  }
  return m;
}

RowVector read_row(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a vector");
  RowVector v(j.size());
  for (size_t q = 0; q < j.size(); ++q) {
    if (!j[q].is_number()) fail(path, "non-numeric vector entry");
    v(q) = j[q].get<double>();
  }
  return v;
}

const json& at(const json& j, const char* key, const std::string& path) {
  auto it = j.find(key);
  if (it == j.end()) fail(path, std::string("missing key '") + key + "'");
  return *it;
}

PhaseType read_ph(const json& j, const std::string& path) {
  PhaseType ph(read_row(at(j, "init", path), path + ".init"),
               read_matrix(at(j, "subgen", path), path + ".subgen"));
  if (auto it = j.find("rate"); it != j.end())
    ph = ph.scaled_to_rate(it->get<double>());
  return ph;
}

ModelConfig read_model(const json& j, const std::string& path) {
  ModelConfig cfg;
  cfg.channels = at(j, "channels", path).get<int>();
  cfg.backup_channels = at(j, "backup_channels", path).get<int>();
  cfg.orbit_threshold = at(j, "orbit_threshold", path).get<int>();
  if (auto it = j.find("catastrophe_restarts_repairs"); it != j.end())
    cfg.catastrophe_restarts_repairs = it->get<bool>();

  const json& arr = at(j, "arrivals", path);
  const std::string ap = path + ".arrivals";
  cfg.arrivals.c0 = read_matrix(at(arr, "c0", ap), ap + ".c0");
  const json& cls = at(arr, "classes", ap);
  for (const char* name : {"handoff", "new", "emergency"})
    cfg.arrivals.classes.push_back(
        read_matrix(at(cls, name, ap + ".classes"), ap + ".classes." + name));

  const json& cat = at(j, "catastrophe", path);
  cfg.catastrophe = Map2(read_matrix(at(cat, "d0", path + ".catastrophe"),
                                     path + ".catastrophe.d0"),
                         read_matrix(at(cat, "d1", path + ".catastrophe"),
                                     path + ".catastrophe.d1"));

  const json& svc = at(j, "service", path);
  const char* names[] = {"handoff", "new", "emergency"};
  for (int c = 0; c < 3; ++c)
    cfg.service[c] =
        read_ph(at(svc, names[c], path + ".service"), path + ".service." + names[c]);
  cfg.repair = read_ph(at(j, "repair", path), path + ".repair");

  const json& ret = at(j, "retrial", path);
  const std::string rp = path + ".retrial";
  PhaseType base = read_ph(ret, rp);
  const double p_ab =
      ret.contains("abandon_fraction") ? ret["abandon_fraction"].get<double>() : 0.0;
  cfg.retrial = MarkedPhaseType::split(base, p_ab);

  try {
    cfg.validate();
  } catch (const std::exception& e) {
    fail(path, e.what());
  }
  return cfg;
}

}  // namespace

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

RunSpec parse_config(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(origin + ": " + e.what());
  }
  RunSpec spec;
  spec.config_hash = fnv1a_hex(text);
  spec.model = read_model(at(j, "model", origin), origin + ".model");

  if (auto it = j.find("solver"); it != j.end()) {
    const json& s = *it;
    if (s.contains("delta")) spec.solver.delta = s["delta"].get<double>();
    if (s.contains("eps_g")) spec.solver.eps_g = s["eps_g"].get<double>();
    if (s.contains("eps_f")) spec.solver.eps_f = s["eps_f"].get<double>();
    if (s.contains("s_multiplier")) spec.solver.s_multiplier = s["s_multiplier"].get<int>();
    if (s.contains("initial_level")) spec.solver.initial_level = s["initial_level"].get<int>();
    if (s.contains("max_iterations"))
      spec.solver.max_iterations = s["max_iterations"].get<int>();
  }

  spec.sim.model = spec.model;
  if (auto it = j.find("sim"); it != j.end()) {
    const json& s = *it;
    if (s.contains("events")) spec.sim.events = s["events"].get<std::uint64_t>();
    if (s.contains("warmup_fraction"))
      spec.sim.warmup_fraction = s["warmup_fraction"].get<double>();
    if (s.contains("replications")) spec.sim.replications = s["replications"].get<int>();
    if (s.contains("batches")) spec.sim.batches = s["batches"].get<int>();
    if (s.contains("seed")) spec.sim.seed = s["seed"].get<std::uint64_t>();
  }

  spec.optimize.base = spec.model;
  spec.optimize.k_max = spec.model.channels;
  spec.optimize.solver = spec.solver;
  if (auto it = j.find("optimize"); it != j.end()) {
    const json& o = *it;
    if (o.contains("k_min")) spec.optimize.k_min = o["k_min"].get<int>();
    if (o.contains("k_max")) spec.optimize.k_max = o["k_max"].get<int>();
    if (o.contains("lambda")) {
      spec.optimize.lambda_lo = o["lambda"][0].get<double>();
      spec.optimize.lambda_hi = o["lambda"][1].get<double>();
    }
    if (o.contains("mu")) {
      spec.optimize.mu_lo = o["mu"][0].get<double>();
      spec.optimize.mu_hi = o["mu"][1].get<double>();
    }
    if (o.contains("eps")) {
      spec.optimize.eps1 = o["eps"][0].get<double>();
      spec.optimize.eps2 = o["eps"][1].get<double>();
      spec.optimize.eps3 = o["eps"][2].get<double>();
    }
    if (o.contains("optimize_lambda"))
      spec.optimize.optimize_lambda = o["optimize_lambda"].get<bool>();
    if (o.contains("fixed_lambda"))
      spec.optimize.fixed_lambda = o["fixed_lambda"].get<double>();
    if (o.contains("solver")) {
      const json& s = o["solver"];
      if (s.contains("delta")) spec.optimize.solver.delta = s["delta"].get<double>();
      if (s.contains("eps_g")) spec.optimize.solver.eps_g = s["eps_g"].get<double>();
      if (s.contains("eps_f")) spec.optimize.solver.eps_f = s["eps_f"].get<double>();
      if (s.contains("s_multiplier"))
        spec.optimize.solver.s_multiplier = s["s_multiplier"].get<int>();
      if (s.contains("initial_level"))
        spec.optimize.solver.initial_level = s["initial_level"].get<int>();
    }
    if (o.contains("pop")) spec.opt_pop = o["pop"].get<int>();
    if (o.contains("generations")) spec.opt_generations = o["generations"].get<int>();
    if (o.contains("seed")) spec.opt_seed = o["seed"].get<std::uint64_t>();
  }

  if (auto it = j.find("sweep"); it != j.end()) {
    const json& axes = at(*it, "axes", origin + ".sweep");
    for (size_t q = 0; q < axes.size(); ++q) {
      SweepAxis axis;
      const std::string apath = origin + ".sweep.axes[" + std::to_string(q) + "]";
      axis.key = at(axes[q], "key", apath).get<std::string>();
      for (const json& v : at(axes[q], "values", apath)) axis.values.push_back(v.get<double>());
      if (axis.values.empty()) fail(apath, "empty sweep axis");
      // reject unknown keys up front
      ModelConfig probe = spec.model;
      apply_parameter(probe, axis.key, axis.values.front());
      spec.sweep.push_back(std::move(axis));
    }
  }
  return spec;
}

RunSpec load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

void apply_parameter(ModelConfig& cfg, const std::string& key, double value) {
  auto scale_class = [&](int cls) {
    const double current = arrival_rate(cfg.arrivals, cls);
    if (current <= 0)
      throw std::invalid_argument("apply_parameter: class " + std::to_string(cls) +
                                  " has zero rate, cannot rescale");
    Matrix old = cfg.arrivals.classes[cls];
    cfg.arrivals.classes[cls] *= value / current;
    cfg.arrivals.c0 -=
        Matrix((cfg.arrivals.classes[cls] - old).rowwise().sum().asDiagonal());
  };
  if (key == "lambda_h") {
    scale_class(0);
  } else if (key == "lambda_n") {
    scale_class(1);
  } else if (key == "lambda_e") {
    scale_class(2);
  } else if (key == "mu_h") {
    cfg.service[0] = cfg.service[0].scaled_to_rate(value);
  } else if (key == "mu_n") {
    cfg.service[1] = cfg.service[1].scaled_to_rate(value);
  } else if (key == "mu_e") {
    cfg.service[2] = cfg.service[2].scaled_to_rate(value);
  } else if (key == "mu_repair") {
    cfg.repair = cfg.repair.scaled_to_rate(value);
  } else if (key == "theta") {
    const double factor = value * cfg.retrial.mean();
    cfg.retrial.subgen *= factor;
    for (Vector& e : cfg.retrial.exits) e *= factor;
  } else if (key == "catastrophe_rate") {
    const double current = total_event_rate(cfg.catastrophe);
    if (current <= 0) {
      cfg.catastrophe = Map2::poisson(value);
    } else {
      const double factor = value / current;
      cfg.catastrophe.d1 *= factor;
      cfg.catastrophe.d0 -=
          Matrix(((factor - 1.0) / factor * cfg.catastrophe.d1).rowwise().sum().asDiagonal());
    }
  } else if (key == "channels") {
    cfg.channels = static_cast<int>(value);
  } else if (key == "backup_channels") {
    cfg.backup_channels = static_cast<int>(value);
  } else if (key == "orbit_threshold") {
    cfg.orbit_threshold = static_cast<int>(value);
  } else {
    throw std::invalid_argument("apply_parameter: unknown key '" + key + "'");
  }
  cfg.validate();
}

}  // namespace retq
