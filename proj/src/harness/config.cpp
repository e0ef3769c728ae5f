#include "ngl/harness/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace ngl::harness {

namespace {

std::string describe(const std::string& field, int line, const std::string& message) {
  std::string out;
  if (line > 0) out += "line " + std::to_string(line) + ": ";
  if (!field.empty()) out += "field '" + field + "': ";
  return out + message;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_key(const std::string& key) {
  std::vector<std::string> parts;
  std::stringstream ss(key);
  std::string part;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  return parts;
}

void assign(Json& root, const std::string& key, Json value, int line) {
  const auto parts = split_key(key);
  Json* node = &root;
  std::string path;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const std::string& part = parts[i];
    if (part.empty()) throw ConfigError(key, line, "empty key component");
    path += (path.empty() ? "" : ".") + part;
    if (i + 1 == parts.size()) {
      if (node->contains(part)) throw ConfigError(key, line, "duplicate key");
      (*node)[part] = std::move(value);
      return;
    }
    if (!node->contains(part)) {
      (*node)[part] = Json::object();
    } else if (!(*node)[part].is_object()) {
      throw ConfigError(key, line, "'" + path + "' already holds a value");
    }
    node = &(*node)[part];
  }
}

ConfigDocument parse_dotted(const std::string& text) {
  ConfigDocument doc;
  std::stringstream in(text);
  std::string raw;
  std::string section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(raw);
    if (s.empty() || s[0] == '#') continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError("", line, "unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("", line, "expected 'key = value'");
    std::string key = trim(s.substr(0, eq));
    const std::string value_text = trim(s.substr(eq + 1));
    if (key.empty()) throw ConfigError("", line, "missing key");
    if (value_text.empty()) throw ConfigError(key, line, "missing value");
    if (!section.empty()) key = section + "." + key;
    Json value;
    try {
      value = Json::parse(value_text);
    } catch (const Json::parse_error&) {
      if (value_text.front() == '[' || value_text.front() == '{' || value_text.front() == '"') {
        throw ConfigError(key, line, "malformed value '" + value_text + "'");
      }
      value = value_text;
    }
    assign(doc.root, key, std::move(value), line);
    doc.lines[key] = line;
  }
  return doc;
}

// Typed access to one document that remembers which keys were read.
class Reader {
 public:
  explicit Reader(const ConfigDocument& doc) : doc_(doc) {}

  const Json* find(const std::string& key) {
    const Json* node = &doc_.root;
    for (const auto& part : split_key(key)) {
      if (!node->is_object() || !node->contains(part)) return nullptr;
      node = &(*node)[part];
    }
    used_.insert(key);
    return node;
  }

  [[noreturn]] void fail(const std::string& key, const std::string& message) const {
    throw ConfigError(key, doc_.line_of(key), message);
  }

  double number(const std::string& key, double fallback) {
    const Json* v = find(key);
    if (!v) return fallback;
    if (!v->is_number()) fail(key, "expected a number");
    const double x = v->get<double>();
    if (!std::isfinite(x)) fail(key, "expected a finite number");
    return x;
  }

  std::optional<double> optional_number(const std::string& key) {
    if (!find(key)) return std::nullopt;
    return number(key, 0.0);
  }

  std::int64_t integer(const std::string& key, std::int64_t fallback) {
    const Json* v = find(key);
    if (!v) return fallback;
    if (v->is_number_integer()) return v->get<std::int64_t>();
    if (v->is_number_float()) {
      const double x = v->get<double>();
      if (std::isfinite(x) && x == std::floor(x) && std::abs(x) < 9.0e18) {
        return static_cast<std::int64_t>(x);
      }
    }
    fail(key, "expected an integer");
  }

  std::string text(const std::string& key, const std::string& fallback) {
    const Json* v = find(key);
    if (!v) return fallback;
    if (!v->is_string()) fail(key, "expected a string");
    return v->get<std::string>();
  }

  bool boolean(const std::string& key, bool fallback) {
    const Json* v = find(key);
    if (!v) return fallback;
    if (!v->is_boolean()) fail(key, "expected true or false");
    return v->get<bool>();
  }

  std::vector<double> numbers(const std::string& key) {
    const Json* v = find(key);
    if (!v) return {};
    if (!v->is_array()) fail(key, "expected a list of numbers");
    std::vector<double> out;
    for (const auto& e : *v) {
      if (!e.is_number()) fail(key, "expected a list of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  template <class F>
  auto parsed(const std::string& key, const std::string& fallback, F&& parse) {
    const std::string t = text(key, fallback);
    try {
      return parse(t);
    } catch (const InvalidInput& e) {
      fail(key, e.what());
    }
  }

  // Rejects every leaf that was never read, except under skip_prefix.
  void reject_unknown(const std::string& skip_prefix) const {
    std::function<void(const Json&, const std::string&)> walk = [&](const Json& node,
                                                                   const std::string& path) {
      if (path == skip_prefix) return;
      if (node.is_object() && !node.empty()) {
        for (auto it = node.begin(); it != node.end(); ++it) {
          walk(it.value(), path.empty() ? it.key() : path + "." + it.key());
        }
        return;
      }
      if (!used_.count(path)) throw ConfigError(path, doc_.line_of(path), "unknown field");
    };
    walk(doc_.root, "");
  }

 private:
  const ConfigDocument& doc_;
  std::set<std::string> used_;
};

int checked_int(Reader& r, const std::string& key, std::int64_t fallback) {
  const std::int64_t v = r.integer(key, fallback);
  if (v < -2147483647 || v > 2147483647) r.fail(key, "integer out of range");
  return static_cast<int>(v);
}

}  // namespace

ConfigError::ConfigError(const std::string& field, int line, const std::string& message)
    : InvalidInput(describe(field, line, message)), field_(field), line_(line) {}

int ConfigDocument::line_of(const std::string& key) const {
  const auto it = lines.find(key);
  return it == lines.end() ? 0 : it->second;
}

ConfigDocument parse_config_text(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    ConfigDocument doc;
    try {
      doc.root = Json::parse(text);
    } catch (const Json::parse_error& e) {
      throw ConfigError("", 0, std::string("malformed JSON: ") + e.what());
    }
    return doc;
  }
  return parse_dotted(text);
}

ConfigDocument load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", 0, "cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

DriverKind parse_driver(const std::string& text) {
  if (text == "none") return DriverKind::none;
  if (text == "regularize") return DriverKind::regularize;
  if (text == "stopping") return DriverKind::stopping;
  if (text == "restart") return DriverKind::restart;
  if (text == "combined") return DriverKind::combined;
  throw InvalidInput("unknown driver '" + text + "'");
}

std::string to_string(DriverKind kind) {
  switch (kind) {
    case DriverKind::none: return "none";
    case DriverKind::regularize: return "regularize";
    case DriverKind::stopping: return "stopping";
    case DriverKind::restart: return "restart";
    case DriverKind::combined: return "combined";
  }
  return "unknown";
}

ExperimentConfig experiment_from(const ConfigDocument& doc) {
  if (!doc.root.is_object()) throw ConfigError("", 0, "configuration must be an object");
  Reader r(doc);
  ExperimentConfig c;
  c.name = r.text("name", c.name);
  c.out_dir = r.text("output.dir", c.out_dir);
  c.x0_fill = r.number("x0", c.x0_fill);

  ProblemSpec& p = c.problem;
  p.family = r.text("problem.family", p.family);
  if (p.family != "nesterov_convex" && p.family != "nesterov_strongly_convex" &&
      p.family != "quadratic") {
    r.fail("problem.family", "unknown family '" + p.family + "'");
  }
  p.n = checked_int(r, "problem.n", p.n);
  p.k = checked_int(r, "problem.k", p.n);
  p.mu = r.number("problem.mu", p.family == "nesterov_convex" ? 0.0 : p.mu);
  p.L = r.number("problem.L", p.L);
  p.diag = r.numbers("problem.diag");
  p.b = r.numbers("problem.b");

  OracleSpec& o = c.oracle;
  o.kind = r.text("oracle.kind", o.kind);
  if (o.kind != "noisy" && o.kind != "compressed" && o.kind != "finite_difference" &&
      o.kind != "floating_point") {
    r.fail("oracle.kind", "unknown oracle kind '" + o.kind + "'");
  }
  o.mode = r.parsed("oracle.mode", "none", parse_noise_mode);
  o.alpha = r.number("oracle.alpha", o.alpha);
  o.delta = r.number("oracle.delta", o.delta);
  {
    const std::int64_t seed = r.integer("oracle.seed", 0);
    if (seed < 0) r.fail("oracle.seed", "seed must be non-negative");
    o.seed = static_cast<std::uint64_t>(seed);
  }
  o.compressor = r.text("oracle.compressor", o.compressor);
  try {
    parse_compressor(o.compressor);
  } catch (const InvalidInput& e) {
    r.fail("oracle.compressor", e.what());
  }
  o.compressor_param = checked_int(r, "oracle.compressor_param", o.compressor_param);
  o.fd_h = r.number("oracle.fd_h", o.fd_h);
  o.fd_value_noise = r.number("oracle.fd_value_noise", o.fd_value_noise);
  o.precision = checked_int(r, "oracle.precision", o.precision);
  o.x_l1_radius = r.optional_number("oracle.x_l1_radius");

  SolverSpec& s = c.solver;
  s.kind = r.parsed("solver.kind", "gd", parse_solver);
  s.N = r.integer("solver.N", s.N);
  s.alpha = r.optional_number("solver.alpha");
  s.L0 = r.optional_number("solver.L0");
  s.adapt_L = r.boolean("solver.adapt_L", s.adapt_L);
  s.record_stride = r.integer("solver.record_stride", s.record_stride);
  s.step_scale = r.number("solver.step_scale", s.step_scale);
  s.target_gap = r.optional_number("solver.target_gap");
  s.target_rel = r.optional_number("solver.target_rel");

  DriverSpec& d = c.driver;
  d.kind = r.parsed("driver.kind", "none", parse_driver);
  d.epsilon = r.number("driver.epsilon", d.epsilon);
  d.beta = r.number("driver.beta", d.beta);
  d.tau = r.number("driver.tau", d.tau);
  d.K = r.number("driver.K", d.K);
  d.R = r.optional_number("driver.R");

  r.reject_unknown("sweep");

  auto fail = [&](const std::string& key, const std::string& message) {
    throw ConfigError(key, doc.line_of(key), message);
  };
  if (p.n < 1) fail("problem.n", "must be at least 1");
  if (p.k < 1 || p.k > p.n) fail("problem.k", "must lie in [1, n]");
  if (!(p.L > 0.0)) fail("problem.L", "must be positive");
  if (!(p.mu >= 0.0 && p.mu <= p.L)) fail("problem.mu", "must lie in [0, L]");
  if (!p.diag.empty() && p.diag.size() != static_cast<std::size_t>(p.n)) {
    fail("problem.diag", "needs exactly n entries");
  }
  if (!p.b.empty() && p.b.size() != static_cast<std::size_t>(p.n)) {
    fail("problem.b", "needs exactly n entries");
  }
  if (!(o.alpha >= 0.0 && o.alpha < 1.0)) fail("oracle.alpha", "must lie in [0, 1)");
  if (!(o.delta >= 0.0)) fail("oracle.delta", "must be non-negative");
  if (o.precision < 1 || o.precision > 52) fail("oracle.precision", "must lie in [1, 52]");
  if (!(o.fd_h > 0.0)) fail("oracle.fd_h", "must be positive");
  if (!(o.fd_value_noise >= 0.0)) fail("oracle.fd_value_noise", "must be non-negative");
  if (s.N < 0) fail("solver.N", "must be non-negative");
  if (s.alpha && !(*s.alpha >= 0.0 && *s.alpha < 1.0)) fail("solver.alpha", "must lie in [0, 1)");
  if (s.L0 && !(*s.L0 > 0.0)) fail("solver.L0", "must be positive");
  if (s.record_stride < 1) fail("solver.record_stride", "must be at least 1");
  if (!(s.step_scale > 0.0)) fail("solver.step_scale", "must be positive");
  if (s.target_gap && s.target_rel) fail("solver.target_rel", "conflicts with solver.target_gap");
  if (d.R && !(*d.R > 0.0)) fail("driver.R", "must be positive");
  return c;
}

void validate(const ExperimentConfig& c) {
  const ProblemSpec& p = c.problem;
  const OracleSpec& o = c.oracle;
  const DriverKind d = c.driver.kind;
  if (o.kind == "noisy" && o.mode == NoiseMode::none && (o.alpha > 0.0 || o.delta > 0.0)) {
    throw ConfigError("oracle.mode", 0, "noise levels need a noise mode");
  }
  if (o.kind == "floating_point" && p.family != "quadratic") {
    throw ConfigError("oracle.kind", 0, "floating_point oracle needs the quadratic family");
  }
  if (c.solver.kind == SolverKind::re_agm && p.mu <= 0.0 && d != DriverKind::regularize &&
      d != DriverKind::combined) {
    throw ConfigError("solver.kind", 0, "re_agm needs mu > 0 or driver regularize");
  }
  if (c.solver.kind == SolverKind::adaptive_gd && d != DriverKind::none) {
    throw ConfigError("solver.kind", 0, "adaptive_gd runs without a driver");
  }
  if (d == DriverKind::regularize || d == DriverKind::combined) {
    if (!(c.driver.epsilon > 0.0)) throw ConfigError("driver.epsilon", 0, "must be positive");
  }
  if (d == DriverKind::restart && !(c.driver.epsilon > 0.0)) {
    throw ConfigError("driver.epsilon", 0, "must be positive");
  }
  if ((d == DriverKind::stopping || d == DriverKind::restart) && p.mu <= 0.0) {
    throw ConfigError("driver.kind", 0, "this driver needs mu > 0");
  }
  if (d == DriverKind::stopping && !(c.driver.K > 0.0)) {
    throw ConfigError("driver.K", 0, "must be positive");
  }
  if (d == DriverKind::combined && c.solver.kind != SolverKind::re_agm) {
    throw ConfigError("solver.kind", 0, "driver combined runs re_agm");
  }
}

SweepPlan plan_sweep(const ConfigDocument& doc) {
  SweepPlan plan;
  ConfigDocument base = doc;
  if (base.root.is_object() && base.root.contains("sweep")) {
    const Json sweep = base.root["sweep"];
    base.root.erase("sweep");
    if (!sweep.is_object()) throw ConfigError("sweep", doc.line_of("sweep"), "expected a section");
    std::function<void(const Json&, const std::string&)> collect = [&](const Json& node,
                                                                      const std::string& path) {
      if (node.is_object()) {
        for (auto it = node.begin(); it != node.end(); ++it) {
          collect(it.value(), path.empty() ? it.key() : path + "." + it.key());
        }
        return;
      }
      const std::string key = "sweep." + path;
      if (!node.is_array()) throw ConfigError(key, doc.line_of(key), "expected a list of values");
      if (node.empty()) throw ConfigError(key, doc.line_of(key), "empty sweep list");
      plan.axes.push_back({path, std::vector<Json>(node.begin(), node.end())});
    };
    collect(sweep, "");
    if (plan.axes.empty()) throw ConfigError("sweep", doc.line_of("sweep"), "empty sweep section");
  }
  const ExperimentConfig base_cfg = experiment_from(base);
  if (plan.axes.empty()) {
    plan.runs.push_back({base_cfg, {}});
    return plan;
  }
  std::vector<std::size_t> index(plan.axes.size(), 0);
  for (std::size_t run = 0;; ++run) {
    ConfigDocument variant = base;
    std::vector<Json> point;
    for (std::size_t a = 0; a < plan.axes.size(); ++a) {
      const std::string& key = plan.axes[a].key;
      const Json& value = plan.axes[a].values[index[a]];
      const auto parts = split_key(key);
      Json* node = &variant.root;
      for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        if (!node->contains(parts[i]) || !(*node)[parts[i]].is_object()) {
          (*node)[parts[i]] = Json::object();
        }
        node = &(*node)[parts[i]];
      }
      (*node)[parts.back()] = value;
      variant.lines[key] = doc.line_of("sweep." + key);
      point.push_back(value);
    }
    ExperimentConfig cfg = experiment_from(variant);
    cfg.out_dir = base_cfg.out_dir + "/run_" + std::to_string(run);
    plan.runs.push_back({std::move(cfg), std::move(point)});
    std::size_t a = plan.axes.size();
    while (a > 0) {
      --a;
      if (++index[a] < plan.axes[a].values.size()) break;
      index[a] = 0;
      if (a == 0) return plan;
    }
  }
}

void apply_environment(ExperimentConfig& cfg) {
  const char* env = std::getenv("NGL_SEED");
  if (!env || !*env) return;
  char* end = nullptr;
  const unsigned long long seed = std::strtoull(env, &end, 10);
  if (*end != '\0' || env[0] == '-') throw ConfigError("NGL_SEED", 0, "expected a non-negative integer");
  cfg.oracle.seed = static_cast<std::uint64_t>(seed);
}

}  // namespace ngl::harness
