#include "geneo/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace geneo {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) fail("empty entry in config list '" + s + "'");
    out.push_back(item);
  }
  if (out.empty()) fail("empty config value");
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    fail("config key '" + key + "': '" + v + "' is not a number");
  }
}

int parse_int(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    long x = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return int(x);
  } catch (const std::exception&) {
    fail("config key '" + key + "': '" + v + "' is not an integer");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    unsigned long long x = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    fail("config key '" + key + "': '" + v + "' is not a nonnegative integer");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  fail("config key '" + key + "': '" + v + "' is not a boolean (true|false)");
}

std::array<int, 2> parse_grid(const std::string& key, const std::string& v) {
  size_t x = v.find('x');
  if (x == std::string::npos) return {parse_int(key, v), 1};
  return {parse_int(key, trim(v.substr(0, x))), parse_int(key, trim(v.substr(x + 1)))};
}

void apply_key(ExperimentConfig& c, const std::string& key, const std::string& v) {
  if (key == "mesh.dimension") c.dimension = parse_int(key, v);
  else if (key == "mesh.cells") c.cells = parse_int(key, v);
  else if (key == "mesh.boundary") {
    if (v == "dirichlet") c.boundary = Boundary::dirichlet;
    else if (v == "none") c.boundary = Boundary::none;
    else fail("config key 'mesh.boundary': '" + v + "' is not a boundary kind (dirichlet|none)");
  } else if (key == "coefficient.kind") {
    if (v != "constant" && v != "checkerboard" && v != "channels")
      fail("config key 'coefficient.kind': '" + v +
           "' is not a coefficient kind (constant|checkerboard|channels)");
    c.coefficient_kind = v;
  } else if (key == "coefficient.value") c.coefficient_value = parse_double(key, v);
  else if (key == "coefficient.contrast") {
    c.contrasts.clear();
    for (const auto& item : split_list(v)) c.contrasts.push_back(parse_double(key, item));
  } else if (key == "coefficient.channel_count") c.channel_count = parse_int(key, v);
  else if (key == "decomposition.grid") c.grid = parse_grid(key, v);
  else if (key == "decomposition.overlap") c.overlap = parse_int(key, v);
  else if (key == "decomposition.extension_layers") c.extension_layers = parse_int(key, v);
  else if (key == "coarse.method") {
    c.methods.clear();
    for (const auto& item : split_list(v)) c.methods.push_back(method_from_name(item));
  } else if (key == "coarse.tau") c.tau = parse_double(key, v);
  else if (key == "coarse.gamma") c.gamma = parse_double(key, v);
  else if (key == "coarse.b_kind") {
    if (v == "robin") c.b_kind = BKind::robin;
    else if (v == "neumann") c.b_kind = BKind::neumann;
    else fail("config key 'coarse.b_kind': '" + v + "' is not a B kind (robin|neumann)");
  } else if (key == "coarse.alpha") c.alpha = parse_double(key, v);
  else if (key == "inexact.strategy") {
    c.strategies.clear();
    for (const auto& item : split_list(v)) c.strategies.push_back(strategy_from_name(item));
  } else if (key == "inexact.lo") c.lo = parse_double(key, v);
  else if (key == "inexact.hi") c.hi = parse_double(key, v);
  else if (key == "inexact.drop_tol") c.drop_tol = parse_double(key, v);
  else if (key == "solver.rel_tol") c.rel_tol = parse_double(key, v);
  else if (key == "solver.max_iter") c.max_iter = parse_int(key, v);
  else if (key == "analysis.spectrum") c.spectrum = parse_bool(key, v);
  else if (key == "analysis.bounds") c.bounds = parse_bool(key, v);
  else if (key == "analysis.eps_direct") c.eps_direct = parse_bool(key, v);
  else if (key == "analysis.size_cap") c.size_cap = parse_int(key, v);
  else if (key == "output.dir") c.out_dir = v;
  else if (key == "output.matrices") c.matrices = parse_bool(key, v);
  else if (key == "seed") c.seed = parse_u64(key, v);
  else if (key == "source.kind") {
    if (v == "zero") c.source.kind = Source::zero;
    else if (v == "constant") c.source.kind = Source::constant;
    else if (v == "point") c.source.kind = Source::point;
    else fail("config key 'source.kind': '" + v + "' is not a source kind (zero|constant|point)");
  } else if (key == "source.value") c.source.value = parse_double(key, v);
  else if (key == "source.dof") c.source.dof = parse_int(key, v);
  else fail("unknown config key '" + key + "'");
}

void validate(const ExperimentConfig& c) {
  if (c.dimension == 0) fail("config key 'mesh.dimension' is required");
  if (c.dimension != 1 && c.dimension != 2) fail("config key 'mesh.dimension' must be 1 or 2");
  if (c.cells == 0) fail("config key 'mesh.cells' is required");
  if (c.cells < 2) fail("config key 'mesh.cells' must be at least 2");
  if (c.grid[0] == 0) fail("config key 'decomposition.grid' is required");
  if (c.grid[0] < 1 || c.grid[1] < 1) fail("config key 'decomposition.grid' must be positive");
  if (c.dimension == 1 && c.grid[1] != 1)
    fail("config key 'decomposition.grid': a 1D mesh needs a 1D grid");
  if (c.overlap < 0) fail("config key 'decomposition.overlap' must be >= 0");
  if (c.extension_layers < 1) fail("config key 'decomposition.extension_layers' must be >= 1");
  if (c.coefficient_value <= 0) fail("config key 'coefficient.value' must be positive");
  for (double x : c.contrasts)
    if (x <= 0) fail("config key 'coefficient.contrast' must be positive");
  if (c.channel_count < 1) fail("config key 'coefficient.channel_count' must be >= 1");
  if (c.tau <= 0) fail("config key 'coarse.tau' must be positive");
  if (c.gamma <= 0) fail("config key 'coarse.gamma' must be positive");
  if (c.alpha <= 0) fail("config key 'coarse.alpha' must be positive");
  if (c.lo <= 0 || c.hi < c.lo) fail("config keys 'inexact.lo'/'inexact.hi': need 0 < lo <= hi");
  if (c.drop_tol < 0) fail("config key 'inexact.drop_tol' must be >= 0");
  if (c.rel_tol <= 0 || c.rel_tol >= 1) fail("config key 'solver.rel_tol' must be in (0,1)");
  if (c.max_iter < 1) fail("config key 'solver.max_iter' must be >= 1");
  if (c.size_cap < 1) fail("config key 'analysis.size_cap' must be >= 1");
  if (c.bounds && !c.spectrum)
    fail("config key 'analysis.bounds' requires 'analysis.spectrum = true'");
  if (c.source.kind == Source::point && c.source.dof < 0)
    fail("config key 'source.dof' must be >= 0");
  if (c.out_dir.empty()) fail("config key 'output.dir' must not be empty");
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig c;
  std::set<std::string> seen;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      fail("config line " + std::to_string(lineno) + ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail("config line " + std::to_string(lineno) + ": empty key");
    if (value.empty()) fail("config key '" + key + "': empty value");
    if (!seen.insert(key).second) fail("duplicate config key '" + key + "'");
    apply_key(c, key, value);
  }
  validate(c);
  return c;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

}  // namespace geneo
