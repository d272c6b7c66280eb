#include "thinfilm/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "thinfilm/error.hpp"

namespace thinfilm {

namespace {

std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string &s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double to_double(const std::string &key, const std::string &v) {
  double out = 0.0;
  const auto *end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, out);
  if (v.empty() || res.ec != std::errc() || res.ptr != end)
    throw ConfigError("scenario: key '" + key + "' expects a number, got '" + v + "'");
  return out;
}

int to_int(const std::string &key, const std::string &v) {
  int out = 0;
  const auto *end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, out);
  if (v.empty() || res.ec != std::errc() || res.ptr != end)
    throw ConfigError("scenario: key '" + key + "' expects an integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string &key, const std::string &v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError("scenario: key '" + key + "' expects true or false, got '" + v + "'");
}

Point to_point(const std::string &key, const std::string &v) {
  const auto parts = split(v, ',');
  if (parts.empty() || parts.size() > static_cast<std::size_t>(kMaxDim))
    throw ConfigError("scenario: key '" + key + "' expects 1 to 3 coordinates");
  Point p{};
  for (std::size_t a = 0; a < parts.size(); ++a) p[a] = to_double(key, parts[a]);
  return p;
}

std::string point_text(const Point &p, int dim) {
  std::string out;
  for (int a = 0; a < dim; ++a) out += (a ? ", " : "") + fmt(p[a]);
  return out;
}

const std::map<std::string, InitialKind> kKinds{{"gaussian", InitialKind::gaussian},
                                                {"gaussian_mixture", InitialKind::gaussian_mixture},
                                                {"uniform", InitialKind::uniform},
                                                {"from_file", InitialKind::from_file}};

std::string kind_text(InitialKind k) {
  for (const auto &[name, v] : kKinds)
    if (v == k) return name;
  return "gaussian";
}

// weight / center / variance, components separated by ';'
std::vector<MixtureComponent> to_components(const std::string &key, const std::string &v) {
  std::vector<MixtureComponent> out;
  if (v.empty()) return out;
  for (const auto &item : split(v, ';')) {
    const auto f = split(item, '/');
    if (f.size() != 3) throw ConfigError("scenario: key '" + key + "' expects weight/center/variance items");
    out.push_back({to_double(key, f[0]), to_point(key, f[1]), to_double(key, f[2])});
  }
  return out;
}

std::string components_text(const std::vector<MixtureComponent> &cs, int dim) {
  std::string out;
  for (std::size_t i = 0; i < cs.size(); ++i)
    out += (i ? "; " : "") + fmt(cs[i].weight) + "/" + point_text(cs[i].center, dim) + "/" + fmt(cs[i].variance);
  return out;
}

std::string list_text(const std::vector<double> &v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + fmt(v[i]);
  return out;
}

std::string names_text(const std::vector<std::string> &v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + v[i];
  return out;
}

struct Field {
  const char *key;
  std::function<void(Scenario &, const std::string &)> set;
  std::function<std::string(const Scenario &)> get;
};

#define NUM(KEY, MEMBER)                                                                                               \
  Field {                                                                                                              \
    KEY, [](Scenario &s, const std::string &v) { s.MEMBER = to_double(KEY, v); },                                      \
        [](const Scenario &s) { return fmt(s.MEMBER); }                                                                \
  }
#define INT(KEY, MEMBER)                                                                                               \
  Field {                                                                                                              \
    KEY, [](Scenario &s, const std::string &v) { s.MEMBER = to_int(KEY, v); },                                         \
        [](const Scenario &s) { return std::to_string(s.MEMBER); }                                                     \
  }
#define BOOL(KEY, MEMBER)                                                                                              \
  Field {                                                                                                              \
    KEY, [](Scenario &s, const std::string &v) { s.MEMBER = to_bool(KEY, v); },                                        \
        [](const Scenario &s) { return std::string(s.MEMBER ? "true" : "false"); }                                     \
  }

const std::vector<Field> &fields() {
  static const std::vector<Field> table{
      {"name", [](Scenario &s, const std::string &v) { s.name = v; }, [](const Scenario &s) { return s.name; }},
      INT("dimension", dimension),
      INT("grid.n", grid_n),
      NUM("grid.L", grid_L),
      NUM("model.s", s),
      NUM("time.tau", tau),
      INT("time.num_steps", num_steps),
      {"initial.kind",
       [](Scenario &s, const std::string &v) {
         const auto it = kKinds.find(v);
         if (it == kKinds.end()) throw ConfigError("scenario: unknown initial.kind '" + v + "'");
         s.initial.kind = it->second;
       },
       [](const Scenario &s) { return kind_text(s.initial.kind); }},
      {"initial.center", [](Scenario &s, const std::string &v) { s.initial.center = to_point("initial.center", v); },
       [](const Scenario &s) { return point_text(s.initial.center, s.dimension); }},
      NUM("initial.variance", initial.variance),
      {"initial.components",
       [](Scenario &s, const std::string &v) { s.initial.components = to_components("initial.components", v); },
       [](const Scenario &s) { return components_text(s.initial.components, s.dimension); }},
      {"initial.path", [](Scenario &s, const std::string &v) { s.initial.path = v; },
       [](const Scenario &s) { return s.initial.path; }},
      BOOL("transport.allow_exact", allow_exact),
      NUM("transport.epsilon", sinkhorn.epsilon),
      INT("transport.max_iter", sinkhorn.max_iter),
      NUM("transport.tol", sinkhorn.tol),
      INT("inner.max_iters", inner.max_iters),
      NUM("inner.grad_tol", inner.grad_tol),
      NUM("inner.obj_tol", inner.obj_tol),
      NUM("inner.alpha0", inner.alpha0),
      NUM("inner.shrink", inner.shrink),
      NUM("inner.armijo", inner.armijo),
      NUM("inner.alpha_min", inner.alpha_min),
      NUM("inner.grow", inner.grow),
      BOOL("inner.stale_potential", stale_potential),
      {"checks", [](Scenario &s, const std::string &v) { s.checks = parse_name_list(v); },
       [](const Scenario &s) { return names_text(s.checks); }},
      INT("output.snapshot_stride", snapshot_stride),
      NUM("weak_form.amplitude", weak_form.amplitude),
      NUM("weak_form.inner_radius", weak_form.inner_radius),
      NUM("weak_form.outer_radius", weak_form.outer_radius),
      {"evi.center", [](Scenario &s, const std::string &v) { s.evi.center = to_point("evi.center", v); },
       [](const Scenario &s) { return point_text(s.evi.center, s.dimension); }},
      NUM("evi.variance", evi.variance),
      {"evi.times", [](Scenario &s, const std::string &v) { s.evi.times = parse_number_list(v); },
       [](const Scenario &s) { return list_text(s.evi.times); }},
  };
  return table;
}

#undef NUM
#undef INT
#undef BOOL

void validate(const Scenario &sc) {
  auto fail = [](const std::string &m) { throw ConfigError("scenario: " + m); };
  if (sc.dimension < 1 || sc.dimension > kMaxDim) fail("dimension must be 1, 2 or 3");
  if (sc.grid_n < 4 || sc.grid_n % 2 != 0) fail("grid.n must be even and >= 4");
  if (!(sc.grid_L > 0.0)) fail("grid.L must be positive");
  if (!(sc.s > 0.0)) fail("model.s must be positive");
  if (!(sc.tau > 0.0)) fail("time.tau must be positive");
  if (sc.num_steps < 0) fail("time.num_steps must be >= 0");
  if (sc.snapshot_stride < 1) fail("output.snapshot_stride must be >= 1");
  for (int a = sc.dimension; a < kMaxDim; ++a)
    if (sc.initial.center[a] != 0.0 || sc.evi.center[a] != 0.0) fail("center has more coordinates than dimension");
  switch (sc.initial.kind) {
  case InitialKind::gaussian:
    if (!(sc.initial.variance > 0.0)) fail("initial.variance must be positive");
    break;
  case InitialKind::gaussian_mixture:
    if (sc.initial.components.empty()) fail("initial.components must not be empty for gaussian_mixture");
    for (const auto &c : sc.initial.components)
      if (!(c.weight > 0.0) || !(c.variance > 0.0)) fail("mixture weights and variances must be positive");
    break;
  case InitialKind::from_file:
    if (sc.initial.path.empty()) fail("initial.path is required for from_file");
    if (!std::filesystem::exists(sc.initial.path)) fail("initial datum file not found: " + sc.initial.path);
    break;
  case InitialKind::uniform:
    break;
  }
  if (!(sc.evi.variance > 0.0)) fail("evi.variance must be positive");
  if (!(sc.weak_form.outer_radius > sc.weak_form.inner_radius && sc.weak_form.inner_radius >= 0.0))
    fail("weak_form radii need 0 <= inner < outer");
  try {
    sc.jko_config().validate();
  } catch (const DomainError &e) {
    fail(e.what());
  }
}

} // namespace

JkoConfig Scenario::jko_config() const {
  JkoConfig c;
  c.s = s;
  c.tau = tau;
  c.inner = inner;
  c.transport.allow_exact = allow_exact;
  c.transport.sinkhorn = sinkhorn;
  c.grid = grid();
  c.stale_potential = stale_potential;
  return c;
}

std::vector<double> parse_number_list(const std::string &text) {
  std::vector<double> out;
  if (trim(text).empty()) return out;
  for (const auto &p : split(text, ',')) out.push_back(to_double("list", p));
  return out;
}

std::vector<std::string> parse_name_list(const std::string &text) {
  std::vector<std::string> out;
  if (trim(text).empty()) return out;
  for (const auto &p : split(text, ','))
    if (!p.empty()) out.push_back(p);
  return out;
}

Scenario parse_scenario(const std::string &text, const std::filesystem::path &base_dir) {
  Scenario sc;
  std::map<std::string, const Field *> by_key;
  for (const auto &f : fields()) by_key[f.key] = &f;
  std::set<std::string> seen;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("scenario: line " + std::to_string(lineno) + " is not 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = by_key.find(key);
    if (it == by_key.end()) throw ConfigError("scenario: unknown key '" + key + "'");
    if (!seen.insert(key).second) throw ConfigError("scenario: duplicate key '" + key + "'");
    it->second->set(sc, value);
  }
  if (!sc.initial.path.empty()) {
    std::filesystem::path p(sc.initial.path);
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    sc.initial.path = p.lexically_normal().string();
  }
  validate(sc);
  return sc;
}

Scenario load_scenario(const std::filesystem::path &file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("scenario file not found: " + file.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), std::filesystem::absolute(file).parent_path());
}

std::string echo_scenario(const Scenario &sc) {
  std::string out;
  for (const auto &f : fields()) out += std::string(f.key) + " = " + f.get(sc) + "\n";
  return out;
}

GridDensity read_density_file(const std::filesystem::path &file, const PeriodicGrid &g) {
  std::ifstream in(file);
  if (!in) throw ConfigError("density file not found: " + file.string());
  std::vector<double> values;
  values.reserve(g.size());
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::vector<double> cols;
    double x;
    while (ls >> x) cols.push_back(x);
    if (!ls.eof()) throw ConfigError("density file " + file.string() + ": malformed row");
    if (cols.empty()) continue;
    if (cols.size() != static_cast<std::size_t>(g.dim()) + 1)
      throw ConfigError("density file " + file.string() + ": expected " + std::to_string(g.dim() + 1) + " columns");
    values.push_back(cols.back());
  }
  if (values.size() != g.size())
    throw ConfigError("density file " + file.string() + ": " + std::to_string(values.size()) + " rows for a grid of " +
                      std::to_string(g.size()) + " nodes");
  try {
    return GridDensity::normalized(g, std::move(values));
  } catch (const std::exception &e) {
    throw ConfigError("density file " + file.string() + ": " + e.what());
  }
}

GridDensity initial_density(const Scenario &sc) {
  const PeriodicGrid g = sc.grid();
  switch (sc.initial.kind) {
  case InitialKind::gaussian:
    return gaussian_density(g, sc.initial.center, sc.initial.variance);
  case InitialKind::gaussian_mixture:
    return gaussian_mixture_density(g, sc.initial.components);
  case InitialKind::uniform:
    return uniform_density(g);
  case InitialKind::from_file:
    return read_density_file(sc.initial.path, g);
  }
  throw ConfigError("scenario: unhandled initial kind");
}

} // namespace thinfilm
