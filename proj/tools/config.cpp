#include "config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace monotomo::cli {

namespace pt = boost::property_tree;

namespace {

class CallParser {
 public:
  explicit CallParser(const std::string& text) : s_(text) {}

  Call parse() {
    Call c = call();
    skip_ws();
    if (pos_ != s_.size()) fail("trailing characters");
    return c;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    std::ostringstream os;
    os << what << " at column " << pos_ + 1 << " in '" << s_ << "'";
    throw ConfigError(os.str());
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < s_.size() && s_[pos_] == c;
  }

  void expect(char c) {
    if (!peek(c)) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string identifier() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '-' || s_[pos_] == '_')) {
      ++pos_;
    }
    if (start == pos_ || !std::isalpha(static_cast<unsigned char>(s_[start]))) fail("expected a name");
    return s_.substr(start, pos_ - start);
  }

  Call call() {
    Call c;
    c.name = identifier();
    expect('(');
    if (peek(')')) {
      ++pos_;
      return c;
    }
    for (;;) {
      c.args.push_back(arg());
      if (peek(',')) {
        ++pos_;
        continue;
      }
      expect(')');
      return c;
    }
  }

  Arg arg() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end");
    const char c = s_[pos_];
    if (c == '"') {
      const std::size_t end = s_.find('"', pos_ + 1);
      if (end == std::string::npos) fail("unterminated string");
      std::string v = s_.substr(pos_ + 1, end - pos_ - 1);
      pos_ = end + 1;
      return v;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) return call();
    const char* begin = s_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail("expected a number");
    pos_ += static_cast<std::size_t>(end - begin);
    return v;
  }

  std::string s_;
  std::size_t pos_ = 0;
};

double num(const Call& c, std::size_t k) {
  if (k >= c.args.size()) throw ConfigError(c.name + ": missing argument " + std::to_string(k + 1));
  if (const double* v = std::get_if<double>(&c.args[k])) return *v;
  throw ConfigError(c.name + ": argument " + std::to_string(k + 1) + " must be a number");
}

double num_or(const Call& c, std::size_t k, double fallback) { return k < c.args.size() ? num(c, k) : fallback; }

const Call& sub(const Call& c, std::size_t k) {
  if (k >= c.args.size()) throw ConfigError(c.name + ": missing argument " + std::to_string(k + 1));
  if (const Call* v = std::get_if<Call>(&c.args[k])) return *v;
  throw ConfigError(c.name + ": argument " + std::to_string(k + 1) + " must be an expression");
}

void arity(const Call& c, std::size_t lo, std::size_t hi) {
  if (c.args.size() < lo || c.args.size() > hi) {
    std::ostringstream os;
    os << c.name << ": expected " << lo;
    if (hi != lo) os << " to " << hi;
    os << " arguments, got " << c.args.size();
    throw ConfigError(os.str());
  }
}

MaterialLaw law_of(const Call& c, const std::filesystem::path& base) {
  try {
    if (c.name == "linear") return arity(c, 1, 1), MaterialLaw::linear(num(c, 0));
    if (c.name == "monomial") return arity(c, 1, 2), MaterialLaw::monomial(num(c, 0), num_or(c, 1, 1.0));
    if (c.name == "power-law-ej") {
      arity(c, 3, 4);
      return c.args.size() == 4 ? MaterialLaw::power_law_ej(num(c, 0), num(c, 1), num(c, 2), num(c, 3))
                                : MaterialLaw::power_law_ej(num(c, 0), num(c, 1), num(c, 2));
    }
    if (c.name == "bruggeman") return arity(c, 3, 3), MaterialLaw::bruggeman(num(c, 0), num(c, 1), law_of(sub(c, 2), base));
    if (c.name == "saturating") {
      arity(c, 2, 4);
      return MaterialLaw::saturating(num(c, 0), num(c, 1), num_or(c, 2, 0.1), num_or(c, 3, kMu0));
    }
    if (c.name == "superconducting-mixture") return arity(c, 0, 0), laws::superconducting_mixture();
    if (c.name == "steel-surrogate") return arity(c, 0, 1), laws::steel_surrogate(num_or(c, 0, 50.0));
    if (c.name == "tabulated") {
      arity(c, 1, 1);
      const std::string* file = std::get_if<std::string>(&c.args[0]);
      if (!file) throw ConfigError("tabulated: argument must be a quoted path");
      std::filesystem::path p(*file);
      if (p.is_relative()) p = base / p;
      std::ifstream in(p);
      if (!in) throw ConfigError("tabulated: cannot open " + p.string());
      return read_tabulated_csv(in);
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(c.name + ": " + e.what());
  }
  throw ConfigError("unknown law '" + c.name + "'");
}

Region region_of(const Call& c, double r) {
  try {
    if (c.name == "circle") return arity(c, 3, 3), Region::circle({num(c, 0) * r, num(c, 1) * r}, num(c, 2) * r);
    if (c.name == "ellipse") {
      arity(c, 4, 5);
      return Region::ellipse({num(c, 0) * r, num(c, 1) * r}, num(c, 2) * r, num(c, 3) * r, num_or(c, 4, 0.0));
    }
    if (c.name == "rect") {
      arity(c, 4, 4);
      return Region::rectangle({num(c, 0) * r, num(c, 1) * r}, {num(c, 2) * r, num(c, 3) * r});
    }
    if (c.name == "polygon") {
      if (c.args.size() < 6 || c.args.size() % 2) throw ConfigError("polygon: need at least 3 (x, y) pairs");
      std::vector<Vec2> v;
      for (std::size_t k = 0; k < c.args.size(); k += 2) v.emplace_back(num(c, k) * r, num(c, k + 1) * r);
      return Region::polygon(std::move(v));
    }
    if (c.name == "union") {
      std::vector<Region> parts;
      for (std::size_t k = 0; k < c.args.size(); ++k) parts.push_back(region_of(sub(c, k), r));
      return Region::union_of(std::move(parts));
    }
    if (c.name == "empty") return arity(c, 0, 0), Region::empty();
    if (c.name == "peanut") return arity(c, 3, 3), shapes::peanut({num(c, 0) * r, num(c, 1) * r}, num(c, 2) * r);
    if (c.name == "kite") return arity(c, 3, 3), shapes::kite({num(c, 0) * r, num(c, 1) * r}, num(c, 2) * r);
    if (c.name == "droplet") return arity(c, 3, 3), shapes::droplet({num(c, 0) * r, num(c, 1) * r}, num(c, 2) * r);
    if (c.name == "hollow") {
      arity(c, 4, 4);
      return shapes::hollow_circle({num(c, 0) * r, num(c, 1) * r}, num(c, 2) * r, num(c, 3) * r);
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(c.name + ": " + e.what());
  }
  throw ConfigError("unknown region '" + c.name + "'");
}

const std::map<std::string, std::set<std::string>> kKnownKeys = {
    {"scenario",
     {"physics", "radius", "rings", "measurement_rings", "background", "law", "lower", "upper", "regime",
      "transducer_k", "s_m", "s_check", "anomaly"}},
    {"grid", {"n", "roi"}},
    {"potentials", {"directions", "convex", "concave", "k_max", "alpha", "lambda_init", "eps_eig", "max_reading"}},
    {"noise", {"preset", "ranges", "seed"}},
    {"solver", {"tol", "max_iter", "max_halvings"}},
    {"output", {"dir"}},
};

template <class T>
T get(const pt::ptree& tree, const std::string& path, T fallback) {
  const auto node = tree.get_child_optional(pt::ptree::path_type(path, '.'));
  if (!node) return fallback;
  try {
    return node->get_value<T>();
  } catch (const pt::ptree_bad_data&) {
    throw ConfigError("bad value for " + path + ": '" + node->data() + "'");
  }
}

// Plain number, "mu0", or "<number>*mu0".
double get_quantity(const pt::ptree& tree, const std::string& path, double fallback) {
  std::string v = get<std::string>(tree, path, "");
  v.erase(std::remove_if(v.begin(), v.end(), [](unsigned char ch) { return std::isspace(ch); }), v.end());
  if (v.empty()) return fallback;
  double factor = 1.0;
  if (v.size() >= 3 && v.compare(v.size() - 3, 3, "mu0") == 0) {
    factor = kMu0;
    v.resize(v.size() - 3);
    if (v.empty()) return factor;
    if (v.back() != '*') throw ConfigError("bad value for " + path);
    v.pop_back();
  }
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || used == 0) throw ConfigError("bad value for " + path);
  return x * factor;
}

bool get_bool(const pt::ptree& tree, const std::string& path, bool fallback) {
  const auto v = get<std::string>(tree, path, fallback ? "true" : "false");
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("bad boolean for " + path + ": '" + v + "'");
}

std::vector<NoiseRange> parse_ranges(const std::string& text) {
  // "L:eta1:eta2, L:eta1:eta2, ..."
  std::vector<NoiseRange> out;
  std::istringstream all(text);
  std::string item;
  while (std::getline(all, item, ',')) {
    std::replace(item.begin(), item.end(), ':', ' ');
    std::istringstream row(item);
    NoiseRange r{};
    if (!(row >> r.range >> r.eta1 >> r.eta2)) throw ConfigError("noise.ranges: malformed entry '" + item + "'");
    std::string extra;
    if (row >> extra) throw ConfigError("noise.ranges: malformed entry '" + item + "'");
    out.push_back(r);
  }
  if (out.empty()) throw ConfigError("noise.ranges: no entries");
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (!(out[k].range > 0.0) || !(out[k].eta1 >= 0.0 && out[k].eta1 < 1.0) || !(out[k].eta2 >= 0.0)) {
      throw ConfigError("noise.ranges: need L > 0, 0 <= eta1 < 1, eta2 >= 0");
    }
    if (k && !(out[k].range > out[k - 1].range)) throw ConfigError("noise.ranges: ranges must ascend");
  }
  return out;
}

}  // namespace

Call parse_call(const std::string& text) { return CallParser(text).parse(); }

MaterialLaw parse_law(const std::string& text, const std::filesystem::path& base_dir) {
  return law_of(parse_call(text), base_dir);
}

Region parse_region(const std::string& text, double radius) { return region_of(parse_call(text), radius); }

RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("parse error: ") + e.what());
  }
  for (const auto& [section, body] : tree) {
    const auto known = kKnownKeys.find(section);
    if (known == kKnownKeys.end()) {
      if (body.empty() && !body.data().empty()) throw ConfigError("key '" + section + "' outside a section");
      throw ConfigError("unknown section [" + section + "]");
    }
    for (const auto& [key, value] : body) {
      if (!known->second.count(key)) throw ConfigError("unknown key '" + key + "' in [" + section + "]");
    }
  }

  RunConfig c;
  try {
    c.physics = physics_from_string(get<std::string>(tree, "scenario.physics", "steady-currents"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  c.radius = get(tree, "scenario.radius", c.radius);
  c.rings = get(tree, "scenario.rings", c.rings);
  c.measurement_rings = get(tree, "scenario.measurement_rings", c.measurement_rings);
  c.background = get_quantity(tree, "scenario.background", c.background);
  c.law_text = get(tree, "scenario.law", c.law_text);
  c.law = parse_law(c.law_text, base_dir);
  c.bounds.lower = get_quantity(tree, "scenario.lower", c.bounds.lower);
  c.bounds.upper = get_quantity(tree, "scenario.upper", c.bounds.upper);
  const auto regime = get<std::string>(tree, "scenario.regime", "separated");
  if (regime == "separated") {
    c.regime = Regime::Separated;
  } else if (regime == "intersecting") {
    c.regime = Regime::Intersecting;
  } else {
    throw ConfigError("scenario.regime must be 'separated' or 'intersecting'");
  }
  c.transducer_k = get(tree, "scenario.transducer_k", c.transducer_k);
  c.s_m = get(tree, "scenario.s_m", c.s_m);
  c.s_check = get(tree, "scenario.s_check", c.s_check);
  if (!(c.radius > 0.0)) throw ConfigError("scenario.radius must be positive");
  if (c.rings < 1) throw ConfigError("scenario.rings must be positive");
  if (c.measurement_rings < 0) throw ConfigError("scenario.measurement_rings must be >= 0");
  c.anomaly_text = get(tree, "scenario.anomaly", c.anomaly_text);
  c.anomaly = parse_region(c.anomaly_text, c.radius);

  c.grid.n = get(tree, "grid.n", c.grid.n);
  c.grid.roi_fraction = get(tree, "grid.roi", c.grid.roi_fraction);
  if (c.grid.n < 1) throw ConfigError("grid.n must be positive");
  if (!(c.grid.roi_fraction > 0.0 && c.grid.roi_fraction < 1.0)) throw ConfigError("grid.roi must lie in (0, 1)");

  auto& p = c.potentials;
  p.directions = get(tree, "potentials.directions", p.directions);
  p.convex = get_bool(tree, "potentials.convex", p.convex);
  p.concave = get_bool(tree, "potentials.concave", p.concave);
  p.k_max = get(tree, "potentials.k_max", p.k_max);
  p.alpha = get(tree, "potentials.alpha", p.alpha);
  p.lambda_init = get(tree, "potentials.lambda_init", p.lambda_init);
  p.eps_eig = get(tree, "potentials.eps_eig", p.eps_eig);
  if (p.directions < 1) throw ConfigError("potentials.directions must be positive");
  if (p.k_max < 1) throw ConfigError("potentials.k_max must be positive");
  if (!(p.alpha > 0.0 && p.alpha < 1.0)) throw ConfigError("potentials.alpha must lie in (0, 1)");
  if (!(p.lambda_init > 0.0)) throw ConfigError("potentials.lambda_init must be positive");
  if (!(p.eps_eig >= 0.0)) throw ConfigError("potentials.eps_eig must be >= 0");

  c.solver.tol = get(tree, "solver.tol", c.solver.tol);
  c.solver.max_iter = get(tree, "solver.max_iter", c.solver.max_iter);
  c.solver.max_halvings = get(tree, "solver.max_halvings", c.solver.max_halvings);
  if (!(c.solver.tol > 0.0) || c.solver.max_iter < 1 || c.solver.max_halvings < 0) {
    throw ConfigError("solver: need tol > 0, max_iter >= 1, max_halvings >= 0");
  }

  c.noise_preset = get<std::string>(tree, "noise.preset", c.noise_preset);
  const auto seed = get<std::uint64_t>(tree, "noise.seed", 0);
  const auto ranges = get<std::string>(tree, "noise.ranges", "");
  if (c.noise_preset == "keithley-2002") {
    c.noise = NoiseModel::keithley_2002(seed);
  } else if (c.noise_preset == "noiseless") {
    c.noise = NoiseModel::noiseless();
    c.noise.seed = seed;
  } else if (c.noise_preset == "custom") {
    c.noise = {parse_ranges(ranges), seed};
  } else {
    throw ConfigError("noise.preset must be 'keithley-2002', 'noiseless' or 'custom'");
  }
  if (!ranges.empty() && c.noise_preset != "custom") throw ConfigError("noise.ranges needs preset = custom");

  const double top = c.noise.max_range();
  c.max_reading = get(tree, "potentials.max_reading", std::isfinite(top) ? top : 0.0);

  c.out = get(tree, "output.dir", c.out);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  return parse_config(in, path.parent_path());
}

Scenario RunConfig::build_scenario() const {
  Scenario s;
  try {
    s.disc = std::make_shared<Discretization>(build_disk_mesh(radius, rings));
    if (measurement_rings > 0) {
      s.measurement_disc = std::make_shared<Discretization>(build_disk_mesh(radius, measurement_rings));
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("mesh: ") + e.what());
  }
  s.background = background;
  s.law = law;
  s.bounds = bounds;
  s.anomaly = anomaly;
  s.physics = physics;
  s.transducer_k = transducer_k;
  s.regime = regime;
  s.s_m = s_m;
  s.s_check = s_check;
  const auto problems = validate_scenario(s);
  if (!problems.empty()) {
    std::string msg = "invalid scenario:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw ConfigError(msg);
  }
  return s;
}

PipelineOptions RunConfig::pipeline_options(int jobs) const {
  PipelineOptions o;
  o.grid = grid;
  o.potentials = potentials;
  o.max_reading = max_reading;
  o.jobs = jobs;
  o.solver = solver;
  return o;
}

std::function<double(double)> parse_trace(const std::string& text) {
  if (text == "zero") return [](double) { return 0.0; };
  const auto colon = text.find(':');
  if (colon != std::string::npos) {
    const std::string kind = text.substr(0, colon);
    int n = 0;
    try {
      std::size_t used = 0;
      n = std::stoi(text.substr(colon + 1), &used);
      if (used != text.size() - colon - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ConfigError("bad trace '" + text + "'");
    }
    if (n >= 1 && kind == "cos") return [n](double t) { return std::cos(n * t); };
    if (n >= 1 && kind == "sin") return [n](double t) { return std::sin(n * t); };
  }
  throw ConfigError("bad trace '" + text + "' (expected cos:n, sin:n or zero)");
}

}  // namespace monotomo::cli
