#include "wprobe/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "wprobe/errors.hpp"

namespace wprobe {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto p = s.find(sep, start);
    out.push_back(trim(s.substr(start, p == std::string_view::npos ? p : p - start)));
    if (p == std::string_view::npos) return out;
    start = p + 1;
  }
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class LineParser {
 public:
  LineParser(std::size_t line, std::string key) : line_(line), key_(std::move(key)) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("cli_io: config line " + std::to_string(line_) + " (" + key_ + "): " + what);
  }

  double number(const std::string& s) const {
    if (s.empty()) fail("missing number");
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) fail("'" + s + "' is not a number");
    if (!std::isfinite(v)) fail("'" + s + "' is not finite");
    return v;
  }

  std::uint64_t unsigned_int(const std::string& s) const {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
      fail("'" + s + "' is not a non-negative integer");
    }
    errno = 0;
    const unsigned long long v = std::strtoull(s.c_str(), nullptr, 10);
    if (errno == ERANGE) fail("'" + s + "' is out of range");
    return v;
  }

  std::vector<double> numbers(const std::string& s) const {
    std::vector<double> out;
    for (const auto& item : split(s, ',')) out.push_back(number(item));
    return out;
  }

  bool flag(const std::string& s) const {
    if (s == "on" || s == "true") return true;
    if (s == "off" || s == "false") return false;
    fail("expected on or off, got '" + s + "'");
  }

 private:
  std::size_t line_;
  std::string key_;
};

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig c;
  c.terms.clear();
  std::set<std::string> seen;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(std::string_view(raw).substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("cli_io: config line " + std::to_string(line_no) +
                        ": expected 'key = value'");
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    const LineParser p(line_no, key);
    if (key != "term" && !seen.insert(key).second) p.fail("key given twice");

    if (key == "term") {
      const auto f = split(value, ';');
      if (f.size() != 4) p.fail("expected 'order ; c(x) ; h(-1) ; h(+1)'");
      TermSpec t;
      t.order = p.number(f[0]);
      t.c = Expression::parse(f[1]);
      t.h_minus = p.number(f[2]);
      t.h_plus = p.number(f[3]);
      c.terms.push_back(std::move(t));
    } else if (key == "beta") {
      c.beta = p.number(value);
    } else if (key == "x0") {
      c.x0 = p.numbers(value);
    } else if (key == "xi0") {
      c.xi0 = p.number(value);
    } else if (key == "lambda") {
      c.lambda.clear();
      for (const auto& item : split(value, ',')) {
        if (item == "auto") {
          c.lambda.emplace_back(std::nullopt);
        } else {
          c.lambda.emplace_back(p.number(item));
        }
      }
    } else if (key == "margin") {
      c.margin = p.number(value);
    } else if (key == "sharpness") {
      c.sharpness = p.number(value);
    } else if (key == "noise") {
      c.noise = p.flag(value);
    } else if (key == "subtract") {
      if (value == "oracle") {
        c.subtract = {SubtractMode::Oracle};
      } else if (value == "self") {
        c.subtract = {SubtractMode::Self};
      } else if (value == "both") {
        c.subtract = {SubtractMode::Oracle, SubtractMode::Self};
      } else {
        p.fail("expected oracle, self or both");
      }
    } else if (key == "N") {
      c.N = p.number(value);
    } else if (key == "N_grid") {
      c.N_grid = p.numbers(value);
    } else if (key == "T_grid") {
      c.T_grid = p.numbers(value);
    } else if (key == "K") {
      c.K = p.unsigned_int(value);
    } else if (key == "trials") {
      c.trials = p.unsigned_int(value);
    } else if (key == "seed") {
      c.seed = p.unsigned_int(value);
    } else if (key == "out") {
      if (value.empty()) p.fail("empty output directory");
      c.out = value;
    } else if (key == "j") {
      c.j = p.unsigned_int(value);
    } else if (key == "epsilon") {
      c.epsilon = p.number(value);
    } else if (key == "delta") {
      c.delta = p.number(value);
    } else if (key == "alert") {
      c.alert = p.number(value);
    } else if (key == "noise.target") {
      if (value == "plain") {
        c.noise_target = VarianceTarget::Plain;
      } else if (value == "averaged") {
        c.noise_target = VarianceTarget::Averaged;
      } else {
        p.fail("expected plain or averaged");
      }
    } else if (key == "noise.m") {
      c.noise_m = p.number(value);
    } else if (key == "noise.lambda") {
      c.noise_lambda = p.number(value);
    } else if (key == "noise.amplitude") {
      c.noise_amplitude = p.number(value);
    } else if (key == "noise.c") {
      if (value == "auto") {
        c.noise_c.reset();
      } else {
        c.noise_c = p.number(value);
      }
    } else {
      p.fail("unknown key");
    }
  }
  if (c.terms.empty()) throw ConfigError("cli_io: config needs at least one 'term' line");
  if (c.x0.empty()) throw ConfigError("cli_io: x0 list is empty");
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cli_io: cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream o;
  const auto list = [](const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
    return s;
  };
  for (const auto& t : c.terms) {
    o << "term = " << fmt(t.order) << " ; " << t.c.text() << " ; " << fmt(t.h_minus) << " ; "
      << fmt(t.h_plus) << "\n";
  }
  o << "beta = " << fmt(c.beta) << "\n";
  o << "x0 = " << list(c.x0) << "\n";
  o << "xi0 = " << fmt(c.xi0) << "\n";
  if (!c.lambda.empty()) {
    o << "lambda = ";
    for (std::size_t i = 0; i < c.lambda.size(); ++i) {
      o << (i ? ", " : "") << (c.lambda[i] ? fmt(*c.lambda[i]) : std::string("auto"));
    }
    o << "\n";
  }
  o << "margin = " << fmt(c.margin) << "\n";
  o << "sharpness = " << fmt(c.sharpness) << "\n";
  o << "noise = " << (c.noise ? "on" : "off") << "\n";
  o << "subtract = "
    << (c.subtract.size() == 2 ? "both"
                               : (c.subtract.at(0) == SubtractMode::Oracle ? "oracle" : "self"))
    << "\n";
  o << "N = " << fmt(c.N) << "\n";
  o << "N_grid = " << list(c.N_grid) << "\n";
  o << "T_grid = " << list(c.T_grid) << "\n";
  o << "K = " << c.K << "\n";
  o << "trials = " << c.trials << "\n";
  o << "seed = " << c.seed << "\n";
  o << "out = " << c.out << "\n";
  o << "j = " << c.j << "\n";
  o << "epsilon = " << fmt(c.epsilon) << "\n";
  o << "delta = " << fmt(c.delta) << "\n";
  if (c.alert) o << "alert = " << fmt(*c.alert) << "\n";
  o << "noise.target = " << (c.noise_target == VarianceTarget::Plain ? "plain" : "averaged")
    << "\n";
  o << "noise.m = " << fmt(c.noise_m) << "\n";
  o << "noise.lambda = " << fmt(c.noise_lambda) << "\n";
  o << "noise.amplitude = " << fmt(c.noise_amplitude) << "\n";
  o << "noise.c = " << (c.noise_c ? fmt(*c.noise_c) : std::string("auto")) << "\n";
  return o.str();
}

std::string config_hash(const ExperimentConfig& c) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char ch : serialize_config(c)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Observable make_observable(const ExperimentConfig& c) {
  std::vector<HomogeneousTerm> terms;
  for (const auto& t : c.terms) {
    HomogeneousTerm h;
    h.order = t.order;
    h.coefficient = ProductCoefficient{t.c, t.h_minus, t.h_plus};
    terms.push_back(std::move(h));
  }
  return Observable{SymbolExpansion(std::move(terms))};
}

namespace {
const double t_over_spacing = 1.0 / default_spacing(1.0);
}  // namespace

MeasurementModel make_model(const ExperimentConfig& c) {
  MeasurementModel m;
  m.observable = make_observable(c);
  m.beta = c.beta;
  m.family.x0 = c.x0.front();
  m.family.xi0 = c.xi0;
  m.family.profile = make_profile(c.sharpness);
  m.family.validate();
  // Samples at spacing t/128 make f_t periodic in t (x - x0) with period 256 pi;
  // the quadrature grid plus the tail of the next image must fit in one period.
  const double period = 2.0 * std::numbers::pi * t_over_spacing;
  const double grid = m.family.profile->support_radius(1e-10);
  const double tail = m.family.profile->support_radius(1e-8);
  if (grid + tail > period) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "cli_io: sharpness %g gives a packet profile too wide for the frequency "
                  "lattice (radius %g); values near 1 to 4 work",
                  c.sharpness, grid);
    throw ConfigError(buf);
  }
  m.noisy = c.noise;
  return m;
}

OrderPlan make_plan(const ExperimentConfig& c) {
  std::vector<double> m_list;
  for (const auto& t : c.terms) m_list.push_back(t.order);
  return plan_orders(m_list, c.beta, c.margin, c.lambda);
}

NoiseSetting make_noise_setting(const ExperimentConfig& c) {
  NoiseSetting s;
  s.target = c.noise_target;
  s.beta = c.beta;
  s.m = c.noise_m;
  s.lambda = c.noise_lambda;
  s.K = c.K;
  s.x0 = c.x0.front();
  s.xi0 = c.xi0;
  return s;
}

}  // namespace wprobe
