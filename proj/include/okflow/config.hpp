#pragma once

#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "okflow/blocks.hpp"
#include "okflow/fourier_scb.hpp"
#include "okflow/integrator.hpp"
#include "okflow/okvf.hpp"

namespace okflow {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat "key = value" configuration of one proof case.
struct Config {
  std::string name = "local";
  // parameters of the length-L problem
  SymScalar lambda{4, 0};
  SymScalar sigma{4, -2};
  SymScalar L{2, 1};

  // integration
  double h = 0.002;
  long steps = 1510;
  double T = 3.02;
  int order = 16;
  long m = 15;
  long fft_nodes = 32;
  int fft_padding = 2;
  std::string backend = "fft";
  long warmup_steps = 1000;
  bool early_stop = true;

  // unstable block
  int elongation = 3;
  double halfwidth = 0.075;
  int face_sign = 1;
  double thin = 1e-16;
  double other_unstable = 1e-12;
  double mid_floor = 1e-20;
  long thin_modes = 15;
  long unstable_M = 75;
  double width_margin = 1.1;
  double tail_factor = 2.0;

  // stable block
  std::string fixed_point = "fixedPoint-local.in";
  long center_modes = 80;
  long stable_M = 250;
  long frame_dim = 39;
  std::vector<double> stable_radii;
  double stable_radius_scale = 1.0;
  double stable_mid_B = 1e-2;
  double stable_tail_C = 1e-2;

  // output
  std::string output_dir = "out";
  int verbosity = 1;
  bool gzip = false;

  std::string base_dir;  // directory of the config file, for relative paths

  OkParams params() const {
    // lambda0 = lambda L^2, sigma0 = sigma L^2 on the unit interval
    auto times_L2 = [&](const SymScalar& x) {
      Interval c = Interval(x.coef) * sqr(Interval(L.coef));
      if (!c.is_point()) throw ConfigError("config: lambda L^2 or sigma L^2 is not exactly representable");
      return SymScalar{c.lo(), x.pi_pow + 2 * L.pi_pow};
    };
    return rescale_params(times_L2(lambda), times_L2(sigma), L);
  }

  IntegratorConfig integrator() const {
    IntegratorConfig c;
    c.h = h;
    c.order = order;
    c.m = static_cast<std::size_t>(m);
    c.backend = backend;
    c.fft_nodes = static_cast<std::size_t>(fft_nodes);
    return c;
  }

  UnstableBlockSpec unstable_spec() const {
    UnstableBlockSpec s;
    s.q = elongation;
    s.halfwidth = halfwidth;
    s.thin = thin;
    s.other_unstable = other_unstable;
    s.mid = mid_floor;
    s.thin_modes = static_cast<std::size_t>(thin_modes);
    s.M = static_cast<std::size_t>(unstable_M);
    s.width_margin = width_margin;
    s.tail_factor = tail_factor;
    return s;
  }

  StableBlockSpec stable_spec() const {
    StableBlockSpec s;
    s.frame_dim = static_cast<std::size_t>(frame_dim);
    s.radii = stable_radii;
    s.radius_scale = stable_radius_scale;
    s.mid_B = stable_mid_B;
    s.tail_C = stable_tail_C;
    s.M = static_cast<std::size_t>(stable_M);
    s.width_margin = width_margin;
    return s;
  }

  std::string resolve(const std::string& path) const {
    if (path.empty() || path[0] == '/' || base_dir.empty()) return path;
    return base_dir + "/" + path;
  }

  friend bool operator==(const Config& a, const Config& b);
};

namespace detail {

// Decimal string as mantissa * 10^exp, exact for up to 18 significant digits.
struct Decimal {
  std::int64_t mant = 0;
  int exp = 0;

  static Decimal parse(const std::string& s) {
    Decimal d;
    std::size_t i = 0;
    bool neg = false;
    if (i < s.size() && (s[i] == '-' || s[i] == '+')) neg = s[i++] == '-';
    bool dot = false, any = false;
    int digits = 0;
    for (; i < s.size(); ++i) {
      char c = s[i];
      if (c == '.' && !dot) {
        dot = true;
      } else if (c >= '0' && c <= '9') {
        any = true;
        if (d.mant == 0 && c == '0') {
          if (dot) --d.exp;
          continue;
        }
        if (++digits > 18) throw ConfigError("decimal '" + s + "' has too many digits");
        d.mant = d.mant * 10 + (c - '0');
        if (dot) --d.exp;
      } else if (c == 'e' || c == 'E') {
        d.exp += std::stoi(s.substr(i + 1));
        break;
      } else {
        throw ConfigError("malformed decimal '" + s + "'");
      }
    }
    if (!any) throw ConfigError("malformed decimal '" + s + "'");
    if (neg) d.mant = -d.mant;
    d.normalize();
    return d;
  }
  void normalize() {
    if (mant == 0) {
      exp = 0;
      return;
    }
    while (mant % 10 == 0) {
      mant /= 10;
      ++exp;
    }
  }
  friend bool operator==(const Decimal& a, const Decimal& b) { return a.mant == b.mant && a.exp == b.exp; }
};

inline std::string trim(const std::string& s) {
  auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("expected a boolean, got '" + v + "'");
}

inline std::string format_list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_double(v[i]);
  return s;
}

inline std::vector<double> parse_list(const std::string& v) {
  std::vector<double> r;
  std::string item;
  std::istringstream is(v);
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (!item.empty()) r.push_back(parse_double(item));
  }
  return r;
}

}  // namespace detail

// Visits every key with a getter (to text) and a setter (from text).
template <class F>
void for_each_config_field(Config& c, F&& f) {
  auto num = [&](const char* key, auto& field) {
    using T = std::decay_t<decltype(field)>;
    f(key, [&field] {
      if constexpr (std::is_floating_point_v<T>) return format_double(field);
      else return std::to_string(field);
    }, [&field](const std::string& v) {
      if constexpr (std::is_floating_point_v<T>) field = parse_double(v);
      else {
        std::size_t used = 0;
        long x = std::stol(v, &used);
        if (used != v.size()) throw ConfigError("expected an integer, got '" + v + "'");
        field = static_cast<T>(x);
      }
    });
  };
  auto str = [&](const char* key, std::string& field) {
    f(key, [&field] { return field; }, [&field](const std::string& v) { field = v; });
  };
  auto sym = [&](const char* key, SymScalar& field) {
    f(key, [&field] { return field.str(); }, [&field](const std::string& v) { field = SymScalar::parse(v); });
  };
  auto flag = [&](const char* key, bool& field) {
    f(key, [&field] { return std::string(field ? "true" : "false"); },
      [&field](const std::string& v) { field = detail::parse_bool(v); });
  };
  str("case", c.name);
  sym("lambda", c.lambda);
  sym("sigma", c.sigma);
  sym("L", c.L);
  num("h", c.h);
  num("steps", c.steps);
  num("T", c.T);
  num("order", c.order);
  num("m", c.m);
  num("fft_nodes", c.fft_nodes);
  num("fft_padding", c.fft_padding);
  str("backend", c.backend);
  num("warmup_steps", c.warmup_steps);
  flag("early_stop", c.early_stop);
  num("elongation", c.elongation);
  num("halfwidth", c.halfwidth);
  num("face_sign", c.face_sign);
  num("thin", c.thin);
  num("other_unstable", c.other_unstable);
  num("mid_floor", c.mid_floor);
  num("thin_modes", c.thin_modes);
  num("unstable_M", c.unstable_M);
  num("width_margin", c.width_margin);
  num("tail_factor", c.tail_factor);
  str("fixed_point", c.fixed_point);
  num("center_modes", c.center_modes);
  num("stable_M", c.stable_M);
  num("frame_dim", c.frame_dim);
  f("stable_radii", [&c] { return detail::format_list(c.stable_radii); },
    [&c](const std::string& v) { c.stable_radii = detail::parse_list(v); });
  num("stable_radius_scale", c.stable_radius_scale);
  num("stable_mid_B", c.stable_mid_B);
  num("stable_tail_C", c.stable_tail_C);
  str("output_dir", c.output_dir);
  num("verbosity", c.verbosity);
  flag("gzip", c.gzip);
}

inline void validate(const Config& c) {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("config: " + what);
  };
  need(c.name == "local" || c.name == "global", "case must be local or global");
  need(c.lambda.coef > 0 && c.sigma.coef >= 0 && c.L.coef > 0, "lambda, L must be positive and sigma nonnegative");
  need(c.h > 0, "h must be positive");
  need(c.steps >= 0, "steps must be nonnegative");
  need(c.order >= 1 && c.order <= 40, "order must be in 1..40");
  need(c.m >= 1, "m must be positive");
  need(c.fft_padding == 2 || c.fft_padding == 3, "fft_padding must be 2 or 3");
  need(c.fft_nodes >= static_cast<long>(fft_size_for(static_cast<std::size_t>(c.m), c.fft_padding)) &&
           (c.fft_nodes & (c.fft_nodes - 1)) == 0,
       "fft_nodes must be a power of two of at least the padded size");
  need(c.backend == "fft" || c.backend == "direct", "backend must be fft or direct");
  need(c.elongation == 2 || c.elongation == 3, "elongation must be 2 or 3");
  need(c.face_sign == 1 || c.face_sign == -1, "face_sign must be 1 or -1");
  need(c.halfwidth > 0 && c.halfwidth > c.thin, "halfwidth must exceed thin");
  need(c.thin >= 0 && c.other_unstable >= 0 && c.mid_floor >= 0, "widths must be nonnegative");
  need(c.unstable_M > c.m && c.unstable_M >= c.frame_dim, "unstable_M must exceed m and cover frame_dim");
  need(c.frame_dim >= 1 && c.frame_dim <= c.stable_M, "frame_dim must be in 1..stable_M");
  need(static_cast<long>(c.stable_radii.size()) == c.frame_dim, "stable_radii needs frame_dim entries");
  need(c.center_modes >= c.frame_dim, "center_modes must cover frame_dim");
  need(c.width_margin > 1 && c.tail_factor > 1, "width_margin and tail_factor must exceed 1");
  // T = steps h as decimals
  detail::Decimal dh = detail::Decimal::parse(format_double(c.h));
  detail::Decimal dT = detail::Decimal::parse(format_double(c.T));
  detail::Decimal prod{dh.mant * c.steps, dh.exp};
  prod.normalize();
  need(prod == dT, "T must equal steps * h exactly");
}

inline Config parse_config(std::istream& is, const std::string& base_dir = "") {
  Config c;
  c.stable_radii.clear();
  std::map<std::string, std::function<void(const std::string&)>> setters;
  for_each_config_field(c, [&](const char* key, auto, auto set) { setters[key] = set; });
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = detail::trim(line.substr(0, eq)), val = detail::trim(line.substr(eq + 1));
    auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    try {
      it->second(val);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError("config line " + std::to_string(lineno) + ": bad value for '" + key + "'");
    }
  }
  c.base_dir = base_dir;
  validate(c);
  return c;
}

inline Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  auto slash = path.find_last_of('/');
  return parse_config(in, slash == std::string::npos ? "." : path.substr(0, slash));
}

inline void write_config(std::ostream& os, const Config& c0) {
  Config c = c0;
  for_each_config_field(c, [&](const char* key, auto get, auto) { os << key << " = " << get() << '\n'; });
}

inline std::string to_string(const Config& c) {
  std::ostringstream os;
  write_config(os, c);
  return os.str();
}

inline bool operator==(const Config& a, const Config& b) { return to_string(a) == to_string(b); }

}  // namespace okflow
