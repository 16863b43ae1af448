#pragma once

#include <charconv>
#include <cmath>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include "okflow/interval.hpp"

namespace okflow {

// Lower bound of k^s as a double (exact while k^s < 2^53).
inline double pow_down(double k, int s) {
  double r = 1.0;
  for (int i = 0; i < s; ++i) r = rnd::mul_down(r, k);
  return r;
}

inline double pow_up(double k, int s) {
  double r = 1.0;
  for (int i = 0; i < s; ++i) r = rnd::mul_up(r, k);
  return r;
}

struct TailBound {
  double C = 0.0;
  int s = 6;
  int start = 1;
  int q = 1;  // the tail is supported on multiples of q

  // Upper bound of C / k^s.
  double at(long k) const {
    if (C == 0 || k % q != 0) return 0.0;
    return rnd::div_up(C, pow_down(static_cast<double>(k), s));
  }
  Interval interval_at(long k) const { return Interval::symmetric(at(k)); }

  friend bool operator==(const TailBound& a, const TailBound& b) {
    return a.C == b.C && a.s == b.s && a.start == b.start && a.q == b.q;
  }
};

// Affine coordinates on the first n modes: x = center + P y.
struct Frame {
  std::vector<double> center;
  IMatrix P;
  IMatrix Pinv;

  std::size_t dim() const { return center.size(); }
};

struct ScbSet {
  IVector finite;  // finite[k-1] encloses a_k, k = 1..M
  TailBound tail;
  std::shared_ptr<const Frame> frame;  // when set, finite[0..n) are frame coordinates

  ScbSet() = default;
  ScbSet(IVector f, TailBound t) : finite(std::move(f)), tail(t) {
    tail.start = static_cast<int>(finite.size()) + 1;
  }
  static ScbSet zero(std::size_t M, int s = 6) { return ScbSet(IVector(M), TailBound{0.0, s, 0, 1}); }

  std::size_t M() const { return finite.size(); }

  // Enclosure of a_k, k >= 1 (from the tail when k > M).
  Interval coeff(long k) const {
    if (k >= 1 && static_cast<std::size_t>(k) <= M()) return finite[k - 1];
    return tail.interval_at(k);
  }
};

inline IVector project(const ScbSet& set, std::size_t n) {
  if (n > set.M()) throw std::out_of_range("project: n exceeds explicit dimension");
  IVector r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = set.finite[i];
  return r;
}

inline double block_inf_norm(const ScbSet& set) {
  double r = 0.0;
  for (long k = set.tail.start; k < set.tail.start + set.tail.q; ++k) r = std::max(r, set.tail.at(k));
  for (const auto& x : set.finite) r = std::max(r, max_abs(x));
  return r;
}

struct SubsetResult {
  bool ok = true;
  long first_fail = 0;  // 0 when ok; otherwise the failing index (-1: tail comparison)
  std::string reason;
  explicit operator bool() const { return ok; }
};

inline SubsetResult is_subset(const ScbSet& inner, const ScbSet& outer) {
  auto fail = [](long k, std::string why) { return SubsetResult{false, k, std::move(why)}; };
  if (inner.frame != outer.frame) return fail(0, "frames differ");
  std::size_t Mi = inner.M(), Mo = outer.M();
  std::size_t Mmax = std::max(Mi, Mo);
  for (std::size_t k = 1; k <= Mmax; ++k) {
    Interval a = inner.coeff(static_cast<long>(k));
    Interval b = outer.coeff(static_cast<long>(k));
    if (!b.contains(a)) {
      std::ostringstream os;
      os << "a_" << k << " = " << a << " not inside " << b;
      return fail(static_cast<long>(k), os.str());
    }
  }
  const TailBound& ti = inner.tail;
  const TailBound& to = outer.tail;
  if (ti.C == 0) return {};
  long K = static_cast<long>(Mmax) + 1;
  if (ti.s < to.s) return fail(-1, "inner tail decays slower than outer tail");
  if (ti.q % to.q != 0) return fail(-1, "inner tail support not inside outer tail support");
  // C_i / k^{s_i} <= C_o / k^{s_o} for all k >= K iff C_i <= C_o K^{s_i - s_o}
  double rhs = rnd::mul_down(to.C, pow_down(static_cast<double>(K), ti.s - to.s));
  if (ti.C > rhs) {
    std::ostringstream os;
    os << "tail C=" << ti.C << " exceeds " << rhs;
    return fail(-1, os.str());
  }
  return {};
}

struct SymmetryClass {
  int q = 1;

  bool contains(const IVector& v) const {
    for (std::size_t i = 0; i < v.size(); ++i)
      if ((i + 1) % static_cast<std::size_t>(q) != 0 && !v[i].is_zero()) return false;
    return true;
  }
  bool contains(const ScbSet& s) const {
    return s.frame == nullptr && contains(s.finite) && (s.tail.C == 0 || s.tail.q % q == 0);
  }
  bool allows(long k) const { return k % q == 0; }
};

// Shortest decimal that parses back to the same double.
inline std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
  double x = 0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  auto res = std::from_chars(first, last, x);
  if (res.ec != std::errc() || res.ptr != last) throw std::invalid_argument("not a decimal number: '" + s + "'");
  return x;
}

inline void write_scb(std::ostream& os, const ScbSet& set) {
  os << "scb M=" << set.M() << " s=" << set.tail.s << " C=" << format_double(set.tail.C)
     << " start=" << set.tail.start;
  if (set.tail.q != 1) os << " q=" << set.tail.q;
  os << '\n';
  for (std::size_t k = 1; k <= set.M(); ++k) {
    const Interval& x = set.finite[k - 1];
    os << k << ' ' << format_double(x.lo()) << ' ' << format_double(x.hi()) << '\n';
  }
}

inline std::string to_string(const ScbSet& set) {
  std::ostringstream os;
  write_scb(os, set);
  return os.str();
}

inline ScbSet read_scb(std::istream& is) {
  std::string line;
  while (std::getline(is, line) && line.empty()) {
  }
  std::istringstream hs(line);
  std::string tag;
  hs >> tag;
  if (tag != "scb") throw std::runtime_error("read_scb: missing 'scb' header");
  long M = -1, s = -1, start = -1, q = 1;
  std::optional<double> C;
  std::string field;
  while (hs >> field) {
    auto eq = field.find('=');
    if (eq == std::string::npos) throw std::runtime_error("read_scb: bad header field '" + field + "'");
    std::string key = field.substr(0, eq), val = field.substr(eq + 1);
    if (key == "M") M = std::stol(val);
    else if (key == "s") s = std::stol(val);
    else if (key == "C") C = parse_double(val);
    else if (key == "start") start = std::stol(val);
    else if (key == "q") q = std::stol(val);
    else throw std::runtime_error("read_scb: unknown header key '" + key + "'");
  }
  if (M < 0 || s < 0 || start < 0 || q < 1 || !C) throw std::runtime_error("read_scb: incomplete header");
  ScbSet set;
  set.finite = IVector(static_cast<std::size_t>(M));
  set.tail = TailBound{*C, static_cast<int>(s), static_cast<int>(start), static_cast<int>(q)};
  for (long k = 1; k <= M; ++k) {
    if (!std::getline(is, line)) throw std::runtime_error("read_scb: truncated body");
    std::istringstream ls(line);
    long idx;
    std::string lo, hi;
    if (!(ls >> idx >> lo >> hi) || idx != k) throw std::runtime_error("read_scb: bad line for k=" + std::to_string(k));
    set.finite[k - 1] = Interval(parse_double(lo), parse_double(hi));
  }
  return set;
}

inline ScbSet scb_from_string(const std::string& s) {
  std::istringstream is(s);
  return read_scb(is);
}

// Frame coordinates -> standard coordinates on the first n modes.
inline ScbSet to_standard(const ScbSet& set) {
  if (!set.frame) return set;
  const Frame& f = *set.frame;
  std::size_t n = f.dim();
  IVector y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = set.finite[i];
  IVector x = mat_vec(f.P, y);
  ScbSet out = set;
  out.frame = nullptr;
  for (std::size_t i = 0; i < n; ++i) out.finite[i] = Interval(f.center[i]) + x[i];
  return out;
}

// Standard coordinates -> frame coordinates; the input must be frame free.
inline ScbSet to_frame(const ScbSet& set, std::shared_ptr<const Frame> frame) {
  if (set.frame) throw std::invalid_argument("to_frame: input already carries a frame");
  const Frame& f = *frame;
  std::size_t n = f.dim();
  ScbSet out = set;
  if (out.M() < n) {
    std::size_t old = out.M();
    out.finite.resize(n);
    for (std::size_t k = old + 1; k <= n; ++k) out.finite[k - 1] = set.tail.interval_at(static_cast<long>(k));
    out.tail.start = static_cast<int>(n) + 1;
  }
  IVector d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = out.finite[i] - Interval(f.center[i]);
  IVector y = mat_vec(f.Pinv, d);
  for (std::size_t i = 0; i < n; ++i) out.finite[i] = y[i];
  out.frame = std::move(frame);
  return out;
}

}  // namespace okflow
