#pragma once
// Exact-rational oracles shared by the tests.
#include <gmpxx.h>

#include <cstddef>
#include <random>
#include <vector>

#include "okflow/interval.hpp"

namespace oracle {

using okflow::Interval;

inline mpq_class q(double x) { return mpq_class(x); }

inline bool contains(const Interval& x, const mpq_class& v) { return q(x.lo()) <= v && v <= q(x.hi()); }

// pi to 36 digits, bracketed
inline mpq_class pi_lo() { return mpq_class("314159265358979323846264338327950288/100000000000000000000000000000000000"); }
inline mpq_class pi_hi() { return mpq_class("314159265358979323846264338327950289/100000000000000000000000000000000000"); }

// (a * a * a)_k for a symmetric sequence a_{-j} = a_j given on 0..m.
inline mpq_class cube_at(const std::vector<mpq_class>& a, long k) {
  long m = static_cast<long>(a.size()) - 1;
  auto at = [&](long j) -> const mpq_class& { return a[static_cast<std::size_t>(j < 0 ? -j : j)]; };
  mpq_class s = 0;
  for (long j1 = -m; j1 <= m; ++j1)
    for (long j2 = -m; j2 <= m; ++j2) {
      long j3 = k - j1 - j2;
      if (j3 < -m || j3 > m) continue;
      s += at(j1) * at(j2) * at(j3);
    }
  return s;
}

// Order-p coefficient of the product u v w of three series, each given per order on 0..m.
using Series = std::vector<std::vector<mpq_class>>;  // [order][index]

inline mpq_class triple_at(const Series& u, const Series& v, const Series& w, std::size_t p, long k) {
  long m = static_cast<long>(u[0].size()) - 1;
  auto at = [&](const Series& s, std::size_t r, long j) -> const mpq_class& {
    return s[r][static_cast<std::size_t>(j < 0 ? -j : j)];
  };
  mpq_class s = 0;
  for (std::size_t r1 = 0; r1 <= p; ++r1)
    for (std::size_t r2 = 0; r1 + r2 <= p; ++r2) {
      std::size_t r3 = p - r1 - r2;
      for (long j1 = -m; j1 <= m; ++j1)
        for (long j2 = -m; j2 <= m; ++j2) {
          long j3 = k - j1 - j2;
          if (j3 < -m || j3 > m) continue;
          s += at(u, r1, j1) * at(v, r2, j2) * at(w, r3, j3);
        }
    }
  return s;
}

}  // namespace oracle
