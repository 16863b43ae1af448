#pragma once

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "okflow/fourier_scb.hpp"
#include "okflow/interval.hpp"

namespace okflow {

// A real number of the form coef * pi^pi_pow, so that 2pi or 4/pi^2 stay exact.
struct SymScalar {
  double coef = 0.0;
  int pi_pow = 0;

  Interval value() const {
    Interval r(coef);
    Interval pi = pi_interval();
    for (int i = 0; i < pi_pow; ++i) r = r * pi;
    for (int i = 0; i < -pi_pow; ++i) r = r / pi;
    return r;
  }

  std::string str() const {
    std::string c = format_double(coef);
    switch (pi_pow) {
      case 0: return c;
      case 1: return c + "pi";
      case 2: return c + "pi^2";
      case -1: return c + "/pi";
      case -2: return c + "/pi^2";
      default: return c + "pi^" + std::to_string(pi_pow);
    }
  }

  static SymScalar parse(std::string s) {
    std::string t;
    for (char ch : s)
      if (ch != ' ' && ch != '\t') t += ch;
    SymScalar r;
    auto strip = [&](const std::string& suffix, int pw) {
      if (t.size() >= suffix.size() && t.compare(t.size() - suffix.size(), suffix.size(), suffix) == 0) {
        std::string head = t.substr(0, t.size() - suffix.size());
        r.coef = head.empty() ? 1.0 : parse_double(head);
        r.pi_pow = pw;
        return true;
      }
      return false;
    };
    if (strip("/pi^2", -2) || strip("/pi", -1) || strip("pi^2", 2) || strip("pi", 1)) return r;
    r.coef = parse_double(t);
    return r;
  }

  friend bool operator==(const SymScalar& a, const SymScalar& b) {
    return a.coef == b.coef && a.pi_pow == b.pi_pow;
  }
};

struct OkParams {
  Interval lambda;
  Interval sigma;
  Interval L;
  Interval pl2;           // (pi / L)^2
  bool nonlinear = true;  // test hook: false drops the cubic term

  Interval kappa() const { return lambda * pl2; }  // lambda pi^2 / L^2
};

// Parameters of the length-L problem from those on the unit interval.
inline OkParams rescale_params(const SymScalar& lambda0, const SymScalar& sigma0, const SymScalar& L) {
  if (!(lambda0.coef > 0) || !(sigma0.coef >= 0) || !(L.coef > 0))
    throw std::invalid_argument("rescale_params: parameters must be positive");
  // divide coefficients symbolically when the quotient is exact, else in interval arithmetic
  auto over_L2 = [&](const SymScalar& x) {
    Interval q = Interval(x.coef) / sqr(Interval(L.coef));
    SymScalar sym{q.lo(), x.pi_pow - 2 * L.pi_pow};
    if (q.is_point()) return sym.value();
    return SymScalar{1.0, sym.pi_pow}.value() * q;
  };
  OkParams p;
  p.lambda = over_L2(lambda0);
  p.sigma = over_L2(sigma0);
  p.pl2 = over_L2(SymScalar{1.0, 2});
  p.L = L.value();
  return p;
}

inline OkParams rescale_params(double lambda0, double sigma0, double L) {
  return rescale_params(SymScalar{lambda0, 0}, SymScalar{sigma0, 0}, SymScalar{L, 0});
}

// lambda = 4, sigma = 4/pi^2, L = 2pi.
inline OkParams canonical_params() { return rescale_params(SymScalar{16, 2}, SymScalar{16, 0}, SymScalar{2, 1}); }

inline Interval linear_eigenvalue(long k, const OkParams& p) {
  if (k < 1) throw std::invalid_argument("linear_eigenvalue: k must be >= 1");
  Interval k2 = sqr(Interval(static_cast<double>(k)));
  return -(sqr(k2 * p.pl2)) + p.kappa() * k2 - p.lambda * p.sigma;
}

inline std::vector<Interval> linear_eigenvalues(std::size_t M, const OkParams& p) {
  std::vector<Interval> mu(M + 1, Interval(0.0));
  for (std::size_t k = 1; k <= M; ++k) mu[k] = linear_eigenvalue(static_cast<long>(k), p);
  return mu;
}

// Upper bound of sum_{i > N} i^{-r}.
inline double zeta_tail(int r, long N) {
  if (N <= 0) return rnd::add_up(1.0, rnd::div_up(1.0, r - 1));
  return rnd::div_up(1.0, rnd::mul_down(r - 1, pow_down(static_cast<double>(N), r - 1)));
}

// A symmetric sequence c_{-i} = c_i: explicit enclosures for |i| <= N, |c_i| <= C/|i|^s beyond.
struct SeqBound {
  std::vector<Interval> c;  // c[0..N]
  double C = 0.0;
  int s = 6;
  int q = 1;  // tail support step

  long N() const { return static_cast<long>(c.size()) - 1; }
  Interval at(long i) const {
    long a = i < 0 ? -i : i;
    if (a <= N()) return c[a];
    if (C == 0 || a % q != 0) return Interval(0.0);
    return Interval::symmetric(rnd::div_up(C, pow_down(static_cast<double>(a), s)));
  }
  double max_abs_at(long i) const { return max_abs(at(i)); }
  double sup_norm() const {
    double r = C == 0 ? 0.0 : rnd::div_up(C, pow_down(static_cast<double>(N() + 1), s));
    for (const auto& x : c) r = std::max(r, max_abs(x));
    return r;
  }
  bool tail_valid() const { return std::isfinite(C); }
};

inline SeqBound seq_from(const IVector& a, double C = 0.0, int s = 6, int q = 1) {
  SeqBound r;
  r.c.assign(a.size() + 1, Interval(0.0));
  for (std::size_t i = 0; i < a.size(); ++i) r.c[i + 1] = a[i];
  r.C = C;
  r.s = s;
  r.q = q;
  return r;
}

inline SeqBound seq_from(const ScbSet& set) {
  if (set.frame) return seq_from(to_standard(set));
  return seq_from(set.finite, set.tail.C, set.tail.s, set.tail.q);
}

// gcd of all indices that may carry a nonzero entry (0 for the zero sequence).
inline long support_step(const SeqBound& x) {
  long g = x.C != 0 ? x.q : 0;
  for (long j = 1; j <= x.N() && g != 1; ++j)
    if (!x.c[j].is_zero()) g = std::gcd(g, j);
  return g;
}

// Enclosure of (x * y)_k, k = 0..Nout. With same = true, y is x itself and
// products of a coefficient with itself are evaluated as squares. The output
// tail constant is finite only when Nout >= Nx + Ny.
inline SeqBound convolve(const SeqBound& x, const SeqBound& y, bool same, long Nout) {
  const long Nx = x.N(), Ny = y.N();
  const int s = std::min(x.s, y.s);
  SeqBound r;
  r.s = s;
  r.c.assign(static_cast<std::size_t>(Nout) + 1, Interval(0.0));
  for (long k = 0; k <= Nout; ++k) {
    Interval acc(0.0);
    long jlo = std::max(-Nx, k - Ny), jhi = std::min(Nx, k + Ny);
    if (same) {
      for (long j = jlo; j <= jhi && 2 * j <= k; ++j) {
        long i = k - j;
        const Interval& xj = x.c[j < 0 ? -j : j];
        if (xj.is_zero()) continue;
        if (i == j || i == -j) {
          Interval sq = sqr(xj);
          acc += (i == j) ? sq : Interval(2.0) * sq;
        } else {
          const Interval& xi = x.c[i < 0 ? -i : i];
          if (xi.is_zero()) continue;
          acc += Interval(2.0) * (xj * xi);
        }
      }
    } else {
      for (long j = jlo; j <= jhi; ++j) {
        const Interval& xj = x.c[j < 0 ? -j : j];
        if (xj.is_zero()) continue;
        long i = k - j;
        const Interval& yi = y.c[i < 0 ? -i : i];
        if (yi.is_zero()) continue;
        acc += xj * yi;
      }
    }
    r.c[k] = acc;
  }
  long g = std::gcd(support_step(x), support_step(y));
  r.q = g == 0 ? 1 : static_cast<int>(g);
  // Terms with at least one index beyond the explicit range, bounded per k.
  if (x.C != 0 || y.C != 0) {
    if (!x.tail_valid() || !y.tail_valid()) throw std::runtime_error("convolve: reachable tail is not valid");
    double both = 0.0;
    if (x.C != 0 && y.C != 0) {
      double cc = rnd::mul_up(x.C, y.C);
      both = std::min(rnd::div_up(rnd::mul_up(cc, 2 * zeta_tail(x.s, Nx)), pow_down(Ny + 1.0, y.s)),
                      rnd::div_up(rnd::mul_up(cc, 2 * zeta_tail(y.s, Ny)), pow_down(Nx + 1.0, x.s)));
    }
    // sum over explicit z_j of |z_j| C_w / |k - j|^{s_w} where k - j lies in the tail of w
    auto mixed = [](const SeqBound& z, const SeqBound& w, long k) {
      double t = 0.0;
      if (w.C == 0) return t;
      for (long j = -z.N(); j <= z.N(); ++j) {
        long i = k - j < 0 ? j - k : k - j;
        if (i <= w.N() || i % w.q != 0) continue;
        double a = max_abs(z.c[j < 0 ? -j : j]);
        if (a == 0) continue;
        t = rnd::add_up(t, rnd::mul_up(a, rnd::div_up(w.C, pow_down(static_cast<double>(i), w.s))));
      }
      return t;
    };
    for (long k = 0; k <= Nout; k += r.q) {
      double t = both;
      if (k > 0 && both > 0) {
        double z = rnd::add_up(zeta_tail(s, Nx), zeta_tail(s, Ny));
        double far = rnd::div_up(rnd::mul_up(rnd::mul_up(x.C, y.C), rnd::mul_up(pow_up(2.0, s + 1), z)),
                                 pow_down(static_cast<double>(k), s));
        t = std::min(t, far);
      }
      t = rnd::add_up(t, mixed(x, y, k));
      t = rnd::add_up(t, mixed(y, x, k));
      if (t > 0) r.c[k] += Interval::symmetric(t);
    }
  }

  if (Nout < Nx + Ny) {
    r.C = std::numeric_limits<double>::infinity();
    return r;
  }
  // For k > K - 1 = Nx + Ny: one index explicit and the other in a tail, or both in tails.
  const double K = static_cast<double>(Nx + Ny + 1);
  auto weighted = [&](const SeqBound& z) {
    double f = 0.0;
    for (long j = -z.N(); j <= z.N(); ++j) {
      double a = max_abs(z.c[j < 0 ? -j : j]);
      if (a == 0) continue;
      double w = 1.0;
      if (j > 0) w = pow_up(rnd::div_up(K, rnd::sub_down(K, static_cast<double>(j))), s);
      f = rnd::add_up(f, rnd::mul_up(a, w));
    }
    return f;
  };
  double C = 0.0;
  if (y.C != 0) C = rnd::add_up(C, rnd::mul_up(y.C, weighted(x)));
  if (x.C != 0) C = rnd::add_up(C, rnd::mul_up(x.C, weighted(y)));
  if (x.C != 0 && y.C != 0) {
    double z = rnd::add_up(zeta_tail(s, Nx), zeta_tail(s, Ny));
    C = rnd::add_up(C, rnd::mul_up(rnd::mul_up(x.C, y.C), rnd::mul_up(pow_up(2.0, s + 1), z)));
  }
  r.C = C;
  return r;
}

// Enclosure of the self convolution (a * a)_k over all a in the set, k = 0..2M.
using ConvBounds = SeqBound;

inline ConvBounds conv_bounds(const ScbSet& set) {
  SeqBound a = seq_from(set);
  return convolve(a, a, true, 2 * a.N());
}

// Enclosure of (a * a * a)_k, k = 0..3M, with tail beyond.
inline SeqBound cube_bounds(const ScbSet& set) {
  SeqBound a = seq_from(set);
  SeqBound sq = convolve(a, a, true, 2 * a.N());
  return convolve(sq, a, false, 3 * a.N());
}

// Galerkin cube (all indices |j| <= m), k = 1..m.
inline IVector galerkin_cube(const IVector& a) {
  SeqBound x = seq_from(a);
  long m = x.N();
  SeqBound sq = convolve(x, x, true, 2 * m);
  SeqBound cu = convolve(sq, x, false, m);
  IVector r(a.size());
  for (std::size_t k = 1; k <= a.size(); ++k) r[k - 1] = cu.c[k];
  return r;
}

inline IVector rhs_galerkin(const IVector& a, const OkParams& p) {
  std::size_t m = a.size();
  IVector r(m);
  IVector cube = p.nonlinear ? galerkin_cube(a) : IVector(m);
  Interval kappa = p.kappa();
  for (std::size_t k = 1; k <= m; ++k) {
    Interval k2 = sqr(Interval(static_cast<double>(k)));
    Interval v = linear_eigenvalue(static_cast<long>(k), p) * a[k - 1];
    if (p.nonlinear && !cube[k - 1].is_zero()) v -= kappa * k2 * cube[k - 1];
    r[k - 1] = v;
  }
  return r;
}

// Nonlinear part -kappa k^2 (a*a*a)_k of the full vector field, k = 1..Mout.
inline IVector nonlinear_part(const SeqBound& cube, const OkParams& p, std::size_t Mout) {
  IVector r(Mout);
  if (!p.nonlinear) return r;
  Interval kappa = p.kappa();
  for (std::size_t k = 1; k <= Mout; ++k) {
    Interval c = cube.at(static_cast<long>(k));
    if (c.is_zero()) continue;
    r[k - 1] = -(kappa * sqr(Interval(static_cast<double>(k))) * c);
  }
  return r;
}

inline IMatrix jacobian_enclosure(const ScbSet& set, const ConvBounds& cb, const OkParams& p, std::size_t m) {
  (void)set;
  IMatrix J(m, m);
  Interval three_kappa = Interval(3.0) * p.kappa();
  for (std::size_t k = 1; k <= m; ++k) {
    Interval coef = p.nonlinear ? three_kappa * sqr(Interval(static_cast<double>(k))) : Interval(0.0);
    for (std::size_t l = 1; l <= m; ++l) {
      long kk = static_cast<long>(k), ll = static_cast<long>(l);
      Interval v(0.0);
      if (p.nonlinear) {
        Interval c = cb.at(kk - ll) + cb.at(kk + ll);
        if (!c.is_zero()) v = -(coef * c);
      }
      if (k == l) v += linear_eigenvalue(kk, p);
      J(k - 1, l - 1) = v;
    }
  }
  return J;
}

// Enclosure of F_k(full set) - F_k(Galerkin projection), k = 1..m, i.e. the
// cubic terms with at least one index beyond m.
inline IVector galerkin_perturbation(const ScbSet& set0, const OkParams& p, std::size_t m) {
  const ScbSet set = set0.frame ? to_standard(set0) : set0;
  IVector out(m);
  if (!p.nonlinear) return out;
  if (set.M() < m) throw std::invalid_argument("galerkin_perturbation: set dimension below m");
  SeqBound P = seq_from(project(set, m));
  SeqBound Q = seq_from(set);
  for (std::size_t k = 1; k <= m; ++k) Q.c[k] = Interval(0.0);
  bool q_zero = Q.C == 0;
  for (const auto& v : Q.c) q_zero = q_zero && v.is_zero();
  if (q_zero) return out;
  long M = Q.N();
  long mm = static_cast<long>(m);
  SeqBound pp = convolve(P, P, true, 2 * mm);
  SeqBound qq = convolve(Q, Q, true, 2 * M);
  SeqBound ppq = convolve(pp, Q, false, mm);
  SeqBound pqq = convolve(qq, P, false, mm);
  SeqBound qqq = convolve(qq, Q, false, mm);
  Interval kappa = p.kappa();
  for (std::size_t k = 1; k <= m; ++k) {
    Interval t = Interval(3.0) * ppq.c[k] + Interval(3.0) * pqq.c[k] + qqq.c[k];
    out[k - 1] = -(kappa * sqr(Interval(static_cast<double>(k))) * t);
  }
  return out;
}

}  // namespace okflow
