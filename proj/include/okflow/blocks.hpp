#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <istream>
#include <memory>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "okflow/fourier_scb.hpp"
#include "okflow/integrator.hpp"
#include "okflow/interval.hpp"
#include "okflow/okvf.hpp"

namespace okflow {

// Diagonal quadratic form: explicit signs for k <= size, -1 beyond.
struct ConeForm {
  std::vector<int> q;  // q[k-1] = Q_kk

  int at(long k) const {
    if (k >= 1 && static_cast<std::size_t>(k) <= q.size()) return q[k - 1];
    return -1;
  }
  std::vector<long> positive() const {
    std::vector<long> r;
    for (std::size_t k = 1; k <= q.size(); ++k)
      if (q[k - 1] > 0) r.push_back(static_cast<long>(k));
    return r;
  }
  static ConeForm stable(std::size_t M) { return ConeForm{std::vector<int>(M, -1)}; }
  static ConeForm unstable(std::size_t M, const std::vector<long>& plus) {
    ConeForm f = stable(M);
    for (long k : plus)
      if (k >= 1 && static_cast<std::size_t>(k) <= M) f.q[k - 1] = 1;
    return f;
  }
};

enum class BlockKind { unstable, stable };

struct Block {
  ScbSet set;
  ConeForm Q;
  double epsilon = 0.0;
  BlockKind kind = BlockKind::unstable;
};

struct ConeResult {
  bool ok = false;
  double epsilon = -rnd::inf;
  long worst_k = 0;  // M + 1 when the closure for k > M is the minimum
  std::vector<double> margins;
  std::string reason;
};

struct IsolationResult {
  bool ok = true;
  std::vector<long> exits;    // coordinates with verified exit faces
  std::vector<long> failing;  // coordinates whose faces have the wrong sign (-1: tail)
  std::string reason;
};

namespace detail {

inline Interval kappa_k2(const OkParams& p, long k) { return p.kappa() * sqr(Interval(static_cast<double>(k))); }

// Standard Jacobian entry DF_kl over the set with convolution bounds cb.
inline Interval df_entry(const ConvBounds& cb, const OkParams& p, long k, long l) {
  Interval v(0.0);
  if (p.nonlinear) {
    Interval c = cb.at(k - l) + cb.at(k + l);
    if (!c.is_zero()) v = -(Interval(3.0) * kappa_k2(p, k) * c);
  }
  if (k == l) v += linear_eigenvalue(k, p);
  return v;
}

// Jacobian on the explicit coordinates of a block: frame coordinates
// y = Pinv (x - c) on modes 1..n, standard coordinates on n+1..M.
inline IMatrix block_jacobian(const ScbSet& set, const ConvBounds& cb, const OkParams& p) {
  const std::size_t M = set.M();
  IMatrix DF(M, M);
  for (std::size_t k = 1; k <= M; ++k)
    for (std::size_t l = 1; l <= M; ++l) DF(k - 1, l - 1) = df_entry(cb, p, static_cast<long>(k), static_cast<long>(l));
  if (!set.frame) return DF;
  const Frame& f = *set.frame;
  const std::size_t n = f.dim();
  IMatrix J = DF;
  // rows 1..n: Pinv DF, then columns 1..n: (.) P
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t l = 0; l < M; ++l) {
      Interval s(0.0);
      for (std::size_t j = 0; j < n; ++j)
        if (!DF(j, l).is_zero()) s += f.Pinv(i, j) * DF(j, l);
      J(i, l) = s;
    }
  IMatrix K = J;
  for (std::size_t k = 0; k < M; ++k)
    for (std::size_t i = 0; i < n; ++i) {
      Interval s(0.0);
      for (std::size_t j = 0; j < n; ++j)
        if (!J(k, j).is_zero()) s += J(k, j) * f.P(j, i);
      K(k, i) = s;
    }
  return K;
}

inline double abs_row_sum(const IMatrix& a, std::size_t i) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.cols(); ++j) s = rnd::add_up(s, max_abs(a(i, j)));
  return s;
}

inline double abs_col_sum(const IMatrix& a, std::size_t j) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) s = rnd::add_up(s, max_abs(a(i, j)));
  return s;
}

// sum_{j in Z} |c_j| j^e for e in {0, 2}, tail included.
inline double weighted_abs_sum(const ConvBounds& cb, int e) {
  double s = e == 0 ? max_abs(cb.c[0]) : 0.0;
  for (long j = 1; j <= cb.N(); ++j) {
    double a = max_abs(cb.c[j]);
    if (a == 0) continue;
    double w = e == 0 ? 1.0 : static_cast<double>(j) * static_cast<double>(j);
    s = rnd::add_up(s, rnd::mul_up(2.0, rnd::mul_up(a, w)));
  }
  if (cb.C != 0) s = rnd::add_up(s, rnd::mul_up(2.0, rnd::mul_up(cb.C, zeta_tail(cb.s - e, cb.N()))));
  return s;
}

}  // namespace detail

// Minimal margin of 2 inf(Q_kk DF_kk) - sum_{l != k} sup|Q_ll DF_lk + Q_kk DF_kl|
// over all k, in the block's coordinates.
inline ConeResult verify_cone_condition(const Block& b, const OkParams& p) {
  const ScbSet& set = b.set;
  const std::size_t M = set.M();
  const long LM = static_cast<long>(M);
  const std::size_t n = set.frame ? set.frame->dim() : 0;
  const long ln = static_cast<long>(n);
  ConeResult res;
  ScbSet std_set = to_standard(set);
  ConvBounds cb = p.nonlinear ? conv_bounds(std_set) : seq_from(IVector(2 * M));
  if (!cb.tail_valid()) {
    res.reason = "convolution tail is not finite";
    return res;
  }
  const long Nc = cb.N();
  const int s = cb.s;
  const Interval kappa = p.kappa();
  const double C = p.nonlinear ? cb.C : 0.0;
  IMatrix J = detail::block_jacobian(set, cb, p);
  auto Q = [&](long k) { return b.Q.at(k); };

  // 3 kappa |Q_ll l^2 + Q_kk k^2| |C_{k-l} + C_{k+l}|, both in standard coordinates
  auto std_pair = [&](long k, long l) {
    if (!p.nonlinear) return 0.0;
    Interval c = cb.at(k - l) + cb.at(k + l);
    if (c.is_zero()) return 0.0;
    Interval w = Interval(static_cast<double>(Q(l))) * sqr(Interval(static_cast<double>(l))) +
                 Interval(static_cast<double>(Q(k))) * sqr(Interval(static_cast<double>(k)));
    return rnd::mul_up(rnd::mul_up(3.0, kappa.hi()), rnd::mul_up(max_abs(w), max_abs(c)));
  };
  const double z2 = zeta_tail(s - 2, Nc), z0 = zeta_tail(s, Nc);

  res.margins.assign(M, 0.0);
  double eps = rnd::inf;
  for (long k = 1; k <= LM; ++k) {
    Interval d = Interval(static_cast<double>(Q(k))) * J(k - 1, k - 1);
    double margin = rnd::mul_down(2.0, d.lo());
    double off = 0.0;
    for (long l = 1; l <= LM; ++l) {
      if (l == k) continue;
      double t;
      if (k > ln && l > ln) {
        t = std_pair(k, l);
      } else {
        Interval v = Interval(static_cast<double>(Q(l))) * J(l - 1, k - 1) +
                     Interval(static_cast<double>(Q(k))) * J(k - 1, l - 1);
        t = max_abs(v);
      }
      off = rnd::add_up(off, t);
    }
    if (p.nonlinear && (C != 0 || Nc > LM)) {
      if (k > ln) {
        for (long l = LM + 1; l <= Nc + k; ++l) off = rnd::add_up(off, std_pair(k, l));
        if (C != 0) {
          // l > Nc + k: 6 kappa C (2 zeta(s-2) + 3 k^2 zeta(s))
          double kk = static_cast<double>(k);
          double r = rnd::add_up(rnd::mul_up(2.0, z2), rnd::mul_up(3.0 * kk * kk, z0));
          off = rnd::add_up(off, rnd::mul_up(rnd::mul_up(6.0, kappa.hi()), rnd::mul_up(C, r)));
        }
      } else {
        const Frame& f = *set.frame;
        for (long l = LM + 1; l <= Nc + ln; ++l) {
          Interval a(0.0), bb(0.0);
          for (long j = 1; j <= ln; ++j) {
            a += f.Pinv(k - 1, j - 1) * detail::df_entry(cb, p, j, l);
            bb += detail::df_entry(cb, p, l, j) * f.P(j - 1, k - 1);
          }
          off = rnd::add_up(off, max_abs(a + bb));
        }
        if (C != 0) {
          double colP = 0.0, rowPinv = 0.0;
          for (long j = 1; j <= ln; ++j) {
            colP = rnd::add_up(colP, max_abs(f.P(j - 1, k - 1)));
            rowPinv = rnd::add_up(rowPinv, rnd::mul_up(max_abs(f.Pinv(k - 1, j - 1)), static_cast<double>(j * j)));
          }
          double nn = static_cast<double>(ln * ln);
          double r = rnd::add_up(rnd::mul_up(colP, rnd::add_up(rnd::mul_up(2.0, z2), rnd::mul_up(2.0 * nn, z0))),
                                 rnd::mul_up(rowPinv, z0));
          off = rnd::add_up(off, rnd::mul_up(rnd::mul_up(6.0, kappa.hi()), rnd::mul_up(C, r)));
        }
      }
    }
    margin = rnd::sub_down(margin, off);
    res.margins[k - 1] = margin;
    if (margin < eps) {
      eps = margin;
      res.worst_k = k;
    }
  }

  // k > M: margin >= A k^4 - B k^2 + D with
  // A = 2 (pi/L)^4, B = 2 kappa + 6 kappa W1 (1 + 3 gamma), D = 2 lambda sigma - 12 gamma kappa W2
  double gamma = 1.0;
  if (set.frame) {
    for (std::size_t j = 0; j < n; ++j) gamma = std::max(gamma, detail::abs_col_sum(set.frame->Pinv, j));
    for (std::size_t i = 0; i < n; ++i) gamma = std::max(gamma, detail::abs_row_sum(set.frame->P, i));
  }
  Interval W1(0.0), W2(0.0);
  if (p.nonlinear) {
    W1 = Interval(detail::weighted_abs_sum(cb, 0));
    W2 = Interval(detail::weighted_abs_sum(cb, 2));
  }
  Interval g(gamma);
  Interval A = Interval(2.0) * sqr(p.pl2);
  Interval B = Interval(2.0) * kappa + Interval(6.0) * kappa * W1 * (Interval(1.0) + Interval(3.0) * g);
  Interval D = Interval(2.0) * p.lambda * p.sigma - Interval(12.0) * g * kappa * W2;
  Interval u = sqr(Interval(static_cast<double>(LM + 1)));
  double closure = -rnd::inf;
  if ((B / (Interval(2.0) * A)).hi() <= u.lo()) closure = (A * sqr(u) - B * u + D).lo();
  if (closure < eps) {
    eps = closure;
    res.worst_k = LM + 1;
  }
  res.epsilon = eps;
  res.ok = eps > 0;
  if (!res.ok) res.reason = "nonpositive cone margin at k = " + std::to_string(res.worst_k);
  return res;
}

// Cone condition with Q = -Id in the block's coordinates.
inline ConeResult verify_log_norm(const Block& b, const OkParams& p) {
  if (b.kind != BlockKind::stable) throw std::invalid_argument("verify_log_norm: block is not stable");
  Block s = b;
  s.Q = ConeForm::stable(b.set.M());
  return verify_cone_condition(s, p);
}

// Vector field on the faces of a block, in block coordinates. Explicit faces
// use the mean value form G_k(face) in G_k(xhat) + sum_l J_kl (x_l - xhat_l)
// about the box center; tail faces use the absorbing tail constant.
struct FaceField {
  std::vector<Interval> rest;  // G_k(xhat) + sum_{l != k} J_kl (x_l - xhat_l) + tail terms
  std::vector<Interval> diag;  // J_kk
  std::vector<Interval> up, dn;
  double absorbing = 0.0;
};

inline FaceField face_field(const Block& b, const OkParams& p) {
  const ScbSet& set = b.set;
  const std::size_t M = set.M();
  const std::size_t n = set.frame ? set.frame->dim() : 0;
  FaceField ff;
  ScbSet std_set = to_standard(set);
  ConvBounds cb = p.nonlinear ? conv_bounds(std_set) : seq_from(IVector(2 * M));

  // the vector field at the box center, in block coordinates
  std::vector<double> yhat = set.finite.mid();
  IVector xhat(M);
  for (std::size_t k = 0; k < M; ++k) xhat[k] = Interval(yhat[k]);
  if (set.frame) {
    const Frame& f = *set.frame;
    IVector y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = Interval(yhat[i]);
    IVector x = mat_vec(f.P, y);
    for (std::size_t i = 0; i < n; ++i) xhat[i] = Interval(f.center[i]) + x[i];
  }
  ScbSet cset(xhat, TailBound{0.0, set.tail.s, 0, 1});
  SeqBound ccube = p.nonlinear ? cube_bounds(cset) : seq_from(IVector(3 * M));
  IVector G(M);
  for (std::size_t k = 1; k <= M; ++k) {
    Interval v = linear_eigenvalue(static_cast<long>(k), p) * xhat[k - 1];
    const Interval& c = ccube.c[k];
    if (p.nonlinear && !c.is_zero()) v -= detail::kappa_k2(p, static_cast<long>(k)) * c;
    G[k - 1] = v;
  }
  if (set.frame) {
    const Frame& f = *set.frame;
    IVector Gf(n);
    for (std::size_t i = 0; i < n; ++i) Gf[i] = G[i];
    IVector y = mat_vec(f.Pinv, Gf);
    for (std::size_t i = 0; i < n; ++i) G[i] = y[i];
  }

  IMatrix J = detail::block_jacobian(set, cb, p);
  // sum_{l > M} |DF_kl| C / l^s in standard coordinates
  const double Ct = set.tail.C;
  std::vector<double> T(M + 1, 0.0);
  if (p.nonlinear && Ct != 0) {
    const long Nc = cb.N();
    for (long k = 1; k <= static_cast<long>(M); ++k) {
      double t = 0.0;
      for (long l = static_cast<long>(M) + 1; l <= Nc + k; ++l) {
        double tl = set.tail.at(l);
        if (tl == 0) continue;
        Interval c = cb.at(k - l) + cb.at(k + l);
        if (c.is_zero()) continue;
        t = rnd::add_up(t, rnd::mul_up(max_abs(c), tl));
      }
      int qq = std::gcd(cb.q, set.tail.q);
      if (cb.C != 0 && k % qq == 0) {
        double r = rnd::mul_up(rnd::mul_up(2.0, cb.C), rnd::mul_up(Ct, zeta_tail(set.tail.s, Nc)));
        t = rnd::add_up(t, r);
      }
      T[k] = rnd::mul_up(rnd::mul_up(3.0, detail::kappa_k2(p, k).hi()), t);
    }
  }
  auto tail_term = [&](std::size_t k) {
    if (k > n) return T[k];
    double t = 0.0;
    for (std::size_t j = 1; j <= n; ++j) t = rnd::add_up(t, rnd::mul_up(max_abs(set.frame->Pinv(k - 1, j - 1)), T[j]));
    return t;
  };

  SeqBound cube = p.nonlinear ? cube_bounds(std_set) : seq_from(IVector(3 * M));
  for (std::size_t k = 1; k <= M; ++k) {
    const Interval& box = set.finite[k - 1];
    const Interval c = Interval(yhat[k - 1]);
    Interval rest = G[k - 1];
    for (std::size_t l = 1; l <= M; ++l) {
      if (l == k) continue;
      Interval d = set.finite[l - 1] - Interval(yhat[l - 1]);
      if (d.is_zero() || J(k - 1, l - 1).is_zero()) continue;
      rest += J(k - 1, l - 1) * d;
    }
    double t = tail_term(k);
    if (t > 0) rest += Interval::symmetric(t);
    Interval Jkk = J(k - 1, k - 1);
    Interval up = rest + Jkk * (Interval(box.hi()) - c);
    Interval dn = rest + Jkk * (Interval(box.lo()) - c);
    if (k > n) {
      // direct form: mu_k a_k - kappa k^2 (a*a*a)_k over the box
      Interval mu = linear_eigenvalue(static_cast<long>(k), p);
      Interval r2 = mu * c;
      if (p.nonlinear && !cube.c[k].is_zero()) r2 -= detail::kappa_k2(p, static_cast<long>(k)) * cube.c[k];
      Interval up2 = r2 + mu * (Interval(box.hi()) - c);
      Interval dn2 = r2 + mu * (Interval(box.lo()) - c);
      up = intersect(up, up2);
      dn = intersect(dn, dn2);
      if (max_abs(r2) * min_abs(Jkk) < max_abs(rest) * min_abs(mu)) {
        rest = r2;
        Jkk = mu;
      }
    }
    ff.rest.push_back(rest);
    ff.diag.push_back(Jkk);
    ff.up.push_back(up);
    ff.dn.push_back(dn);
  }
  ff.absorbing = detail::absorbing_tail_constant(cube, M, set.tail.s, p);
  return ff;
}

// Exit faces at Q_kk = +1, entry faces elsewhere and on the tail.
inline IsolationResult verify_isolation(const Block& b, const OkParams& p) {
  const ScbSet& set = b.set;
  FaceField ff = face_field(b, p);
  IsolationResult res;
  for (std::size_t k = 1; k <= set.M(); ++k) {
    const Interval& box = set.finite[k - 1];
    const Interval& up = ff.up[k - 1];
    const Interval& dn = ff.dn[k - 1];
    bool exit = b.Q.at(static_cast<long>(k)) > 0;
    bool ok;
    if (box.is_zero() && up.is_zero() && dn.is_zero()) {
      ok = true;  // invariant coordinate
    } else if (exit) {
      ok = up.lo() > 0 && dn.hi() < 0;
    } else {
      ok = up.hi() < 0 && dn.lo() > 0;
    }
    if (!ok) {
      res.failing.push_back(static_cast<long>(k));
      if (res.reason.empty()) {
        std::ostringstream os;
        os << "face " << k << ": field " << dn << " / " << up << " has the wrong sign";
        res.reason = os.str();
      }
    } else if (exit && !box.is_zero()) {
      res.exits.push_back(static_cast<long>(k));
    }
  }
  bool tail_ok = set.tail.C == 0 ? ff.absorbing == 0 : ff.absorbing < set.tail.C;
  if (!tail_ok) {
    res.failing.push_back(-1);
    if (res.reason.empty()) res.reason = "tail: absorbing constant " + format_double(ff.absorbing) + " >= C";
  }
  res.ok = res.failing.empty();
  return res;
}

// Smallest tail constant for which the tail faces of the set point inwards.
inline double isolating_tail_constant(const ScbSet& set, const OkParams& p) {
  SeqBound cube = p.nonlinear ? cube_bounds(to_standard(set)) : seq_from(IVector(3 * set.M()));
  return detail::absorbing_tail_constant(cube, set.M(), set.tail.s, p);
}

struct UnstableBlockSpec {
  int q = 3;                  // elongated index
  double halfwidth = 0.075;
  double thin = 1e-16;        // floor on modes up to thin_modes
  double other_unstable = 1e-12;
  double mid = 1e-20;         // floor on the remaining explicit modes
  std::size_t thin_modes = 15;
  std::size_t M = 75;
  double tail_factor = 2.0;   // tail C = tail_factor times the isolating constant
  double width_margin = 1.1;  // widened faces get this factor over the minimal width
  int max_rounds = 200;
};

// Origin-centered block elongated along e_q. Thin widths start at their floors
// and faces that fail isolation are widened to width_margin times the width
// at which the linear term dominates, until every face has the correct sign.
// thin = 0 keeps the block in SymmetryClass q.
namespace detail {

struct GradeOptions {
  std::size_t first = 1;  // coordinates below first keep their widths
  long fixed = 0;         // a coordinate that keeps its width
  double floor = 0.0;     // smallest width given to a widened zero-width face
  double margin = 1.1;
  double tail_factor = 2.0;
  double tail_min = 0.0;
  int max_rounds = 200;
};

// Widens the standard coordinates k >= first of b around center until every
// face there has the sign required by b.Q, and sets the tail constant to
// tail_factor times the isolating one (at least tail_min).
inline void grade_faces(Block& b, const OkParams& p, const std::vector<double>& center, std::vector<double>& w,
                        const GradeOptions& o) {
  const std::size_t M = b.set.M();
  auto make = [&](double C) {
    ScbSet s = b.set;
    for (std::size_t k = o.first; k <= M; ++k) {
      Interval c(center[k - 1]);
      s.finite[k - 1] = w[k - 1] == 0 ? c : c + Interval::symmetric(w[k - 1]);
    }
    s.tail.C = C;
    return s;
  };
  auto tail_for = [&](double C0) {
    double C = std::max(C0, o.tail_min);
    for (int it = 0; it < 50; ++it) {
      double Cabs = isolating_tail_constant(make(C), p);
      if (Cabs == 0) return C;
      double next = rnd::mul_up(o.tail_factor, Cabs);
      if (!std::isfinite(next)) break;
      if (Cabs < C && next <= C) return C;
      C = std::max(C, next);
    }
    return C;  // not absorbing; isolation and the cone check report it
  };
  double C = tail_for(0.0);
  for (int round = 0; round < o.max_rounds; ++round) {
    b.set = make(C);
    IsolationResult iso = verify_isolation(b, p);
    if (iso.ok) return;
    FaceField ff = face_field(b, p);
    bool widened = false;
    for (long k : iso.failing) {
      if (k < static_cast<long>(o.first) || k == o.fixed) continue;
      // |J_kk| w_k > |rest_k| makes both faces point the right way
      const Interval& d = ff.diag[k - 1];
      double need = d.lo() > 0 || d.hi() < 0 ? rnd::div_up(max_abs(ff.rest[k - 1]), min_abs(d)) : 2 * w[k - 1];
      w[k - 1] = std::max({rnd::mul_up(o.margin, need), o.floor, w[k - 1] * 1.0001});
      widened = true;
    }
    double Cn = tail_for(C);
    if (!widened && Cn == C) break;
    C = Cn;
  }
  b.set = make(C);
}

}  // namespace detail

inline Block build_unstable_block(const OkParams& p, const UnstableBlockSpec& spec) {
  if (spec.q < 1 || static_cast<std::size_t>(spec.q) > spec.M) throw std::invalid_argument("build_unstable_block: bad q");
  if (!(spec.halfwidth > spec.thin)) throw std::invalid_argument("build_unstable_block: halfwidth must exceed thin");
  detail::check_dissipative(spec.M, p);
  const std::size_t M = spec.M;
  std::vector<long> plus;
  for (std::size_t k = 1; k <= M; ++k)
    if (linear_eigenvalue(static_cast<long>(k), p).lo() > 0) plus.push_back(static_cast<long>(k));
  const bool sym = spec.thin == 0;
  std::vector<double> w(M, 0.0);
  for (std::size_t k = 1; k <= M; ++k) {
    if (sym && k % spec.q != 0) continue;
    bool unstable = std::find(plus.begin(), plus.end(), static_cast<long>(k)) != plus.end();
    if (static_cast<int>(k) == spec.q)
      w[k - 1] = spec.halfwidth;
    else if (unstable)
      w[k - 1] = std::max(spec.other_unstable, spec.mid);
    else
      w[k - 1] = k <= spec.thin_modes && !sym ? spec.thin : spec.mid;
  }
  Block b;
  b.kind = BlockKind::unstable;
  b.Q = ConeForm::unstable(M, plus);
  b.set = ScbSet(IVector(M), TailBound{0.0, 6, 0, sym ? spec.q : 1});
  detail::GradeOptions o;
  o.fixed = spec.q;
  o.floor = spec.mid;
  o.margin = spec.width_margin;
  o.tail_factor = spec.tail_factor;
  o.max_rounds = spec.max_rounds;
  detail::grade_faces(b, p, std::vector<double>(M, 0.0), w, o);
  return b;
}

struct StableBlockSpec {
  std::size_t frame_dim = 39;  // eigenbasis coordinates on modes 1..frame_dim
  std::vector<double> radii;   // frame radii profile, ordered by dominant mode
  double radius_scale = 1.0;
  double mid_B = 1e-2;         // mid-zone radius B / k^6
  double tail_C = 1e-2;
  std::size_t M = 250;
  bool grade_mid_zone = true;  // widen mid-zone faces until they point inwards
  double width_margin = 1.1;
};

struct Eigenbasis {
  IMatrix P;     // columns: approximate eigenvectors (point entries)
  IMatrix Pinv;  // rigorous enclosure of P^{-1}
  std::vector<double> eigenvalues;
  std::vector<long> dominant;  // dominant mode (1-based) of each column
};

// Approximate eigenvectors of a real midpoint matrix with real spectrum,
// unit columns ordered by their dominant component.
inline Eigenbasis numeric_eigenbasis(const Eigen::MatrixXd& A, double max_condition = 1e10) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n) throw std::invalid_argument("numeric_eigenbasis: matrix not square");
  Eigen::EigenSolver<Eigen::MatrixXd> es(A);
  if (es.info() != Eigen::Success) throw std::runtime_error("numeric_eigenbasis: eigen decomposition failed");
  Eigen::MatrixXd V = es.eigenvectors().real();
  Eigen::VectorXd lam = es.eigenvalues().real();
  double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
  if (es.eigenvalues().imag().cwiseAbs().maxCoeff() > 1e-9 * scale)
    throw std::runtime_error("numeric_eigenbasis: complex eigenvalues");
  std::vector<long> dom(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    V.col(j).normalize();
    Eigen::Index i;
    V.col(j).cwiseAbs().maxCoeff(&i);
    if (V(i, j) < 0) V.col(j) = -V.col(j);
    dom[j] = static_cast<long>(i);
  }
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return dom[a] != dom[b] ? dom[a] < dom[b] : lam[a] > lam[b];
  });
  Eigenbasis e;
  Eigen::MatrixXd Vs(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    Vs.col(j) = V.col(order[j]);
    e.eigenvalues.push_back(lam[order[j]]);
    e.dominant.push_back(dom[order[j]] + 1);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Vs);
  const auto& sv = svd.singularValues();
  if (!(sv(n - 1) > 0) || sv(0) / sv(n - 1) > max_condition)
    throw std::runtime_error("numeric_eigenbasis: eigenvector matrix is ill-conditioned");
  Eigen::MatrixXd R = Vs.inverse();
  e.P = IMatrix(n, n);
  IMatrix Ri(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      e.P(i, j) = Interval(Vs(i, j));
      Ri(i, j) = Interval(R(i, j));
    }
  e.Pinv = inverse_enclosure(e.P, Ri);
  return e;
}

// Midpoint Galerkin Jacobian at a point.
inline Eigen::MatrixXd galerkin_jacobian_mid(const std::vector<double>& a, const OkParams& p) {
  const std::size_t m = a.size();
  IVector v(m);
  for (std::size_t i = 0; i < m; ++i) v[i] = Interval(a[i]);
  ConvBounds cb = conv_bounds(ScbSet(v, TailBound{}));
  IMatrix J = jacobian_enclosure(ScbSet(v, TailBound{}), cb, p, m);
  return detail::mid_matrix(J);
}

inline double galerkin_residual(const std::vector<double>& a, const OkParams& p) {
  IVector v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v[i] = Interval(a[i]);
  IVector F = rhs_galerkin(v, p);
  double r = 0.0;
  for (const auto& x : F) r = std::max(r, max_abs(x));
  return r;
}

// Newton iteration on the midpoint Galerkin system (not rigorous).
inline std::vector<double> numeric_fixed_point(std::vector<double> a, const OkParams& p, double tol = 1e-13,
                                               int max_iter = 50) {
  const std::size_t m = a.size();
  for (int it = 0; it <= max_iter; ++it) {
    IVector v(m);
    for (std::size_t i = 0; i < m; ++i) v[i] = Interval(a[i]);
    IVector F = rhs_galerkin(v, p);
    double res = 0.0;
    Eigen::VectorXd f(m);
    for (std::size_t i = 0; i < m; ++i) {
      f[i] = F[i].mid();
      res = std::max(res, max_abs(F[i]));
    }
    if (res < tol) return a;
    if (it == max_iter) break;
    Eigen::VectorXd d = galerkin_jacobian_mid(a, p).partialPivLu().solve(f);
    for (std::size_t i = 0; i < m; ++i) a[i] -= d[i];
    if (!d.allFinite()) break;
  }
  throw std::runtime_error("numeric_fixed_point: Newton iteration did not converge");
}

// Block centered at an approximate equilibrium: eigenbasis coordinates on
// modes 1..frame_dim, standard radii at least B / k^6 up to M, tail C beyond.
inline Block build_stable_block(const std::vector<double>& center, const StableBlockSpec& spec, const OkParams& p) {
  const std::size_t n = spec.frame_dim, M = spec.M;
  if (n == 0 || n > M) throw std::invalid_argument("build_stable_block: frame dimension out of range");
  if (spec.radii.size() != n) throw std::invalid_argument("build_stable_block: radii profile has wrong length");
  detail::check_dissipative(M, p);
  std::vector<double> c(M, 0.0);
  std::copy_n(center.begin(), std::min(center.size(), M), c.begin());
  std::vector<double> cf(c.begin(), c.begin() + static_cast<long>(n));
  // Jacobian of the full center restricted to the frame modes
  IVector v(M);
  for (std::size_t i = 0; i < M; ++i) v[i] = Interval(c[i]);
  ScbSet cs(v, TailBound{});
  ConvBounds cb = conv_bounds(cs);
  Eigenbasis eb = numeric_eigenbasis(detail::mid_matrix(jacobian_enclosure(cs, cb, p, n)));
  auto frame = std::make_shared<Frame>();
  frame->center = cf;
  frame->P = eb.P;
  frame->Pinv = eb.Pinv;
  IVector f(M);
  for (std::size_t i = 0; i < n; ++i) f[i] = Interval::symmetric(rnd::mul_up(spec.radii[i], spec.radius_scale));
  for (std::size_t k = n + 1; k <= M; ++k) {
    double r = rnd::div_up(spec.mid_B, pow_down(static_cast<double>(k), 6));
    f[k - 1] = Interval(c[k - 1]) + Interval::symmetric(r);
  }
  Block b;
  b.kind = BlockKind::stable;
  b.Q = ConeForm::stable(M);
  b.set = ScbSet(f, TailBound{spec.tail_C, 6, 0, 1});
  b.set.frame = frame;
  if (spec.grade_mid_zone) {
    std::vector<double> w(M, 0.0);
    for (std::size_t k = n + 1; k <= M; ++k) w[k - 1] = f[k - 1].rad();
    detail::GradeOptions o;
    o.first = n + 1;
    o.margin = spec.width_margin;
    o.tail_min = spec.tail_C;
    detail::grade_faces(b, p, c, w, o);
  }
  return b;
}

// Sub-box with coordinate q pinned to its upper (sign > 0) or lower endpoint.
inline ScbSet extract_exit_face(const Block& b, long q, int sign) {
  if (b.Q.at(q) <= 0) throw std::invalid_argument("extract_exit_face: index is not unstable");
  ScbSet face = b.set;
  const Interval& x = face.finite[q - 1];
  face.finite[q - 1] = Interval(sign > 0 ? x.hi() : x.lo());
  return face;
}

// fixedPoint.in: lines "<k> <value>", '#' comments, missing indices zero.
inline std::vector<double> read_fixed_point(std::istream& is, std::size_t m) {
  std::vector<double> a(m, 0.0);
  std::string line;
  while (std::getline(is, line)) {
    auto h = line.find('#');
    if (h != std::string::npos) line.erase(h);
    std::istringstream ls(line);
    long k;
    std::string val;
    if (!(ls >> k)) continue;
    if (!(ls >> val)) throw std::runtime_error("fixed point file: missing value for index " + std::to_string(k));
    if (k < 1) throw std::runtime_error("fixed point file: index must be >= 1");
    if (static_cast<std::size_t>(k) <= m) a[k - 1] = parse_double(val);
  }
  return a;
}

inline void write_fixed_point(std::ostream& os, const std::vector<double>& a) {
  for (std::size_t k = 1; k <= a.size(); ++k)
    if (a[k - 1] != 0) os << k << ' ' << format_double(a[k - 1]) << '\n';
}

// Block report: the set, its cone margin and the isolation verdict.
inline void write_block_report(std::ostream& os, const Block& b, const ConeResult& cone, const IsolationResult& iso) {
  write_scb(os, b.set);
  os << "epsilon=" << format_double(cone.epsilon) << '\n';
  os << "isolation=" << (iso.ok ? "pass" : "fail") << '\n';
  if (b.set.frame) os << "frame_dim=" << b.set.frame->dim() << '\n';
}

}  // namespace okflow
