#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "okflow/convolution.hpp"
#include "okflow/fourier_scb.hpp"
#include "okflow/interval.hpp"
#include "okflow/okvf.hpp"
#include "okflow/taylor_jets.hpp"

namespace okflow {

struct StepError : std::runtime_error {
  long step;
  StepError(long s, const std::string& what) : std::runtime_error(what), step(s) {}
};

struct IntegratorConfig {
  double h = 0.002;
  int order = 16;
  std::size_t m = 15;
  std::string backend = "fft";
  std::size_t fft_nodes = 32;
  double inflation = 1.1;
  double abs_inflation = 1e-15;
  int max_retries = 20;
  int kz_iterations = 20;
};

// x = xbar + C r0 + r on modes 1..m, plain intervals on m+1..M, tail beyond.
struct LohnerSet {
  std::vector<double> xbar;
  IMatrix C;
  IVector r0;
  IVector r;
  IVector mid;
  TailBound tail;

  std::size_t m() const { return xbar.size(); }
  std::size_t M() const { return xbar.size() + mid.size(); }

  static LohnerSet from_scb(const ScbSet& set0, std::size_t m) {
    ScbSet set = to_standard(set0);
    if (set.M() < m) throw std::invalid_argument("LohnerSet: set has fewer than m explicit modes");
    LohnerSet s;
    s.xbar.resize(m);
    s.r0 = IVector(m);
    s.r = IVector(m);
    for (std::size_t i = 0; i < m; ++i) {
      s.xbar[i] = set.finite[i].mid();
      s.r0[i] = set.finite[i] - Interval(s.xbar[i]);
    }
    s.C = IMatrix::identity(m);
    s.mid = IVector(set.M() - m);
    for (std::size_t i = m; i < set.M(); ++i) s.mid[i - m] = set.finite[i];
    s.tail = set.tail;
    return s;
  }

  IVector finite_hull() const {
    IVector x = mat_vec(C, r0) + r;
    for (std::size_t i = 0; i < m(); ++i) x[i] = Interval(xbar[i]) + x[i];
    return x;
  }

  ScbSet to_scb() const {
    IVector f = finite_hull();
    for (const auto& v : mid) f.push_back(v);
    ScbSet s(std::move(f), tail);
    s.tail.start = static_cast<int>(M()) + 1;
    return s;
  }
};

namespace detail {

inline int gcd_support(long a, long b) {
  long g = std::gcd(a, b);
  return g == 0 ? 1 : static_cast<int>(g);
}

inline long support_of(const IVector& v, const TailBound& t) {
  long g = t.C != 0 ? t.q : 0;
  for (std::size_t i = 0; i < v.size() && g != 1; ++i)
    if (!v[i].is_zero()) g = std::gcd(g, static_cast<long>(i + 1));
  return g;
}

// Nonlinear forcing N_k on modes 1..M of the set Z: the Galerkin cube plus
// the perturbation [delta] on 1..m, the full cube on m+1..M.
struct Forcing {
  IVector N;
  IVector delta;  // on 1..m
  SeqBound cube;  // full cube of Z, explicit to 3M
};

inline Forcing forcing(const ScbSet& Z, const OkParams& p, std::size_t m) {
  Forcing f;
  std::size_t M = Z.M();
  f.N = IVector(M);
  f.delta = IVector(m);
  if (!p.nonlinear) {
    f.cube = seq_from(IVector(3 * M));
    return f;
  }
  f.cube = cube_bounds(Z);
  f.delta = galerkin_perturbation(Z, p, m);
  IVector gal = galerkin_cube(project(Z, m));
  Interval kappa = p.kappa();
  for (std::size_t k = 1; k <= M; ++k) {
    Interval k2 = sqr(Interval(static_cast<double>(k)));
    const Interval& c = k <= m ? gal[k - 1] : f.cube.c[k];
    Interval v = c.is_zero() ? Interval(0.0) : -(kappa * k2 * c);
    if (k <= m) v += f.delta[k - 1];
    f.N[k - 1] = v;
  }
  return f;
}

// sup_{k > M} k^s kappa k^2 |cube_k| / |mu_k|.
inline double absorbing_tail_constant(const SeqBound& cube, std::size_t M, int s, const OkParams& p) {
  if (!p.nonlinear) return 0.0;
  double kappa = p.kappa().hi();
  double best = 0.0;
  long M3 = static_cast<long>(3 * M);
  for (long k = static_cast<long>(M) + 1; k <= M3; ++k) {
    double c = max_abs(cube.at(k));
    if (c == 0) continue;
    double kk = static_cast<double>(k);
    double num = rnd::mul_up(rnd::mul_up(pow_up(kk, s), rnd::mul_up(kappa, kk * kk)), c);
    best = std::max(best, rnd::div_up(num, min_abs(linear_eigenvalue(k, p))));
  }
  if (cube.C != 0) {
    // kappa k^2 C3 / |mu_k| is decreasing for k >= 3
    double kk = static_cast<double>(M3 + 1);
    double num = rnd::mul_up(rnd::mul_up(kappa, kk * kk), cube.C);
    best = std::max(best, rnd::div_up(num, min_abs(linear_eigenvalue(M3 + 1, p))));
  }
  return best;
}

inline void check_dissipative(std::size_t M, const OkParams& p) {
  long K = static_cast<long>(M) + 1;
  if (!(linear_eigenvalue(K, p).hi() < 0)) throw std::invalid_argument("tail modes are not dissipative: mu_{M+1} >= 0");
  // mu_k decreasing for k^2 > kappa / (2 (pi/L)^4)
  Interval thr = p.kappa() / (Interval(2.0) * sqr(p.pl2));
  if (!(thr.hi() < static_cast<double>(K) * K) || K < 3)
    throw std::invalid_argument("tail modes: mu_k not monotone beyond M");
}

// Enclosure of a_k over [0, h] given a_k(0) in x and forcing in n:
// hull(x, e^{mu h} x + (e^{mu h} - 1)/mu n).
inline Interval sweep(const Interval& x, const Interval& n, const Interval& e, const Interval& g) {
  if (x.is_zero() && n.is_zero()) return Interval(0.0);
  return hull(x, e * x + g * n);
}

inline Interval endpoint(const Interval& x, const Interval& n, const Interval& e, const Interval& g) {
  if (x.is_zero() && n.is_zero()) return Interval(0.0);
  return e * x + g * n;
}

}  // namespace detail

// Validated enclosure Z of every trajectory starting in X over [0, h].
inline ScbSet rough_enclosure(const ScbSet& X0, double h, const OkParams& p, std::size_t m,
                              const IntegratorConfig& cfg = {}) {
  if (!(h > 0)) throw std::invalid_argument("rough_enclosure: h must be positive");
  ScbSet X = to_standard(X0);
  const std::size_t M = X.M();
  detail::check_dissipative(M, p);
  std::vector<Interval> e(M), g(M);
  for (std::size_t k = 1; k <= M; ++k) {
    Interval mu = linear_eigenvalue(static_cast<long>(k), p);
    e[k - 1] = exp(mu * Interval(h));
    g[k - 1] = expm1_over(mu, h);
  }
  auto image = [&](const ScbSet& Z) {
    detail::Forcing f = detail::forcing(Z, p, m);
    IVector v(M);
    for (std::size_t k = 0; k < M; ++k) v[k] = detail::sweep(X.finite[k], f.N[k], e[k], g[k]);
    double Cabs = detail::absorbing_tail_constant(f.cube, M, X.tail.s, p);
    TailBound t = X.tail;
    t.C = std::max(X.tail.C, Cabs);
    t.q = detail::gcd_support(X.tail.C != 0 ? X.tail.q : 0, Cabs != 0 ? f.cube.q : 0);
    return ScbSet(std::move(v), t);
  };
  auto inflate_set = [&](const ScbSet& Z, double factor, double abs_scale) {
    ScbSet W = Z;
    for (std::size_t k = 0; k < M; ++k) {
      const Interval& z = Z.finite[k];
      if (z.is_zero()) continue;
      double abs_eps = rnd::mul_up(abs_scale, k < m ? cfg.abs_inflation : rnd::mul_up(cfg.abs_inflation, max_abs(z)));
      W.finite[k] = inflate(z, factor, abs_eps);
    }
    W.tail.C = rnd::mul_up(Z.tail.C, factor);
    return W;
  };
  // plain iteration with a fixed inflation; the excess (factor - 1 and the
  // absolute term) doubles every fifth retry
  double excess = cfg.inflation - 1.0, scale = 1.0;
  ScbSet Z = inflate_set(image(X), 1.0 + excess, 1.0);
  std::string why;
  for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
    ScbSet Zn = image(Z);
    bool ok = Zn.tail.C == 0 || (Zn.tail.C < Z.tail.C && Zn.tail.q % Z.tail.q == 0);
    if (!ok) why = "tail C " + format_double(Zn.tail.C) + " vs " + format_double(Z.tail.C);
    for (std::size_t k = 0; k < M && ok; ++k) {
      const Interval& a = Zn.finite[k];
      const Interval& b = Z.finite[k];
      ok = a.is_zero() ? b.contains(a) : b.interior_contains(a);
      if (!ok) {
        std::ostringstream os;
        os << "mode " << k + 1 << ": " << a << " not inside " << b;
        why = os.str();
      }
    }
    if (ok) return Zn;
    if ((attempt + 1) % 5 == 0) {
      excess *= 2;
      scale *= 2;
    }
    Z = inflate_set(Zn, 1.0 + excess, scale);
  }
  throw std::runtime_error("rough_enclosure: validation failed, step size too large (" + why + ")");
}

// Tail constant after a step of length h from X, with rough enclosure Z.
inline TailBound advance_tail(const ScbSet& X, const ScbSet& Z, double h, const OkParams& p) {
  const std::size_t M = X.M();
  detail::check_dissipative(M, p);
  TailBound t = X.tail;
  t.start = static_cast<int>(M) + 1;
  SeqBound cube = p.nonlinear ? cube_bounds(to_standard(Z)) : seq_from(IVector(3 * M));
  double Cabs = detail::absorbing_tail_constant(cube, M, X.tail.s, p);
  // |a_k(h)| k^s <= e^{mu_k h} C + (1 - e^{mu_k h}) Cabs <= e^{mu_{M+1} h} C + Cabs
  double decay = exp(linear_eigenvalue(static_cast<long>(M) + 1, p) * Interval(h)).hi();
  t.C = std::min(rnd::add_up(rnd::mul_up(decay, X.tail.C), Cabs), std::max(X.tail.C, Cabs));
  t.q = detail::gcd_support(X.tail.C != 0 ? X.tail.q : 0, Cabs != 0 ? cube.q : 0);
  return t;
}

// Fills orders 1..max_order of a series whose order 0 is set; forcing is added at order 1.
inline void taylor_coefficients(JetSeries& s, const OkParams& p, const std::vector<Interval>& mu,
                                const IVector* forcing, CubicConvolver& conv) {
  const std::size_t m = s.m(), nc = s.ncomp();
  std::vector<Interval> cube;
  std::vector<Interval> kappa_k2(m + 1);
  for (std::size_t k = 1; k <= m; ++k) kappa_k2[k] = p.kappa() * sqr(Interval(static_cast<double>(k)));
  if (p.nonlinear) conv.reset(s);
  for (std::size_t r = 0; r < s.max_order(); ++r) {
    if (p.nonlinear) {
      conv.push_order(r);
      conv.cube(r, cube);
    }
    Interval denom(static_cast<double>(r + 1));
    for (std::size_t c = 0; c < nc; ++c) {
      const Interval* x = s.row(r, c);
      Interval* y = s.row(r + 1, c);
      for (std::size_t k = 1; k <= m; ++k) {
        Interval v = x[k].is_zero() ? Interval(0.0) : mu[k] * x[k];
        if (p.nonlinear) {
          const Interval& cu = cube[c * (m + 1) + k];
          if (!cu.is_zero()) v -= kappa_k2[k] * cu;
        }
        if (r == 0 && c == 0 && forcing && !(*forcing)[k - 1].is_zero()) v += (*forcing)[k - 1];
        y[k] = v.is_zero() ? Interval(0.0) : v / denom;
      }
    }
  }
}

// sum_r s^{[r]}_{c,k} h^r by Horner, k = 1..m.
inline IVector horner(const JetSeries& s, std::size_t comp, std::size_t upto, const Interval& h) {
  IVector v(s.m());
  for (std::size_t k = 1; k <= s.m(); ++k) {
    Interval acc = s.at(upto, comp, k);
    for (std::size_t r = upto; r-- > 0;) acc = acc * h + s.at(r, comp, k);
    v[k - 1] = acc;
  }
  return v;
}

namespace detail {

inline Eigen::MatrixXd mid_matrix(const IMatrix& a) {
  Eigen::MatrixXd r(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) r(i, j) = a(i, j).mid();
  return r;
}

// Connected components of the graph with an edge i - j whenever b(i,j) != 0.
inline std::vector<std::vector<std::size_t>> components(const IMatrix& b) {
  std::size_t n = b.rows();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<std::size_t(std::size_t)> find = [&](std::size_t i) {
    return parent[i] == i ? i : parent[i] = find(parent[i]);
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (!b(i, j).is_zero()) parent[find(i)] = find(j);
  std::vector<std::vector<std::size_t>> out;
  std::vector<long> slot(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r = find(i);
    if (slot[r] < 0) {
      slot[r] = static_cast<long>(out.size());
      out.emplace_back();
    }
    out[slot[r]].push_back(i);
  }
  return out;
}

}  // namespace detail

// Orthogonal frame Q for B (QR of mid B with columns ordered by |B_j| rad(r0_j)),
// computed blockwise on the zero pattern of B, and an enclosure of Q^{-1}.
inline std::pair<IMatrix, IMatrix> lohner_frame(const IMatrix& B, const IVector& r0) {
  const std::size_t n = B.rows();
  IMatrix Q(n, n), Qinv(n, n);
  Eigen::MatrixXd Bm = detail::mid_matrix(B);
  for (const auto& comp : detail::components(B)) {
    const std::size_t s = comp.size();
    std::vector<double> score(s);
    for (std::size_t j = 0; j < s; ++j) {
      double col = 0;
      for (std::size_t i = 0; i < s; ++i) col += Bm(comp[i], comp[j]) * Bm(comp[i], comp[j]);
      score[j] = std::sqrt(col) * r0[comp[j]].rad();
    }
    std::vector<std::size_t> order(s);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
    Eigen::MatrixXd Bs(s, s);
    for (std::size_t i = 0; i < s; ++i)
      for (std::size_t j = 0; j < s; ++j) Bs(i, j) = Bm(comp[i], comp[order[j]]);
    Eigen::MatrixXd Qs = Eigen::HouseholderQR<Eigen::MatrixXd>(Bs).householderQ();
    IMatrix Qi(s, s), Qt(s, s);
    for (std::size_t i = 0; i < s; ++i)
      for (std::size_t j = 0; j < s; ++j) {
        Qi(i, j) = Interval(Qs(i, j));
        Qt(j, i) = Interval(Qs(i, j));
      }
    IMatrix Qsinv = inverse_enclosure(Qi, Qt);
    for (std::size_t i = 0; i < s; ++i)
      for (std::size_t j = 0; j < s; ++j) {
        Q(comp[i], comp[j]) = Qi(i, j);
        Qinv(comp[i], comp[j]) = Qsinv(i, j);
      }
  }
  return {Q, Qinv};
}

// Componentwise bound E on |x(t) - y(t)|, t in [0, h], between solutions of
// x' = f(x) + delta(t), y' = f(y) + mid(delta) from the same point, with
// J enclosing Df on the rough enclosure and w bounding |x - y| a priori.
inline std::vector<double> inclusion_error(const IMatrix& J, const IVector& delta, const std::vector<double>& w, double h,
                                           int iterations) {
  const std::size_t n = J.rows();
  std::vector<double> E = w, gk(n), rd(n);
  for (std::size_t i = 0; i < n; ++i) {
    gk[i] = expm1_over(Interval(J(i, i).hi()), h).hi();
    rd[i] = delta[i].is_zero() ? 0.0 : delta[i].rad();
  }
  for (int it = 0; it < iterations; ++it) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      double s = rd[i];
      for (std::size_t j = 0; j < n; ++j)
        if (j != i && E[j] != 0) s = rnd::add_up(s, rnd::mul_up(max_abs(J(i, j)), E[j]));
      double v = rnd::mul_up(s, gk[i]);
      if (v < E[i]) {
        E[i] = v;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return E;
}

struct StepReport {
  long step = 0;
  double time = 0.0;
  ScbSet rough;
  ScbSet set;  // standard coordinates after the step
  long k_maxwidth = 0;
  double maxwidth = 0.0;
  double tailC = 0.0;
  long pending = -1;  // coordinates not yet inside the target, -1 when not checked
};

class Integrator {
 public:
  Integrator(OkParams p, IntegratorConfig cfg)
      : p_(std::move(p)), cfg_(std::move(cfg)), conv_(make_convolver(cfg_.backend, cfg_.fft_nodes)) {
    mu_ = linear_eigenvalues(cfg_.m, p_);
  }

  const IntegratorConfig& config() const { return cfg_; }
  CubicConvolver& convolver() { return *conv_; }

  // One step of length h; rough is set to the validated enclosure used.
  LohnerSet step(const LohnerSet& S, ScbSet* rough_out = nullptr) {
    const std::size_t m = S.m(), M = S.M();
    const std::size_t p = static_cast<std::size_t>(cfg_.order);
    const double h = cfg_.h;
    const Interval ih(h);
    ScbSet X = S.to_scb();
    ScbSet Z = rough_enclosure(X, h, p_, m, cfg_);
    detail::Forcing fZ = detail::forcing(Z, p_, m);
    IVector dc(m), dr(m);
    for (std::size_t i = 0; i < m; ++i) dc[i] = Interval(fZ.delta[i].is_zero() ? 0.0 : fZ.delta[i].mid());

    // Taylor polynomial at the center
    JetSeries cs(m, 0, p);
    for (std::size_t k = 1; k <= m; ++k) cs.at(0, 0, k) = Interval(S.xbar[k - 1]);
    taylor_coefficients(cs, p_, mu_, &dc, *conv_);
    IVector y = horner(cs, 0, p, ih);

    // Lagrange remainder on the rough enclosure
    JetSeries zs(m, 0, p + 1);
    for (std::size_t k = 1; k <= m; ++k) zs.at(0, 0, k) = Z.finite[k - 1];
    taylor_coefficients(zs, p_, mu_, &dc, *conv_);
    Interval hp = pow_int(ih, static_cast<unsigned>(p + 1));
    for (std::size_t k = 1; k <= m; ++k) {
      const Interval& c = zs.at(p + 1, 0, k);
      if (!c.is_zero()) y[k - 1] += hp * c;
    }

    // derivative of the Taylor polynomial over X
    JetSeries js(m, m, p);
    IVector Xf = project(X, m);
    for (std::size_t k = 1; k <= m; ++k) {
      js.at(0, 0, k) = Xf[k - 1];
      js.at(0, k, k) = Interval(1.0);
    }
    taylor_coefficients(js, p_, mu_, &dc, *conv_);
    IMatrix A(m, m);
    for (std::size_t j = 1; j <= m; ++j) {
      IVector col = horner(js, j, p, ih);
      for (std::size_t k = 1; k <= m; ++k) A(k - 1, j - 1) = col[k - 1];
    }

    // differential inclusion: |delta - mid delta|
    if (p_.nonlinear) {
      IVector Zf = project(Z, m);
      ConvBounds cb = conv_bounds(ScbSet(Zf, TailBound{0.0, Z.tail.s, 0, 1}));
      IMatrix J = jacobian_enclosure(Z, cb, p_, m);
      std::vector<double> w(m);
      for (std::size_t i = 0; i < m; ++i) w[i] = Zf[i].is_zero() ? 0.0 : Zf[i].width();
      std::vector<double> E = inclusion_error(J, fZ.delta, w, h, cfg_.kz_iterations);
      for (std::size_t i = 0; i < m; ++i)
        if (E[i] > 0) y[i] += Interval::symmetric(E[i]);
    }

    // Lohner reorganization
    IMatrix B = A * S.C;
    auto [Q, Qinv] = lohner_frame(B, S.r0);
    LohnerSet out;
    out.C = Q;
    out.r0 = mat_vec(Qinv * B, S.r0);
    out.xbar = y.mid();
    IVector rc(m);
    for (std::size_t i = 0; i < m; ++i) rc[i] = y[i] - Interval(out.xbar[i]);
    out.r = mat_vec(A, S.r) + rc;

    // mid zone and tail
    out.mid = IVector(M - m);
    for (std::size_t k = m + 1; k <= M; ++k) {
      Interval mu = linear_eigenvalue(static_cast<long>(k), p_);
      Interval e = exp(mu * ih), g = expm1_over(mu, h);
      out.mid[k - m - 1] = detail::endpoint(X.finite[k - 1], fZ.N[k - 1], e, g);
    }
    out.tail = advance_tail(X, Z, h, p_);
    if (rough_out) *rough_out = std::move(Z);
    return out;
  }

 private:
  OkParams p_;
  IntegratorConfig cfg_;
  std::unique_ptr<CubicConvolver> conv_;
  std::vector<Interval> mu_;
};

inline void fill_width_stats(StepReport& rep) {
  rep.maxwidth = 0;
  rep.k_maxwidth = 0;
  for (std::size_t k = 1; k <= rep.set.M(); ++k) {
    double w = rep.set.finite[k - 1].width();
    if (w > rep.maxwidth) {
      rep.maxwidth = w;
      rep.k_maxwidth = static_cast<long>(k);
    }
  }
  rep.tailC = rep.set.tail.C;
}

// Step log: one tab-separated line per step and a full set dump every
// dump_every steps (including step 0).
class StepLog {
 public:
  explicit StepLog(std::ostream& os, long dump_every = 100) : os_(os), every_(dump_every) {}

  void header() { os_ << "# step\ttime\tk_maxwidth\tmaxwidth\ttailC\tinclusion_pending_count\n"; }

  void write(const StepReport& r) {
    os_ << r.step << '\t' << format_double(r.time) << '\t' << r.k_maxwidth << '\t' << format_double(r.maxwidth) << '\t'
        << format_double(r.tailC) << '\t' << r.pending << '\n';
    if (every_ > 0 && r.step % every_ == 0) write_scb(os_, r.set);
  }

 private:
  std::ostream& os_;
  long every_;
};

struct IntegrationResult {
  LohnerSet final_lohner;
  ScbSet final_set;
  long steps_done = 0;
  bool stopped_early = false;
};

// Observer returns true to stop after the reported step.
using StepObserver = std::function<bool(const LohnerSet&, StepReport&)>;

inline IntegrationResult integrate(const ScbSet& initial, long steps, const OkParams& p, const IntegratorConfig& cfg,
                                   const StepObserver& observer = {}) {
  if (steps < 0) throw std::invalid_argument("integrate: negative step count");
  Integrator integ(p, cfg);
  LohnerSet S = LohnerSet::from_scb(initial, cfg.m);
  IntegrationResult res;
  StepReport rep0;
  rep0.set = S.to_scb();
  fill_width_stats(rep0);
  if (observer && observer(S, rep0)) {
    res.final_lohner = S;
    res.final_set = rep0.set;
    res.stopped_early = true;
    return res;
  }
  for (long n = 1; n <= steps; ++n) {
    StepReport rep;
    try {
      S = integ.step(S, &rep.rough);
    } catch (const std::exception& e) {
      throw StepError(n, "step " + std::to_string(n) + ": " + e.what());
    }
    rep.step = n;
    rep.time = static_cast<double>(n) * cfg.h;
    rep.set = S.to_scb();
    fill_width_stats(rep);
    res.steps_done = n;
    if (observer && observer(S, rep)) {
      res.stopped_early = n < steps;
      res.final_lohner = S;
      res.final_set = rep.set;
      return res;
    }
  }
  res.final_lohner = S;
  res.final_set = S.to_scb();
  return res;
}

// Time-T version; T must be an integer multiple of h.
inline ScbSet integrate(const ScbSet& initial, double T, const OkParams& p, const IntegratorConfig& cfg) {
  double n = std::round(T / cfg.h);
  if (std::fabs(n * cfg.h - T) > 1e-9 * std::max(1.0, std::fabs(T)))
    throw std::invalid_argument("integrate: T is not a multiple of h");
  return integrate(initial, static_cast<long>(n), p, cfg).final_set;
}

}  // namespace okflow
