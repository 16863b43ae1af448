#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "okflow/interval.hpp"
#include "okflow/taylor_jets.hpp"

namespace okflow {

// Cubic convolution of normalized Taylor coefficients. For a bound series,
// cube(r) writes (u*u*u)^{[r]}_k into component 0 and the partials
// 3 sum_a (u*u)^{[a]} * du^{[r-a]} into components 1..P, for k = 0..m.
// Orders must be pushed (coefficients final) before they are used.
class CubicConvolver {
 public:
  virtual ~CubicConvolver() = default;
  virtual void reset(const JetSeries& series) = 0;
  virtual void push_order(std::size_t r) = 0;
  virtual void cube(std::size_t r, std::vector<Interval>& out) = 0;
  virtual std::string name() const = 0;
};

class DirectConvolver final : public CubicConvolver {
 public:
  void reset(const JetSeries& series) override {
    s_ = &series;
    pushed_ = 0;
  }
  void push_order(std::size_t r) override {
    if (r != pushed_) throw std::logic_error("DirectConvolver: orders must be pushed in sequence");
    ++pushed_;
  }
  std::string name() const override { return "direct"; }

  // Triple sum over order splits r1+r2+r3 = r and index splits j1+j2+j3 = k.
  void cube(std::size_t r, std::vector<Interval>& out) override {
    if (r >= pushed_) throw std::logic_error("DirectConvolver: order not pushed");
    const JetSeries& s = *s_;
    const long m = static_cast<long>(s.m());
    const std::size_t nc = s.ncomp();
    out.assign(nc * (m + 1), Interval(0.0));
    auto val = [&](std::size_t order, std::size_t comp, long j) -> const Interval& {
      return s.at(order, comp, static_cast<std::size_t>(j < 0 ? -j : j));
    };
    const Interval three(3.0);
    for (std::size_t r1 = 0; r1 <= r; ++r1)
      for (std::size_t r2 = 0; r1 + r2 <= r; ++r2) {
        std::size_t r3 = r - r1 - r2;
        for (long k = 1; k <= m; ++k) {
          Interval acc(0.0);
          std::vector<Interval> dacc(nc, Interval(0.0));
          for (long j1 = -m; j1 <= m; ++j1) {
            for (long j2 = -m; j2 <= m; ++j2) {
              long j3 = k - j1 - j2;
              if (j3 < -m || j3 > m) continue;
              const Interval& b = val(r2, 0, j2);
              const Interval& c = val(r3, 0, j3);
              if (b.is_zero() || c.is_zero()) continue;
              Interval bc = b * c;
              const Interval& a = val(r1, 0, j1);
              if (!a.is_zero()) acc += a * bc;
              for (std::size_t comp = 1; comp < nc; ++comp) {
                const Interval& da = val(r1, comp, j1);
                if (!da.is_zero()) dacc[comp] += da * bc;
              }
            }
          }
          out[k] += acc;
          for (std::size_t comp = 1; comp < nc; ++comp)
            if (!dacc[comp].is_zero()) out[comp * (m + 1) + k] += three * dacc[comp];
        }
      }
  }

 private:
  const JetSeries* s_ = nullptr;
  std::size_t pushed_ = 0;
};

struct CInterval {
  Interval re, im;

  friend CInterval operator+(const CInterval& a, const CInterval& b) { return {a.re + b.re, a.im + b.im}; }
  friend CInterval operator-(const CInterval& a, const CInterval& b) { return {a.re - b.re, a.im - b.im}; }
  friend CInterval operator*(const CInterval& a, const CInterval& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
};

// Radix-2 plan with rigorously enclosed twiddles exp(-2 pi i t / size).
class FftPlan {
 public:
  explicit FftPlan(std::size_t size) : n_(size) {
    if (size < 2 || (size & (size - 1)) != 0) throw std::invalid_argument("FftPlan: size must be a power of two >= 2");
    std::size_t L = 0;
    while ((std::size_t{1} << L) < size) ++L;
    // rot[i] = exp(-i pi / 2^{L-1-i}); cos and sin of pi/2^e by half angles
    std::vector<Interval> c(L + 1), s(L + 1);
    c[0] = Interval(-1.0);
    s[0] = Interval(0.0);
    if (L >= 1) {
      c[1] = Interval(0.0);
      s[1] = Interval(1.0);
    }
    for (std::size_t e = 2; e <= L; ++e) {
      Interval half(0.5);
      c[e] = sqrt(half * (Interval(1.0) + c[e - 1]));
      s[e] = sqrt(half * (Interval(1.0) - c[e - 1]));
    }
    std::vector<CInterval> rot(L);
    for (std::size_t i = 0; i < L; ++i) {
      std::size_t e = L - 1 - i;
      rot[i] = {c[e], -s[e]};
    }
    w_.resize(n_);
    for (std::size_t t = 0; t < n_; ++t) {
      CInterval z{Interval(1.0), Interval(0.0)};
      for (std::size_t i = 0; i < L; ++i)
        if (t & (std::size_t{1} << i)) z = z * rot[i];
      w_[t] = z;
    }
    log2_ = L;
  }

  std::size_t size() const { return n_; }
  const CInterval& twiddle(std::size_t t) const { return w_[t % n_]; }

  // In-place transform; inverse uses conjugate twiddles and omits the 1/n scaling.
  void transform(std::vector<CInterval>& a, bool inverse) const {
    if (a.size() != n_) throw std::invalid_argument("FftPlan: size mismatch");
    for (std::size_t i = 1, j = 0; i < n_; ++i) {
      std::size_t bit = n_ >> 1;
      for (; j & bit; bit >>= 1) j ^= bit;
      j ^= bit;
      if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n_; len <<= 1) {
      std::size_t step = n_ / len;
      for (std::size_t i = 0; i < n_; i += len)
        for (std::size_t j = 0; j < len / 2; ++j) {
          CInterval w = w_[j * step];
          if (inverse) w.im = -w.im;
          CInterval u = a[i + j];
          CInterval v = j == 0 ? a[i + j + len / 2] : a[i + j + len / 2] * w;
          a[i + j] = u + v;
          a[i + j + len / 2] = u - v;
        }
    }
  }

 private:
  std::size_t n_ = 0, log2_ = 0;
  std::vector<CInterval> w_;
};

// Interval DFT of a complex array (forward, exp(-2 pi i jn/N)).
inline std::vector<CInterval> fft_forward(std::vector<CInterval> a, const FftPlan& plan) {
  plan.transform(a, false);
  return a;
}

inline std::vector<CInterval> fft_inverse(std::vector<CInterval> a, const FftPlan& plan) {
  plan.transform(a, true);
  Interval scale = Interval(1.0) / Interval(static_cast<double>(plan.size()));
  for (auto& z : a) z = {z.re * scale, z.im * scale};
  return a;
}

// Grid values sum_j x_{|j|} e^{-2 pi i j n / size} of the even extension of
// x_0..x_m, nodes n = 0..size/2. The exact transform of even real data is real
// and even, so the imaginary enclosure is dropped.
inline std::vector<Interval> cosine_forward(const Interval* x, std::size_t m, const FftPlan& plan) {
  std::size_t n = plan.size();
  if (n <= 2 * m) throw std::invalid_argument("cosine_forward: grid too small for the even extension");
  std::vector<CInterval> a(n, CInterval{Interval(0.0), Interval(0.0)});
  a[0].re = x[0];
  for (std::size_t j = 1; j <= m; ++j) {
    a[j].re = x[j];
    a[n - j].re = x[j];
  }
  plan.transform(a, false);
  std::vector<Interval> g(n / 2 + 1);
  for (std::size_t i = 0; i <= n / 2; ++i) g[i] = a[i].re;
  return g;
}

// Coefficients k = 0..m of the even real sequence whose grid values are g (nodes 0..size/2).
inline std::vector<Interval> cosine_inverse(const std::vector<Interval>& g, std::size_t m, const FftPlan& plan) {
  std::size_t n = plan.size();
  std::vector<CInterval> a(n, CInterval{Interval(0.0), Interval(0.0)});
  for (std::size_t i = 0; i <= n / 2; ++i) {
    a[i].re = g[i];
    if (i != 0 && i != n / 2) a[n - i].re = g[i];
  }
  plan.transform(a, true);
  Interval scale = Interval(1.0) / Interval(static_cast<double>(n));
  std::vector<Interval> x(m + 1);
  for (std::size_t k = 0; k <= m; ++k) x[k] = a[k].re * scale;
  return x;
}

// Smallest power-of-two cosine grid N with N >= pad * m + 1 (pad in {2, 3}).
inline std::size_t fft_size_for(std::size_t m, int pad) {
  if (pad != 2 && pad != 3) throw std::invalid_argument("fft padding must be 2 or 3");
  std::size_t need = static_cast<std::size_t>(pad) * m + 1, n = 2;
  while (n < need) n <<= 1;
  return n;
}

// Cubic convolution through cached grid values (L-coefficients) on a cosine
// grid of N nodes; the even extension has period 2N > 4m, so the cube (support
// |k| <= 3m) never aliases onto the retained modes |k| <= m.
//
// Inputs are split as u = c + [-w, w]. The cube of the centers c is
// transformed as point data; the radius is bounded by A*A*A - |c|*|c|*|c|
// with A = |c| + w, both nonnegative convolutions. Transforming interval
// data directly would smear the widths of every mode over all outputs.
class FftConvolver final : public CubicConvolver {
 public:
  explicit FftConvolver(std::size_t cosine_nodes) : N_(cosine_nodes), plan_(2 * cosine_nodes) {}

  std::size_t cosine_nodes() const { return N_; }
  std::string name() const override { return "fft"; }

  void reset(const JetSeries& series) override {
    if (N_ <= 2 * series.m()) throw std::invalid_argument("FftConvolver: N_fft must exceed 2m");
    s_ = &series;
    for (auto& l : L_) l.clear();
    for (auto& q : S_) q.clear();
    support_.assign(series.ncomp(), std::vector<char>(series.m() + 1, 0));
    wide_.assign(series.ncomp(), 0);
  }

  void push_order(std::size_t r) override {
    if (r != L_[0].size()) throw std::logic_error("FftConvolver: orders must be pushed in sequence");
    const JetSeries& s = *s_;
    const std::size_t m = s.m(), nc = s.ncomp();
    std::vector<Interval> center(m + 1), mag(m + 1), cabs(m + 1);
    for (auto& l : L_) l.emplace_back(nc);
    for (std::size_t c = 0; c < nc; ++c) {
      const Interval* row = s.row(r, c);
      bool any = false, wide = false;
      for (std::size_t k = 0; k <= m; ++k) {
        if (row[k].is_zero()) {
          center[k] = mag[k] = cabs[k] = Interval(0.0);
          continue;
        }
        support_[c][k] = 1;
        any = true;
        double mid = row[k].mid(), rad = row[k].rad();
        center[k] = Interval(mid);
        cabs[k] = Interval(std::fabs(mid));
        mag[k] = Interval(rnd::add_up(std::fabs(mid), rad));
        wide = wide || rad > 0;
      }
      wide_[c] = wide_[c] || wide;
      std::vector<Interval> zero(N_ + 1, Interval(0.0));
      L_[0][r][c] = any ? cosine_forward(center.data(), m, plan_) : zero;
      L_[1][r][c] = any ? cosine_forward(mag.data(), m, plan_) : zero;
      L_[2][r][c] = any ? cosine_forward(cabs.data(), m, plan_) : zero;
    }
    // (u*u)^{[r]} on the grid, pairing b with r - b
    for (std::size_t ch = 0; ch < 3; ++ch) {
      const auto& L = L_[ch];
      std::vector<Interval> sq(N_ + 1, Interval(0.0));
      for (std::size_t n = 0; n <= N_; ++n) {
        Interval acc(0.0);
        for (std::size_t b = 0; 2 * b < r; ++b) acc += Interval(2.0) * (L[b][0][n] * L[r - b][0][n]);
        if (r % 2 == 0) acc += sqr(L[r / 2][0][n]);
        sq[n] = acc;
      }
      S_[ch].push_back(std::move(sq));
    }
  }

  void cube(std::size_t r, std::vector<Interval>& out) override {
    if (r >= L_[0].size()) throw std::logic_error("FftConvolver: order not cached");
    const JetSeries& s = *s_;
    const std::size_t m = s.m(), nc = s.ncomp();
    out.assign(nc * (m + 1), Interval(0.0));
    std::vector<char> sq_support = sumset(support_[0], support_[0]);
    const Interval three(3.0);
    for (std::size_t c = 0; c < nc; ++c) {
      std::vector<char> sup = sumset_wide(sq_support, support_[c], m);
      bool any = false;
      for (char v : sup) any = any || v;
      if (!any) continue;
      std::vector<Interval> x = channel(0, r, c, m);
      std::vector<Interval> hi, lo;
      bool wide = wide_[0] || wide_[c];
      if (wide) {
        hi = channel(1, r, c, m);
        lo = channel(2, r, c, m);
      }
      for (std::size_t k = 1; k <= m; ++k) {
        if (!sup[k]) continue;
        Interval v = x[k];
        if (wide) v += Interval::symmetric(std::max(0.0, rnd::sub_up(hi[k].hi(), lo[k].lo())));
        out[c * (m + 1) + k] = c == 0 ? v : three * v;
      }
    }
  }

 private:
  // Supports are sets of nonnegative indices of even sequences.
  static std::vector<char> sumset(const std::vector<char>& a, const std::vector<char>& b) {
    std::size_t n = a.size() + b.size() - 1;
    std::vector<char> r(n, 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!a[i]) continue;
      for (std::size_t j = 0; j < b.size(); ++j) {
        if (!b[j]) continue;
        r[i + j] = 1;
        r[i > j ? i - j : j - i] = 1;
      }
    }
    return r;
  }
  static std::vector<char> sumset_wide(const std::vector<char>& a, const std::vector<char>& b, std::size_t m) {
    std::vector<char> r = sumset(a, b);
    r.resize(m + 1);
    return r;
  }

  std::size_t N_;
  FftPlan plan_;
  const JetSeries* s_ = nullptr;
  // sum_a (u*u)^{[a]} u_c^{[r-a]} of one channel, transformed back
  std::vector<Interval> channel(std::size_t ch, std::size_t r, std::size_t c, std::size_t m) const {
    std::vector<Interval> g(N_ + 1);
    for (std::size_t n = 0; n <= N_; ++n) {
      Interval acc(0.0);
      for (std::size_t a = 0; a <= r; ++a) acc += S_[ch][a][n] * L_[ch][r - a][c][n];
      g[n] = acc;
    }
    return cosine_inverse(g, m, plan_);
  }

  // channels: centers, magnitudes |c| + w, |c|
  std::array<std::vector<std::vector<std::vector<Interval>>>, 3> L_;  // [channel][order][comp][node]
  std::array<std::vector<std::vector<Interval>>, 3> S_;               // [channel][order][node]
  std::vector<std::vector<char>> support_;
  std::vector<char> wide_;
};

inline std::unique_ptr<CubicConvolver> make_convolver(const std::string& backend, std::size_t fft_nodes) {
  if (backend == "fft") return std::make_unique<FftConvolver>(fft_nodes);
  if (backend == "direct") return std::make_unique<DirectConvolver>();
  throw std::invalid_argument("unknown convolution backend '" + backend + "'");
}

}  // namespace okflow
