#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace okflow {

// Directed rounding is emulated from round-to-nearest results: the exact
// error of +, *, / and sqrt is recovered with two-sum / fma, and the result is
// nudged one ulp only when the rounding went the wrong way. Exact results stay
// exact, so zero stays zero.
namespace rnd {

inline constexpr double inf = std::numeric_limits<double>::infinity();

// Below this magnitude the fma residual of a product may itself underflow.
inline constexpr double kTinyProduct = 0x1p-960;

inline double down(double x) { return std::nextafter(x, -inf); }
inline double up(double x) { return std::nextafter(x, inf); }

inline double add_down(double a, double b) {
  double s = a + b;
  if (!std::isfinite(s)) return s == inf ? std::numeric_limits<double>::max() : s;
  double bb = s - a;
  double err = (a - (s - bb)) + (b - bb);
  return err < 0 ? down(s) : s;
}

inline double add_up(double a, double b) {
  double s = a + b;
  if (!std::isfinite(s)) return s == -inf ? -std::numeric_limits<double>::max() : s;
  double bb = s - a;
  double err = (a - (s - bb)) + (b - bb);
  return err > 0 ? up(s) : s;
}

inline double sub_down(double a, double b) { return add_down(a, -b); }
inline double sub_up(double a, double b) { return add_up(a, -b); }

inline double mul_down(double a, double b) {
  double p = a * b;
  if (a == 0 || b == 0) return 0.0;
  if (std::fabs(p) < kTinyProduct) return down(p);
  double e = std::fma(a, b, -p);
  return e < 0 ? down(p) : p;
}

inline double mul_up(double a, double b) {
  double p = a * b;
  if (a == 0 || b == 0) return 0.0;
  if (std::fabs(p) < kTinyProduct) return up(p);
  double e = std::fma(a, b, -p);
  return e > 0 ? up(p) : p;
}

inline double div_down(double a, double b) {
  double q = a / b;
  if (a == 0) return 0.0;
  if (std::fabs(q) < kTinyProduct || !std::isfinite(q)) return down(q);
  double r = std::fma(-q, b, a);  // a - q*b, exact
  // sign of (a/b - q) equals sign of r/b
  bool below = (r > 0 && b < 0) || (r < 0 && b > 0);
  return below ? down(q) : q;
}

inline double div_up(double a, double b) {
  double q = a / b;
  if (a == 0) return 0.0;
  if (std::fabs(q) < kTinyProduct || !std::isfinite(q)) return up(q);
  double r = std::fma(-q, b, a);
  bool above = (r > 0 && b > 0) || (r < 0 && b < 0);
  return above ? up(q) : q;
}

inline double sqrt_down(double a) {
  if (a <= 0) return 0.0;
  double s = std::sqrt(a);
  double r = std::fma(-s, s, a);
  return r < 0 ? down(s) : s;
}

inline double sqrt_up(double a) {
  if (a <= 0) return 0.0;
  double s = std::sqrt(a);
  double r = std::fma(-s, s, a);
  return r > 0 ? up(s) : s;
}

}  // namespace rnd

class Interval {
 public:
  constexpr Interval() = default;
  constexpr Interval(double x) : lo_(x), hi_(x) {}  // NOLINT: point intervals convert implicitly
  Interval(double lo, double hi) : lo_(lo), hi_(hi) {
    if (!(lo <= hi)) throw std::invalid_argument("Interval: lo > hi or NaN endpoint");
  }

  static Interval hull(double a, double b) { return a <= b ? Interval(a, b) : Interval(b, a); }
  static Interval symmetric(double r) { return Interval(-std::fabs(r), std::fabs(r)); }

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double mid() const {
    double m = 0.5 * lo_ + 0.5 * hi_;
    return std::clamp(m, lo_, hi_);
  }
  double width() const { return rnd::sub_up(hi_, lo_); }
  double rad() const {
    double m = mid();
    return std::max(rnd::sub_up(hi_, m), rnd::sub_up(m, lo_));
  }
  bool is_point() const { return lo_ == hi_; }
  bool is_zero() const { return lo_ == 0 && hi_ == 0; }
  bool contains(double x) const { return lo_ <= x && x <= hi_; }
  bool contains(const Interval& o) const { return lo_ <= o.lo_ && o.hi_ <= hi_; }
  bool interior_contains(const Interval& o) const { return lo_ < o.lo_ && o.hi_ < hi_; }

  Interval operator-() const { return raw(-hi_, -lo_); }

  Interval& operator+=(const Interval& o) { return *this = *this + o; }
  Interval& operator-=(const Interval& o) { return *this = *this - o; }
  Interval& operator*=(const Interval& o) { return *this = *this * o; }

  friend Interval operator+(const Interval& a, const Interval& b) {
    return raw(rnd::add_down(a.lo_, b.lo_), rnd::add_up(a.hi_, b.hi_));
  }
  friend Interval operator-(const Interval& a, const Interval& b) {
    return raw(rnd::sub_down(a.lo_, b.hi_), rnd::sub_up(a.hi_, b.lo_));
  }
  friend Interval operator*(const Interval& a, const Interval& b) {
    if (a.lo_ >= 0 && b.lo_ >= 0)
      return raw(rnd::mul_down(a.lo_, b.lo_), rnd::mul_up(a.hi_, b.hi_));
    if (a.hi_ <= 0 && b.hi_ <= 0)
      return raw(rnd::mul_down(a.hi_, b.hi_), rnd::mul_up(a.lo_, b.lo_));
    if (a.is_point() && b.is_point())
      return raw(rnd::mul_down(a.lo_, b.lo_), rnd::mul_up(a.lo_, b.lo_));
    double lo = std::min({rnd::mul_down(a.lo_, b.lo_), rnd::mul_down(a.lo_, b.hi_),
                          rnd::mul_down(a.hi_, b.lo_), rnd::mul_down(a.hi_, b.hi_)});
    double hi = std::max({rnd::mul_up(a.lo_, b.lo_), rnd::mul_up(a.lo_, b.hi_),
                          rnd::mul_up(a.hi_, b.lo_), rnd::mul_up(a.hi_, b.hi_)});
    return raw(lo, hi);
  }
  // Division by an interval that does not contain zero.
  friend Interval operator/(const Interval& a, const Interval& b) {
    if (b.lo_ <= 0 && b.hi_ >= 0) throw std::domain_error("Interval division by interval containing 0");
    double lo = std::min({rnd::div_down(a.lo_, b.lo_), rnd::div_down(a.lo_, b.hi_),
                          rnd::div_down(a.hi_, b.lo_), rnd::div_down(a.hi_, b.hi_)});
    double hi = std::max({rnd::div_up(a.lo_, b.lo_), rnd::div_up(a.lo_, b.hi_),
                          rnd::div_up(a.hi_, b.lo_), rnd::div_up(a.hi_, b.hi_)});
    return raw(lo, hi);
  }

  friend bool operator==(const Interval& a, const Interval& b) { return a.lo_ == b.lo_ && a.hi_ == b.hi_; }
  friend bool operator!=(const Interval& a, const Interval& b) { return !(a == b); }

  friend std::ostream& operator<<(std::ostream& os, const Interval& x) {
    return os << '[' << x.lo_ << ',' << x.hi_ << ']';
  }

  // Trusted constructor for internal use where lo <= hi holds by construction.
  static Interval raw(double lo, double hi) {
    Interval r;
    r.lo_ = lo;
    r.hi_ = hi;
    return r;
  }

 private:
  double lo_ = 0.0;
  double hi_ = 0.0;
};

inline Interval add(const Interval& x, const Interval& y) { return x + y; }
inline Interval mul(const Interval& x, const Interval& y) { return x * y; }

inline double max_abs(const Interval& x) { return std::max(std::fabs(x.lo()), std::fabs(x.hi())); }
inline double min_abs(const Interval& x) {
  if (x.lo() <= 0 && x.hi() >= 0) return 0.0;
  return std::min(std::fabs(x.lo()), std::fabs(x.hi()));
}

inline Interval abs(const Interval& x) { return Interval::raw(min_abs(x), max_abs(x)); }

inline Interval sqr(const Interval& x) {
  double a = min_abs(x), b = max_abs(x);
  return Interval::raw(rnd::mul_down(a, a), rnd::mul_up(b, b));
}

inline Interval sqrt(const Interval& x) {
  if (x.hi() < 0) throw std::domain_error("sqrt of negative interval");
  return Interval::raw(rnd::sqrt_down(std::max(x.lo(), 0.0)), rnd::sqrt_up(x.hi()));
}

inline Interval hull(const Interval& a, const Interval& b) {
  return Interval::raw(std::min(a.lo(), b.lo()), std::max(a.hi(), b.hi()));
}

inline Interval intersect(const Interval& a, const Interval& b) {
  return Interval(std::max(a.lo(), b.lo()), std::min(a.hi(), b.hi()));
}

inline Interval inflate(const Interval& x, double factor, double abs_eps) {
  double m = x.mid();
  double r = rnd::add_up(rnd::mul_up(x.rad(), factor), abs_eps);
  return Interval::raw(rnd::sub_down(m, r), rnd::add_up(m, r));
}

inline Interval pow_int(Interval x, unsigned n) {
  Interval result(1.0);
  while (n) {
    if (n & 1u) result = result * x;
    n >>= 1u;
    if (n) x = sqr(x);
  }
  return result;
}

inline Interval pi_interval() { return Interval::raw(0x1.921fb54442d18p+1, 0x1.921fb54442d19p+1); }

namespace detail {

// Enclosure of exp(x) at a point, |x| <= 1/16 after halving; squared back up.
inline Interval exp_point(double x) {
  if (x == 0) return Interval(1.0);
  if (x < -745.2) return Interval::raw(0.0, std::numeric_limits<double>::denorm_min());
  if (x > 709.0) throw std::overflow_error("exp overflow");
  int k = 0;
  double y = x;
  while (std::fabs(y) > 0.0625) {
    y *= 0.5;  // exact
    ++k;
  }
  Interval iy(y);
  Interval sum(1.0), term(1.0);
  for (int n = 1; n <= 18; ++n) {
    term = term * iy / Interval(static_cast<double>(n));
    sum = sum + term;
  }
  // Lagrange remainder |y|^19/19! * e^{|y|} <= |y|^19/19! * 1.07
  double ay = std::fabs(y);
  double rem = 1.07;
  for (int n = 1; n <= 19; ++n) rem = rnd::mul_up(rem, rnd::div_up(ay, n));
  sum = sum + Interval::symmetric(rem);
  for (int i = 0; i < k; ++i) sum = sqr(sum);
  return Interval::raw(std::max(sum.lo(), 0.0), sum.hi());
}

}  // namespace detail

inline Interval exp(const Interval& x) {
  Interval a = detail::exp_point(x.lo());
  Interval b = x.is_point() ? a : detail::exp_point(x.hi());
  return Interval::raw(a.lo(), b.hi());
}

// (e^{l h} - 1) / l for l in x, h > 0; equals h when l = 0. Increasing in l.
inline Interval expm1_over(const Interval& l, double h) {
  auto at = [h](double v, bool upper) {
    double t = rnd::mul_up(std::fabs(v), h);
    if (t < 1e-3) {
      // h * (1 + v h / 2 + ...) bracketed by h*(1 - t/2) .. h*(1 + t) for small t
      if (upper) return v >= 0 ? rnd::mul_up(h, rnd::add_up(1.0, t)) : h;
      return v >= 0 ? h : rnd::mul_down(h, rnd::sub_down(1.0, 0.5 * t + t * t));
    }
    Interval g = (exp(Interval(v) * Interval(h)) - Interval(1.0)) / Interval(v);
    return upper ? g.hi() : g.lo();
  };
  return Interval::raw(at(l.lo(), false), at(l.hi(), true));
}

class IVector {
 public:
  IVector() = default;
  explicit IVector(std::size_t n, Interval fill = Interval(0.0)) : v_(n, fill) {}
  IVector(std::initializer_list<Interval> init) : v_(init) {}
  explicit IVector(std::vector<Interval> v) : v_(std::move(v)) {}

  std::size_t size() const { return v_.size(); }
  Interval& operator[](std::size_t i) { return v_[i]; }
  const Interval& operator[](std::size_t i) const { return v_[i]; }
  auto begin() { return v_.begin(); }
  auto end() { return v_.end(); }
  auto begin() const { return v_.begin(); }
  auto end() const { return v_.end(); }
  void resize(std::size_t n, Interval fill = Interval(0.0)) { v_.resize(n, fill); }
  void push_back(const Interval& x) { v_.push_back(x); }
  const std::vector<Interval>& data() const { return v_; }

  friend IVector operator+(const IVector& a, const IVector& b) {
    check(a, b);
    IVector r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
  }
  friend IVector operator-(const IVector& a, const IVector& b) {
    check(a, b);
    IVector r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
  }
  friend bool operator==(const IVector& a, const IVector& b) { return a.v_ == b.v_; }

  std::vector<double> mid() const {
    std::vector<double> m(size());
    for (std::size_t i = 0; i < size(); ++i) m[i] = v_[i].mid();
    return m;
  }

 private:
  static void check(const IVector& a, const IVector& b) {
    if (a.size() != b.size()) throw std::invalid_argument("IVector: dimension mismatch");
  }
  std::vector<Interval> v_;
};

class IMatrix {
 public:
  IMatrix() = default;
  IMatrix(std::size_t rows, std::size_t cols, Interval fill = Interval(0.0))
      : rows_(rows), cols_(cols), a_(rows * cols, fill) {}

  static IMatrix identity(std::size_t n) {
    IMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = Interval(1.0);
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  Interval& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  const Interval& operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

  IMatrix transpose() const {
    IMatrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  friend IMatrix operator*(const IMatrix& a, const IMatrix& b) {
    if (a.cols_ != b.rows_) throw std::invalid_argument("IMatrix: dimension mismatch");
    IMatrix r(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const Interval& aik = a(i, k);
        if (aik.is_zero()) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) r(i, j) += aik * b(k, j);
      }
    return r;
  }
  friend IMatrix operator+(const IMatrix& a, const IMatrix& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw std::invalid_argument("IMatrix: dimension mismatch");
    IMatrix r(a.rows_, a.cols_);
    for (std::size_t i = 0; i < a.a_.size(); ++i) r.a_[i] = a.a_[i] + b.a_[i];
    return r;
  }
  friend IMatrix operator-(const IMatrix& a, const IMatrix& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw std::invalid_argument("IMatrix: dimension mismatch");
    IMatrix r(a.rows_, a.cols_);
    for (std::size_t i = 0; i < a.a_.size(); ++i) r.a_[i] = a.a_[i] - b.a_[i];
    return r;
  }

  // Max row sum of |entries|, rounded up.
  double inf_norm() const {
    double best = 0;
    for (std::size_t i = 0; i < rows_; ++i) {
      double s = 0;
      for (std::size_t j = 0; j < cols_; ++j) s = rnd::add_up(s, max_abs((*this)(i, j)));
      best = std::max(best, s);
    }
    return best;
  }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<Interval> a_;
};

inline IVector mat_vec(const IMatrix& m, const IVector& v) {
  if (m.cols() != v.size()) throw std::invalid_argument("mat_vec: dimension mismatch");
  IVector r(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    Interval s(0.0);
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (v[j].is_zero()) continue;
      s += m(i, j) * v[j];
    }
    r[i] = s;
  }
  return r;
}

inline IMatrix from_point(const std::vector<std::vector<double>>& rows) {
  IMatrix m(rows.size(), rows.empty() ? 0 : rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols()) throw std::invalid_argument("from_point: ragged rows");
    for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = Interval(rows[i][j]);
  }
  return m;
}

// Rigorous enclosure of the inverse of a point matrix Q given an approximate
// inverse R: with E = I - R Q and ||E|| < 1, Q^{-1} = (I - E)^{-1} R lies in
// R + [-d, d] entrywise, d = ||E|| / (1 - ||E||) * ||R||.
inline IMatrix inverse_enclosure(const IMatrix& q, const IMatrix& approx_inv) {
  std::size_t n = q.rows();
  IMatrix e = IMatrix::identity(n) - approx_inv * q;
  double en = e.inf_norm();
  if (!(en < 1.0)) throw std::runtime_error("inverse_enclosure: residual norm >= 1");
  double rn = approx_inv.inf_norm();
  double d = rnd::mul_up(rnd::div_up(en, rnd::sub_down(1.0, en)), rn);
  IMatrix r = approx_inv;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) r(i, j) = r(i, j) + Interval::symmetric(d);
  return r;
}

}  // namespace okflow
