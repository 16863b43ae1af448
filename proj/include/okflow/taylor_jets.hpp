#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "okflow/interval.hpp"

namespace okflow {

// First-order jet: a value and its partials with respect to m initial coordinates.
struct Jet {
  Interval value;
  IVector partials;

  Jet() = default;
  Jet(Interval v, IVector d) : value(v), partials(std::move(d)) {}
  static Jet constant(Interval v, std::size_t m) { return Jet(v, IVector(m)); }
  static Jet variable(Interval v, std::size_t m, std::size_t i) {
    Jet j(v, IVector(m));
    j.partials[i] = Interval(1.0);
    return j;
  }
};

inline Jet jet_add(const Jet& x, const Jet& y) {
  if (x.partials.size() != y.partials.size()) throw std::invalid_argument("jet_add: dimension mismatch");
  return Jet(x.value + y.value, x.partials + y.partials);
}

// Product truncated after first order in the initial-coordinate perturbation.
inline Jet jet_mul(const Jet& x, const Jet& y) {
  if (x.partials.size() != y.partials.size()) throw std::invalid_argument("jet_mul: dimension mismatch");
  Jet r(x.value * y.value, IVector(x.partials.size()));
  for (std::size_t i = 0; i < r.partials.size(); ++i) r.partials[i] = x.value * y.partials[i] + y.value * x.partials[i];
  return r;
}

inline Jet jet_scale(const Jet& x, const Interval& c) {
  Jet r(c * x.value, IVector(x.partials.size()));
  for (std::size_t i = 0; i < r.partials.size(); ++i) r.partials[i] = c * x.partials[i];
  return r;
}

// z^{[j+1]} = (G o z)^{[j]} / (j + 1), for values and partials alike.
inline std::vector<Jet> next_normalized_derivative(const std::vector<Jet>& g_order_j, std::size_t j) {
  Interval inv = Interval(1.0) / Interval(static_cast<double>(j + 1));
  std::vector<Jet> r;
  r.reserve(g_order_j.size());
  for (const auto& g : g_order_j) r.push_back(jet_scale(g, inv));
  return r;
}

// Normalized time derivatives of a Fourier-indexed jet vector, stored per order
// and per component (component 0 is the value, 1..P the partials) as
// contiguous arrays over the mode index k = 0..m (k = 0 is unused and zero).
class JetSeries {
 public:
  JetSeries() = default;
  JetSeries(std::size_t m, std::size_t partials, std::size_t max_order)
      : m_(m), ncomp_(partials + 1), orders_(max_order + 1),
        data_(orders_ * ncomp_ * (m + 1), Interval(0.0)) {}

  std::size_t m() const { return m_; }
  std::size_t ncomp() const { return ncomp_; }
  std::size_t max_order() const { return orders_ - 1; }

  Interval* row(std::size_t order, std::size_t comp) { return &data_[(order * ncomp_ + comp) * (m_ + 1)]; }
  const Interval* row(std::size_t order, std::size_t comp) const {
    return &data_[(order * ncomp_ + comp) * (m_ + 1)];
  }
  Interval& at(std::size_t order, std::size_t comp, std::size_t k) { return row(order, comp)[k]; }
  const Interval& at(std::size_t order, std::size_t comp, std::size_t k) const { return row(order, comp)[k]; }

  Jet jet(std::size_t order, std::size_t k) const {
    Jet j(at(order, 0, k), IVector(ncomp_ - 1));
    for (std::size_t c = 1; c < ncomp_; ++c) j.partials[c - 1] = at(order, c, k);
    return j;
  }

 private:
  std::size_t m_ = 0, ncomp_ = 1, orders_ = 1;
  std::vector<Interval> data_;
};

}  // namespace okflow
