#pragma once

#include <algorithm>
#include <chrono>
#include <random>
#include <string>
#include <vector>

#include "okflow/convolution.hpp"
#include "okflow/taylor_jets.hpp"

namespace okflow {

struct BenchRow {
  std::string backend;
  std::size_t order = 0;
  std::size_t m = 0;
  std::size_t fft_nodes = 0;
  double seconds = 0.0;  // per step, best of the repetitions
};

// Convolution work of one step: all cubes of a Taylor series of the given
// order carrying m partials (the variational part), on random thin data.
inline BenchRow bench_convolution(const std::string& backend, std::size_t order, std::size_t m, int reps = 3,
                                  int pad = 2) {
  BenchRow row{backend, order, m, backend == "fft" ? fft_size_for(m, pad) : 0, 0.0};
  JetSeries s(m, m, order);
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::size_t r = 0; r <= order; ++r)
    for (std::size_t c = 0; c < s.ncomp(); ++c)
      for (std::size_t k = 1; k <= m; ++k) {
        double x = u(rng) / static_cast<double>((r + 1) * k * k);
        s.at(r, c, k) = Interval(x) + Interval::symmetric(1e-12 * std::fabs(x));
      }
  auto conv = make_convolver(backend, row.fft_nodes);
  std::vector<Interval> out;
  double best = 1e300;
  for (int rep = 0; rep < std::max(reps, 1); ++rep) {
    auto t0 = std::chrono::steady_clock::now();
    conv->reset(s);
    for (std::size_t r = 0; r <= order; ++r) {
      conv->push_order(r);
      conv->cube(r, out);
    }
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  row.seconds = best;
  return row;
}

}  // namespace okflow
