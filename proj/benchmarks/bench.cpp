#include <benchmark/benchmark.h>

#include "resonet/calibration.hpp"
#include "resonet/network.hpp"
#include "resonet/scenario.hpp"

#include <cmath>
#include <complex>
#include <random>
#include <vector>

namespace {

const resonet::scenario& cached_reference() {
  static const resonet::scenario s = resonet::reference_scenario();
  return s;
}

void bm_cascade_single_frequency(benchmark::State& state) {
  const auto& s = cached_reference();
  const std::vector<resonet::two_port_element> chain = resonet::build_network(s);
  const double omega = s.truth.omega_r;
  for (auto _ : state) {
    const resonet::abcd_matrix m = resonet::cascade(chain, omega);
    benchmark::DoNotOptimize(resonet::abcd_to_s(m, 50.0));
  }
}
BENCHMARK(bm_cascade_single_frequency);

void bm_simulate_sweep(benchmark::State& state) {
  const auto& s = cached_reference();
  for (auto _ : state) {
    benchmark::DoNotOptimize(resonet::simulate_sweep(s));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(s.sweep.n_points));
}
BENCHMARK(bm_simulate_sweep)->Unit(benchmark::kMillisecond);

void bm_circle_fit(benchmark::State& state) {
  const long n = state.range(0);
  std::mt19937_64 gen(7);
  std::normal_distribution<double> gauss(0.0, 1.0e-3);
  std::vector<resonet::cplx> pts;
  pts.reserve(n);
  for (long i = 0; i < n; ++i) {
    const double th = 6.283185307179586 * static_cast<double>(i) / static_cast<double>(n);
    pts.push_back(resonet::cplx{0.5, -0.01} +
                  0.47 * std::polar(1.0, th) + resonet::cplx{gauss(gen), gauss(gen)});
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(resonet::fit_circle(pts));
  }
}
BENCHMARK(bm_circle_fit)->Arg(936);

void bm_full_pipeline(benchmark::State& state) {
  static const std::vector<resonet::trace> traces =
      resonet::simulate_sweep(cached_reference());
  const resonet::trace& t = traces[0]; // the notch rides on the reflection port
  for (auto _ : state) {
    benchmark::DoNotOptimize(resonet::run_pipeline(t));
  }
}
BENCHMARK(bm_full_pipeline)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
