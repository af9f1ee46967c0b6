// Compares serial and OpenMP-parallel execution of the f3 comparison
// benchmark and reports the speedup. Records must agree exactly apart
// from timing columns.

#include "rppm/harness.hpp"

#include <chrono>
#include <cstdio>
#include <thread>

int main(int argc, char** argv) {
  rppm::ExperimentConfig cfg;
  cfg.n_grid = {5, 10, 15, 20};
  cfg.starts_per_case = 5;
  cfg.seed = 7;
  if (argc > 1) {
    cfg.starts_per_case = std::atoi(argv[1]);
  }

  auto timed = [&](int threads) {
    cfg.threads = threads;
    auto t0 = std::chrono::steady_clock::now();
    auto [records, profile] = rppm::run_comparison(cfg);
    double dt = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
    return std::make_pair(dt, records);
  };

  const int hw = static_cast<int>(std::thread::hardware_concurrency());
  auto [t_serial, serial] = timed(1);
  auto [t_parallel, parallel] = timed(hw > 1 ? hw : 2);

  bool identical = serial.size() == parallel.size();
  for (std::size_t i = 0; identical && i < serial.size(); ++i) {
    identical = serial[i].case_id == parallel[i].case_id &&
                serial[i].iterations == parallel[i].iterations &&
                serial[i].f_final == parallel[i].f_final &&
                serial[i].det_final == parallel[i].det_final;
  }

  std::printf("cases: %zu\n", serial.size());
  std::printf("serial:   %.3f s\n", t_serial);
  std::printf("parallel: %.3f s (%d threads)\n", t_parallel,
              hw > 1 ? hw : 2);
  std::printf("speedup:  %.2fx\n", t_serial / t_parallel);
  std::printf("records identical: %s\n", identical ? "yes" : "NO");
  return identical ? 0 : 1;
}
