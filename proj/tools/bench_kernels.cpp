// Timing comparison of the OpenMP kernels against their serial twins on a
// synthetic fit. Checks bitwise equality of the outputs while it is at it.
#include "bdagar/io.hpp"
#include "bdagar/kernels.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using clock_type = std::chrono::steady_clock;

double time_ms(const std::function<void()>& fn, int reps) {
  fn();  // warm up
  const auto start = clock_type::now();
  for (int i = 0; i < reps; ++i) fn();
  const auto stop = clock_type::now();
  return std::chrono::duration<double, std::milli>(stop - start).count() / reps;
}

void report(const char* name, double serial_ms, double parallel_ms, bool identical) {
  std::printf("%-22s serial %9.2f ms   parallel %9.2f ms   speedup %5.2fx   %s\n", name,
              serial_ms, parallel_ms, serial_ms / parallel_ms,
              identical ? "outputs identical" : "OUTPUT MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  int grid = argc > 1 ? std::atoi(argv[1]) : 8;
  int draws = argc > 2 ? std::atoi(argv[2]) : 400;
  if (grid < 2 || draws < 10) {
    std::fprintf(stderr, "usage: %s [grid-side >= 2] [draws >= 10]\n", argv[0]);
    return 1;
  }

#ifdef _OPENMP
  std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
  std::printf("OpenMP not enabled in this build\n");
#endif

  const bdagar::RegionGraph graph = bdagar::RegionGraph::grid(grid, grid);
  bdagar::SimulationTruth truth;
  truth.beta[0] = Eigen::Vector3d(3.0, 1.0, -0.5);
  truth.beta[1] = Eigen::Vector3d(-1.0, 0.5, 0.8);
  truth.sigma2 = {0.3, 0.3};
  truth.tau = {4.0, 4.0};
  truth.rho = {0.6, 0.4};
  truth.eta = bdagar::LinkingParams{1.2, 0.3};
  truth.seed = 7;
  const bdagar::SimulationResult sim = bdagar::simulate_dataset(graph, truth);

  bdagar::RunConfig config;
  config.mcmc.iterations = 2 * draws;
  config.mcmc.burn_in = draws;
  config.mcmc.seed = 11;
  const bdagar::FitResult fit = bdagar::run_fit(graph, sim.csv_text, config);
  std::printf("grid %dx%d (k=%d), %d retained draws\n\n", grid, grid, graph.size(),
              fit.draws.rows());

  const auto& d = fit.draws;
  const auto& data = fit.data;

  Eigen::MatrixXd a, b;
  double serial_ms = time_ms([&] { a = bdagar::pointwise_log_lik_matrix_serial(d, data); }, 3);
  double parallel_ms = time_ms([&] { b = bdagar::pointwise_log_lik_matrix(d, data); }, 3);
  report("pointwise log-lik", serial_ms, parallel_ms, a == b);

  serial_ms = time_ms([&] { a = bdagar::correlation_draw_matrix_serial(d, graph, fit.config.kind()); }, 1);
  parallel_ms = time_ms([&] { b = bdagar::correlation_draw_matrix(d, graph, fit.config.kind()); }, 1);
  report("correlation map", serial_ms, parallel_ms, a == b);

  bdagar::BdagarSpec spec{bdagar::PrecisionKind::dagar, truth.rho[0], truth.rho[1],
                          truth.tau[0],                 truth.tau[1], truth.eta};
  const int n = 50 * draws;
  serial_ms = time_ms([&] { a = bdagar::sample_joint_batch_serial(spec, graph, n, 99); }, 1);
  parallel_ms = time_ms([&] { b = bdagar::sample_joint_batch(spec, graph, n, 99); }, 1);
  report("joint GMRF batch", serial_ms, parallel_ms, a == b);

  return 0;
}
