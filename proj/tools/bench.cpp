// Timing comparison between the serial reference cost-matrix kernel and the
// OpenMP-parallel one, plus a sample OCP solve.

#include <chrono>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "fieldnav/field_io.hpp"
#include "fieldnav/nmpc.hpp"
#include "fieldnav/routing.hpp"

using namespace fieldnav;

namespace {

double measure_ms(CostFill mode, const Field& field, int k, double rho, double* checksum) {
  const auto t0 = std::chrono::steady_clock::now();
  const ClusterGraph g = build_cluster_graph(field, k, rho, mode);
  const std::chrono::duration<double, std::milli> dt = std::chrono::steady_clock::now() - t0;
  double sum = 0.0;
  for (double c : g.cost) {
    if (std::isfinite(c)) sum += c;
  }
  *checksum = sum;
  return dt.count();
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("omp threads: %d\n", omp_get_max_threads());
#else
  std::printf("omp threads: (compiled without OpenMP)\n");
#endif

  std::printf("%8s %4s %8s %12s %12s %9s\n", "targets", "K", "nodes", "serial[ms]", "omp[ms]",
              "speedup");
  const int cases[][2] = {{40, 10}, {80, 10}, {150, 10}};
  for (const auto& c : cases) {
    GenerateOptions opt;
    opt.seed = 7;
    opt.count = c[0];
    opt.width = 20.0;
    opt.height = 60.0;
    opt.min_separation = 0.5;
    const Field field = generate_field(opt);

    double sum_serial = 0.0, sum_omp = 0.0;
    const double ms_serial = measure_ms(CostFill::Serial, field, c[1], 0.5, &sum_serial);
    const double ms_omp = measure_ms(CostFill::Parallel, field, c[1], 0.5, &sum_omp);
    if (sum_serial != sum_omp) {
      std::printf("MISMATCH: serial and parallel checksums differ (%.17g vs %.17g)\n",
                  sum_serial, sum_omp);
      return 1;
    }
    std::printf("%8d %4d %8d %12.1f %12.1f %8.2fx\n", c[0], c[1], c[0] * c[1], ms_serial,
                ms_omp, ms_serial / ms_omp);
  }

  // One cold OCP solve at the default parameters, for context.
  {
    OcpParams params;
    const Configuration start(0.0, 0.0, 0.0);
    const Configuration goal(5.0, 0.0, 0.0);
    const ReferencePath segment = dubins_sample(dubins_shortest(start, goal, 0.5), 0.05);
    const auto t0 = std::chrono::steady_clock::now();
    const OcpSolution sol = solve_ocp(build_nlp(start, segment, {0.0, 0.0}, params));
    const std::chrono::duration<double, std::milli> dt = std::chrono::steady_clock::now() - t0;
    std::printf("\ncold OCP solve: %.1f ms, %d iterations, status %s\n", dt.count(),
                sol.iterations, to_string(sol.status));
  }
  return 0;
}
