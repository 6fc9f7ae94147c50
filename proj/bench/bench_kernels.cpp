// Timing comparison of the serial and OpenMP execution paths of the core
// kernels. Both paths compute bit-identical results; this only reports speed.

#include <chrono>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "riskgraph/kernels.hpp"
#include "riskgraph/rng.hpp"

using namespace riskgraph;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (double& x : m.data()) x = rng.normal();
  return m;
}

template <class F>
double time_best_of(int repeats, F&& body) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto start = std::chrono::steady_clock::now();
    body();
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();
    if (ms < best) best = ms;
  }
  return best;
}

void row(const char* name, double serial_ms, double parallel_ms) {
  std::printf("%-24s %10.2f ms %10.2f ms %8.2fx\n", name, serial_ms, parallel_ms,
              serial_ms / parallel_ms);
}

}  // namespace

int main() {
  Rng rng(1);
#ifdef _OPENMP
  std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
  std::printf("built without OpenMP; both columns run serially\n");
#endif
  std::printf("%-24s %13s %13s %9s\n", "kernel", "serial", "parallel", "speedup");

  {
    const Matrix a = random_matrix(512, 512, rng);
    const Matrix b = random_matrix(512, 512, rng);
    Matrix out;
    const double s = time_best_of(3, [&] { kernels::matmul(a, b, out, Exec::Serial); });
    const double p = time_best_of(3, [&] { kernels::matmul(a, b, out, Exec::Parallel); });
    row("matmul 512x512", s, p);
  }
  {
    const Matrix a = random_matrix(4096, 64, rng);
    const Matrix b = random_matrix(4096, 64, rng);
    Matrix out;
    const double s = time_best_of(3, [&] { kernels::matmul_at_b(a, b, out, Exec::Serial); });
    const double p = time_best_of(3, [&] { kernels::matmul_at_b(a, b, out, Exec::Parallel); });
    row("matmul_at_b 4096x64", s, p);
  }
  {
    const Matrix pts = random_matrix(3000, 15, rng);
    const double s =
        time_best_of(3, [&] { kernels::knn_query(pts, pts, 50, true, Exec::Serial); });
    const double p =
        time_best_of(3, [&] { kernels::knn_query(pts, pts, 50, true, Exec::Parallel); });
    row("knn_query n=3000 k=50", s, p);
  }
  {
    const int n = 2500;
    std::vector<std::vector<int>> adj(n);
    Rng grng(7);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (grng.bernoulli(0.01)) {
          adj[i].push_back(j);
          adj[j].push_back(i);
        }
    const double s = time_best_of(3, [&] { kernels::triangle_counts(adj, Exec::Serial); });
    const double p = time_best_of(3, [&] { kernels::triangle_counts(adj, Exec::Parallel); });
    row("triangles n=2500", s, p);
  }
  {
    const Matrix in = random_matrix(4000, 62, rng);
    std::vector<std::vector<int>> groups(4000);
    Rng grng(9);
    for (auto& g : groups) {
      g.resize(50);
      for (int& v : g) v = static_cast<int>(grng.below(4000));
    }
    Matrix out;
    const double s =
        time_best_of(3, [&] { kernels::group_mean_rows(in, groups, out, Exec::Serial); });
    const double p =
        time_best_of(3, [&] { kernels::group_mean_rows(in, groups, out, Exec::Parallel); });
    row("group_mean 4000x62", s, p);
  }
  return 0;
}
