// Times the OpenMP kernels against their serial reference on SAGE-shaped
// workloads and checks the outputs stay bitwise identical.
#include <chrono>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "semlabel/kernels.hpp"
#include "semlabel/rng.hpp"

using namespace semlabel;
using kernels::Exec;

namespace {

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  Matrix m(r, c);
  for (double& v : m.data) v = rng.normal();
  return m;
}

template <class F>
double time_best_of(int reps, F&& f) {
  double best = 1e300;
  for (int i = 0; i < reps; ++i) {
    const double t0 = now_seconds();
    f();
    best = std::min(best, now_seconds() - t0);
  }
  return best;
}

void report(const char* name, double serial, double parallel, bool identical) {
  std::printf("%-24s serial %8.3f ms   parallel %8.3f ms   speedup %5.2fx   %s\n",
              name, serial * 1e3, parallel * 1e3, serial / parallel,
              identical ? "bitwise-equal" : "MISMATCH");
}

}  // namespace

int main() {
  const std::size_t n = 4000, d = 256, m = 256;
  Rng rng(42);
  const Matrix X = random_matrix(n, 2 * d, rng);
  const Matrix W = random_matrix(m, 2 * d, rng);
  const std::vector<double> bias(m, 0.25);
  const Matrix A = random_matrix(n, m, rng);
  const Matrix B = random_matrix(n, 2 * d, rng);

  std::vector<std::vector<int>> adj(n);
  for (std::size_t v = 0; v < n; ++v) {
    const std::size_t deg = rng.below(8);
    for (std::size_t e = 0; e < deg; ++e) {
      const auto u = rng.below(n);
      if (u == v) continue;
      adj[v].push_back(static_cast<int>(u));
      adj[u].push_back(static_cast<int>(v));  // keep adjacency symmetric
    }
  }
  const Matrix H = random_matrix(n, d, rng);

#ifdef _OPENMP
  std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
  std::printf("built without OpenMP; parallel mode falls back to serial\n");
#endif

  constexpr int kReps = 5;
  Matrix out_s, out_p;

  double ts = time_best_of(kReps, [&] { kernels::linear(X, W, bias, out_s, Exec::Serial); });
  double tp = time_best_of(kReps, [&] { kernels::linear(X, W, bias, out_p, Exec::Parallel); });
  report("linear (XW^T+b)", ts, tp, out_s == out_p);

  ts = time_best_of(kReps, [&] { kernels::matmul_at_b(A, B, out_s, Exec::Serial); });
  tp = time_best_of(kReps, [&] { kernels::matmul_at_b(A, B, out_p, Exec::Parallel); });
  report("matmul A^T B", ts, tp, out_s == out_p);

  ts = time_best_of(kReps, [&] { kernels::matmul_ab(A, W, out_s, Exec::Serial); });
  tp = time_best_of(kReps, [&] { kernels::matmul_ab(A, W, out_p, Exec::Parallel); });
  report("matmul A B", ts, tp, out_s == out_p);

  ts = time_best_of(kReps, [&] { kernels::concat_neighbor_mean(H, adj, out_s, Exec::Serial); });
  tp = time_best_of(kReps, [&] { kernels::concat_neighbor_mean(H, adj, out_p, Exec::Parallel); });
  report("concat_neighbor_mean", ts, tp, out_s == out_p);

  ts = time_best_of(kReps, [&] { kernels::neighbor_mean_backward(X, adj, out_s, Exec::Serial); });
  tp = time_best_of(kReps, [&] { kernels::neighbor_mean_backward(X, adj, out_p, Exec::Parallel); });
  report("neighbor_mean_backward", ts, tp, out_s == out_p);

  return 0;
}
