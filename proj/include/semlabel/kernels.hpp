#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "semlabel/matrix.hpp"

namespace semlabel::kernels {

/// Execution mode for the compute kernels. Every kernel computes each output
/// element with the same serial inner loop in both modes, so Serial and
/// Parallel results are bitwise identical; the Serial path is the reference
/// the tests compare against.
enum class Exec { Serial, Parallel };

template <class F>
void parallel_for(std::size_t n, Exec exec, F&& f) {
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i)
      f(static_cast<std::size_t>(i));
  } else {
    for (std::size_t i = 0; i < n; ++i) f(i);
  }
}

/// Z = X * W^T + b, bias broadcast over rows. X: n x k, W: m x k, Z: n x m.
void linear(const Matrix& X, const Matrix& W, std::span<const double> bias,
            Matrix& Z, Exec exec = Exec::Parallel);

/// C = A^T * B. A: n x m, B: n x k, C: m x k.
void matmul_at_b(const Matrix& A, const Matrix& B, Matrix& C,
                 Exec exec = Exec::Parallel);

/// C = A * B. A: n x m, B: m x k, C: n x k.
void matmul_ab(const Matrix& A, const Matrix& B, Matrix& C,
               Exec exec = Exec::Parallel);

void relu_inplace(Matrix& Z, Exec exec = Exec::Parallel);

/// dZ = dH where Z > 0, else 0.
void relu_backward(const Matrix& Z, const Matrix& dH, Matrix& dZ,
                   Exec exec = Exec::Parallel);

/// X = [H_v | mean of H_u over u in adj[v]] per node v. Isolated nodes get a
/// zero mean block. H: n x d, X: n x 2d.
void concat_neighbor_mean(const Matrix& H,
                          const std::vector<std::vector<int>>& adj, Matrix& X,
                          Exec exec = Exec::Parallel);

/// Adjoint of concat_neighbor_mean for symmetric adjacency:
/// dH[u] = dX[u, 0:d] + sum over v in adj[u] of dX[v, d:2d] / deg(v).
void neighbor_mean_backward(const Matrix& dX,
                            const std::vector<std::vector<int>>& adj,
                            Matrix& dH, Exec exec = Exec::Parallel);

/// out[j] = sum over rows i of A(i, j).
void column_sums(const Matrix& A, std::span<double> out,
                 Exec exec = Exec::Parallel);

}  // namespace semlabel::kernels
