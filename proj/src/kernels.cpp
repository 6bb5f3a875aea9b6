#include "semlabel/kernels.hpp"

#include <cassert>

namespace semlabel::kernels {

void linear(const Matrix& X, const Matrix& W, std::span<const double> bias,
            Matrix& Z, Exec exec) {
  assert(X.cols == W.cols);
  assert(bias.size() == W.rows);
  Z.resize(X.rows, W.rows);
  const std::size_t k = X.cols;
  parallel_for(X.rows, exec, [&](std::size_t i) {
    const double* x = X.row(i);
    double* z = Z.row(i);
    for (std::size_t j = 0; j < W.rows; ++j) {
      const double* w = W.row(j);
      double acc = bias[j];
      for (std::size_t c = 0; c < k; ++c) acc += x[c] * w[c];
      z[j] = acc;
    }
  });
}

void matmul_at_b(const Matrix& A, const Matrix& B, Matrix& C, Exec exec) {
  assert(A.rows == B.rows);
  C.resize(A.cols, B.cols);
  // C(j, c) = sum_i A(i, j) * B(i, c); each output row owned by one task.
  parallel_for(A.cols, exec, [&](std::size_t j) {
    double* out = C.row(j);
    for (std::size_t c = 0; c < B.cols; ++c) out[c] = 0.0;
    for (std::size_t i = 0; i < A.rows; ++i) {
      const double a = A(i, j);
      if (a == 0.0) continue;
      const double* b = B.row(i);
      for (std::size_t c = 0; c < B.cols; ++c) out[c] += a * b[c];
    }
  });
}

void matmul_ab(const Matrix& A, const Matrix& B, Matrix& C, Exec exec) {
  assert(A.cols == B.rows);
  C.resize(A.rows, B.cols);
  parallel_for(A.rows, exec, [&](std::size_t i) {
    const double* a = A.row(i);
    double* out = C.row(i);
    for (std::size_t c = 0; c < B.cols; ++c) out[c] = 0.0;
    for (std::size_t j = 0; j < A.cols; ++j) {
      const double av = a[j];
      if (av == 0.0) continue;
      const double* b = B.row(j);
      for (std::size_t c = 0; c < B.cols; ++c) out[c] += av * b[c];
    }
  });
}

void relu_inplace(Matrix& Z, Exec exec) {
  parallel_for(Z.rows, exec, [&](std::size_t i) {
    double* z = Z.row(i);
    for (std::size_t j = 0; j < Z.cols; ++j)
      if (z[j] < 0.0) z[j] = 0.0;
  });
}

void relu_backward(const Matrix& Z, const Matrix& dH, Matrix& dZ, Exec exec) {
  assert(Z.rows == dH.rows && Z.cols == dH.cols);
  dZ.resize(Z.rows, Z.cols);
  parallel_for(Z.rows, exec, [&](std::size_t i) {
    const double* z = Z.row(i);
    const double* g = dH.row(i);
    double* out = dZ.row(i);
    for (std::size_t j = 0; j < Z.cols; ++j) out[j] = z[j] > 0.0 ? g[j] : 0.0;
  });
}

void concat_neighbor_mean(const Matrix& H,
                          const std::vector<std::vector<int>>& adj, Matrix& X,
                          Exec exec) {
  assert(adj.size() == H.rows);
  const std::size_t d = H.cols;
  X.resize(H.rows, 2 * d);
  parallel_for(H.rows, exec, [&](std::size_t v) {
    double* x = X.row(v);
    const double* h = H.row(v);
    for (std::size_t j = 0; j < d; ++j) x[j] = h[j];
    double* m = x + d;
    for (std::size_t j = 0; j < d; ++j) m[j] = 0.0;
    const auto& nbrs = adj[v];
    if (nbrs.empty()) return;  // isolated node keeps the zero mean block
    for (int u : nbrs) {
      const double* hu = H.row(static_cast<std::size_t>(u));
      for (std::size_t j = 0; j < d; ++j) m[j] += hu[j];
    }
    const double inv = 1.0 / static_cast<double>(nbrs.size());
    for (std::size_t j = 0; j < d; ++j) m[j] *= inv;
  });
}

void neighbor_mean_backward(const Matrix& dX,
                            const std::vector<std::vector<int>>& adj,
                            Matrix& dH, Exec exec) {
  assert(adj.size() == dX.rows);
  assert(dX.cols % 2 == 0);
  const std::size_t d = dX.cols / 2;
  dH.resize(dX.rows, d);
  parallel_for(dX.rows, exec, [&](std::size_t u) {
    double* out = dH.row(u);
    const double* self = dX.row(u);
    for (std::size_t j = 0; j < d; ++j) out[j] = self[j];
    for (int v : adj[u]) {
      const auto vi = static_cast<std::size_t>(v);
      const double inv = 1.0 / static_cast<double>(adj[vi].size());
      const double* mean = dX.row(vi) + d;
      for (std::size_t j = 0; j < d; ++j) out[j] += mean[j] * inv;
    }
  });
}

void column_sums(const Matrix& A, std::span<double> out, Exec exec) {
  assert(out.size() == A.cols);
  parallel_for(A.cols, exec, [&](std::size_t j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < A.rows; ++i) acc += A(i, j);
    out[j] = acc;
  });
}

}  // namespace semlabel::kernels
