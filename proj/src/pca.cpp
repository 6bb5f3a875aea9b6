#include "semlabel/pca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "semlabel/error.hpp"

namespace semlabel {

void symmetric_eigen(const Matrix& a, std::vector<double>& values, Matrix& vectors) {
  const std::size_t n = a.rows;
  Matrix m = a;
  vectors.resize(n, n);
  for (std::size_t i = 0; i < n; ++i) vectors(i, i) = 1.0;

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += m(p, q) * m(p, q);
    if (off < 1e-24) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (m(p, q) == 0.0) continue;
        const double theta = (m(q, q) - m(p, p)) / (2.0 * m(p, q));
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double mkp = m(k, p), mkq = m(k, q);
          m(k, p) = c * mkp - s * mkq;
          m(k, q) = s * mkp + c * mkq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double mpk = m(p, k), mqk = m(q, k);
          m(p, k) = c * mpk - s * mqk;
          m(q, k) = s * mpk + c * mqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = vectors(k, p), vkq = vectors(k, q);
          vectors(k, p) = c * vkp - s * vkq;
          vectors(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<double> diag(n);
  for (std::size_t i = 0; i < n; ++i) diag[i] = m(i, i);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t x, std::size_t y) { return diag[x] > diag[y]; });

  values.resize(n);
  Matrix sorted(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    values[j] = diag[idx[j]];
    for (std::size_t i = 0; i < n; ++i) sorted(i, j) = vectors(i, idx[j]);
  }
  vectors = std::move(sorted);
}

Matrix pca_project_2d(const EncodingTable& table) {
  const std::size_t n = table.vectors.rows;
  const std::size_t d = table.dim;
  if (n < 2) throw Error("too-few-labels", "2-D projection needs >= 2 labels");

  Matrix centered(n, d);
  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += table.vectors(i, j);
    mean /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) centered(i, j) = table.vectors(i, j) - mean;
  }

  // Gram trick: eigenvectors of X X^T give the principal coordinates directly
  // as U * sqrt(lambda).
  Matrix gram(n, n);
  double trace = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double dot = 0.0;
      for (std::size_t k = 0; k < d; ++k) dot += centered(i, k) * centered(j, k);
      gram(i, j) = dot;
      gram(j, i) = dot;
    }
    trace += gram(i, i);
  }
  if (trace <= 1e-18)
    throw Error("degenerate-table", "all rows identical; nothing to project");

  std::vector<double> values;
  Matrix vectors;
  symmetric_eigen(gram, values, vectors);

  Matrix coords(n, 2);
  for (std::size_t c = 0; c < 2 && c < values.size(); ++c) {
    const double scale = std::sqrt(std::max(values[c], 0.0));
    std::size_t arg = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (std::fabs(vectors(i, c)) > std::fabs(vectors(arg, c))) arg = i;
    const double sign = vectors(arg, c) < 0.0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < n; ++i) coords(i, c) = sign * scale * vectors(i, c);
  }
  return coords;
}

}  // namespace semlabel
