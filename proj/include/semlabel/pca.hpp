#pragma once

#include "semlabel/label_encoding.hpp"
#include "semlabel/matrix.hpp"

namespace semlabel {

/// Projects the table rows onto their top-2 principal components (via the
/// Gram matrix of the mean-centered rows, so the cost is label-count bound).
/// Component signs are fixed so the entry of largest magnitude is positive.
/// Returns |vocab| x 2 coordinates.
Matrix pca_project_2d(const EncodingTable& table);

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Eigenvalues are returned in descending order, eigenvectors as columns of
/// `vectors` in matching order.
void symmetric_eigen(const Matrix& a, std::vector<double>& values, Matrix& vectors);

}  // namespace semlabel
