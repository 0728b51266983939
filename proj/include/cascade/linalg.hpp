#pragma once

#include <Eigen/Dense>

namespace cascade {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Eigen-decomposition of a symmetric matrix, eigenvalues ascending.
struct SymmetricEigen {
  Vector values;
  Matrix vectors;  // column j pairs with values(j)
  int sweeps = 0;
};

/// Cyclic Jacobi rotations on a symmetric matrix. Iterates until the
/// off-diagonal Frobenius norm falls below 1e-12 * max(1, ||A||_F).
SymmetricEigen jacobi_eigen(const Matrix& a, int max_sweeps = 100);

double min_eigenvalue(const Matrix& a);

/// Symmetrize in place to remove roundoff asymmetry.
inline void symmetrize(Matrix& a) { a = 0.5 * (a + a.transpose()).eval(); }

}  // namespace cascade
