#pragma once

#include <Eigen/Dense>

#include <string>

namespace encctl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Stacked row/column helpers; all blocks must agree in the shared dimension.
Matrix hstack(std::initializer_list<const Matrix*> blocks);
Matrix vstack(std::initializer_list<const Matrix*> blocks);

/// Kronecker product I_k ⊗ M.
Matrix kron_identity(int k, const Matrix& m);

/// M^p by repeated multiplication (p >= 0).
Matrix matrix_power(const Matrix& m, int p);

Matrix symmetrize(const Matrix& m);
bool is_symmetric(const Matrix& m, double tol = 1e-12);
double max_abs(const Matrix& m);

/// Largest |eigenvalue| of a square real matrix.
double spectral_radius(const Matrix& m);

// Throws std::invalid_argument naming `what` when dimensions disagree.
void require_rows(const Matrix& m, Eigen::Index rows, const std::string& what);
void require_cols(const Matrix& m, Eigen::Index cols, const std::string& what);

}  // namespace encctl
