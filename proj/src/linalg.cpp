#include "encctl/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace encctl {

Matrix hstack(std::initializer_list<const Matrix*> blocks) {
    Eigen::Index rows = -1;
    Eigen::Index cols = 0;
    for (const Matrix* b : blocks) {
        if (rows < 0) rows = b->rows();
        if (b->rows() != rows) throw std::invalid_argument("hstack: row mismatch");
        cols += b->cols();
    }
    Matrix out(rows < 0 ? 0 : rows, cols);
    Eigen::Index at = 0;
    for (const Matrix* b : blocks) {
        out.middleCols(at, b->cols()) = *b;
        at += b->cols();
    }
    return out;
}

Matrix vstack(std::initializer_list<const Matrix*> blocks) {
    Eigen::Index cols = -1;
    Eigen::Index rows = 0;
    for (const Matrix* b : blocks) {
        if (cols < 0) cols = b->cols();
        if (b->cols() != cols) throw std::invalid_argument("vstack: column mismatch");
        rows += b->rows();
    }
    Matrix out(rows, cols < 0 ? 0 : cols);
    Eigen::Index at = 0;
    for (const Matrix* b : blocks) {
        out.middleRows(at, b->rows()) = *b;
        at += b->rows();
    }
    return out;
}

Matrix kron_identity(int k, const Matrix& m) {
    Matrix out = Matrix::Zero(k * m.rows(), k * m.cols());
    for (int i = 0; i < k; ++i) out.block(i * m.rows(), i * m.cols(), m.rows(), m.cols()) = m;
    return out;
}

Matrix matrix_power(const Matrix& m, int p) {
    if (m.rows() != m.cols()) throw std::invalid_argument("matrix_power: matrix not square");
    if (p < 0) throw std::invalid_argument("matrix_power: negative exponent");
    Matrix out = Matrix::Identity(m.rows(), m.cols());
    for (int i = 0; i < p; ++i) out = out * m;
    return out;
}

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

bool is_symmetric(const Matrix& m, double tol) {
    if (m.rows() != m.cols()) return false;
    const double scale = std::max(1.0, max_abs(m));
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

double spectral_radius(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    Eigen::EigenSolver<Matrix> es(m, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

void require_rows(const Matrix& m, Eigen::Index rows, const std::string& what) {
    if (m.rows() != rows)
        throw std::invalid_argument(what + ": expected " + std::to_string(rows) + " rows, got " +
                                    std::to_string(m.rows()));
}

void require_cols(const Matrix& m, Eigen::Index cols, const std::string& what) {
    if (m.cols() != cols)
        throw std::invalid_argument(what + ": expected " + std::to_string(cols) + " columns, got " +
                                    std::to_string(m.cols()));
}

}  // namespace encctl
