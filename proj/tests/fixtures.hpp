#pragma once

#include "encctl/statespace.hpp"

#include <complex>
#include <random>

namespace fixtures {

using encctl::Matrix;
using encctl::Vector;

inline encctl::Plant example_plant() {
    encctl::Plant p;
    p.A.resize(2, 2);
    p.A << -0.5, 0.1, 0.0, -0.2;
    p.B.resize(2, 1);
    p.B << 0.0, 1.0;
    p.B1.resize(2, 1);
    p.B1 << 1.0, 1.0;
    p.C.resize(1, 2);
    p.C << 1.0, 0.0;
    p.F1 = Matrix::Zero(1, 1);
    p.C1 = Matrix::Identity(2, 2);
    p.E.resize(2, 1);
    p.E << 1.0, 1.0;
    p.D1 = Matrix::Zero(2, 1);
    return p;
}

inline encctl::Controller example_controller() {
    encctl::Controller k;
    k.Ac.resize(2, 2);
    k.Ac << 0.13, 0.1, -1.27, 0.15;
    k.Bc.resize(2, 1);
    k.Bc << 0.63, -0.27;
    k.B2 = Matrix::Identity(2, 2);
    k.Cc.resize(1, 2);
    k.Cc << -1.0, 0.35;
    k.Dc = Matrix::Zero(1, 1);
    k.F2 = Matrix::Zero(1, 2);
    return k;
}

inline Matrix random_matrix(std::mt19937_64& rng, int r, int c) {
    std::normal_distribution<double> n;
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
    return m;
}

inline Vector random_vector(std::mt19937_64& rng, int n) { return random_matrix(rng, n, 1); }

/// Random matrix rescaled to spectral radius `rho`.
inline Matrix random_stable(std::mt19937_64& rng, int n, double rho) {
    Matrix a = random_matrix(rng, n, n);
    const double r = encctl::spectral_radius(a);
    return r > 0.0 ? Matrix(a * (rho / r)) : a;
}

inline encctl::ClosedLoop random_closed_loop(std::mt19937_64& rng, int n, int mp, int pz, int mu, int nzu) {
    encctl::ClosedLoop cl;
    cl.A = random_stable(rng, n, 0.9);
    cl.Bp = random_matrix(rng, n, mp);
    cl.Bu = random_matrix(rng, n, mu);
    cl.Cp = random_matrix(rng, pz, n);
    cl.Dpp = random_matrix(rng, pz, mp);
    cl.Dpu = random_matrix(rng, pz, mu);
    cl.Cu = random_matrix(rng, nzu, n);
    cl.Dup = random_matrix(rng, nzu, mp);
    cl.Duu = Matrix::Zero(nzu, mu);
    return cl;
}

/// max over a frequency grid (refined around the peak) of sigma_max(C (zI - A)^-1 B + D).
inline double hinf_sweep(const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& D, int grid = 20000) {
    using cd = std::complex<double>;
    using CMatrix = Eigen::MatrixXcd;
    const auto n = A.rows();
    auto sigma = [&](double w) {
        const cd z = std::polar(1.0, w);
        CMatrix M = z * CMatrix::Identity(n, n) - A.cast<cd>();
        CMatrix G = C.cast<cd>() * M.partialPivLu().solve(B.cast<cd>()) + D.cast<cd>();
        return Eigen::JacobiSVD<CMatrix>(G).singularValues()(0);
    };
    const double pi = 3.14159265358979323846;
    double best = 0.0, best_w = 0.0;
    for (int i = 0; i <= grid; ++i) {
        const double w = pi * i / grid;
        const double s = sigma(w);
        if (s > best) best = s, best_w = w;
    }
    double lo = std::max(0.0, best_w - pi / grid), hi = std::min(pi, best_w + pi / grid);
    for (int it = 0; it < 100; ++it) {
        const double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
        if (sigma(m1) < sigma(m2)) lo = m1;
        else hi = m2;
    }
    return std::max(best, sigma(0.5 * (lo + hi)));
}

}  // namespace fixtures
