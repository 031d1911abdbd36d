#pragma once

// Dense primal-dual interior-point solver for small linear programs
//
//     minimize    c^T x
//     subject to  G x <= h
//                 A x  = b
//
// with x free. Equalities are eliminated through an SVD null-space basis, the
// remaining inequality LP is solved with Mehrotra's predictor-corrector on
// the normal equations G^T W G. Sized for a few dozen variables and a few
// thousand constraints; fully deterministic.

#include "encctl/linalg.hpp"

#include <stdexcept>
#include <string>

namespace encctl {

class LpError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct LpProblem {
    Vector c;
    Matrix G;
    Vector h;
    Matrix A;  // may have zero rows
    Vector b;
};

struct LpOptions {
    int max_iterations = 200;
    double feasibility_tol = 1e-10;
    double gap_tol = 1e-11;
    double dual_tol = 1e-7;  // relative to |c| + |G| |z|
};

struct LpSolution {
    Vector x;
    double objective = 0.0;
    int iterations = 0;
    double primal_residual = 0.0;
    double equality_residual = 0.0;
};

/// Throws LpError on infeasible, unbounded or non-converging problems.
LpSolution solve_lp(const LpProblem& problem, const LpOptions& options = {});

}  // namespace encctl
