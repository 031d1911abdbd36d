#pragma once

// Small dense LMI feasibility engine.
//
// Decision variables are a flat vector x. By convention the first
// n(n+1)/2 entries parametrize a symmetric block X (upper triangle,
// column by column), followed optionally by the multiplier tau and any extra
// scalars. Each constraint is an affine symmetric matrix function
//   F(x) = F0 + sum_i x_i F_i
// required to be positive definite or negative definite.
//
// solve_feasibility runs a phase-I problem
//   minimize s  s.t.  F_j(x) <= s I (negative constraints),
//                     F_j(x) >= -s I (positive constraints)
// with a log-det barrier and damped Newton steps (Cholesky only). The verdict
// is FEASIBLE iff the optimum satisfies s <= -delta. check_certificate
// re-evaluates a certificate with a symmetric eigensolver and shares no code
// with the barrier path.
//
// INFEASIBLE only means that no certificate with margin delta exists within
// the variable box; the LMI tests built on top of this engine are sufficient
// conditions, so INFEASIBLE never implies that the loop is unstable.

#include "encctl/linalg.hpp"

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace encctl {

enum class Definiteness { Positive, Negative };

struct AffineLmi {
    std::string name;
    Definiteness sense = Definiteness::Negative;
    Matrix constant;
    std::vector<Matrix> coefficients;  // one per decision variable; empty matrix == zero

    Matrix evaluate(const Vector& x) const;
    int dim() const { return static_cast<int>(constant.rows()); }
};

struct LmiProblem {
    int num_variables = 0;
    int sym_dim = 0;        // dimension of the symmetric block X (0 if none)
    int tau_index = -1;     // index of tau, -1 if absent
    std::vector<AffineLmi> constraints;

    /// Throws std::invalid_argument on asymmetric data or inconsistent sizes.
    void validate(double tol = 1e-12) const;
    /// Every constraint matrix multiplied by `factor` (> 0).
    LmiProblem scaled(double factor) const;
};

/// Number of free entries of an n x n symmetric matrix.
int sym_vars(int n);
/// Basis matrix of the k-th symmetric coordinate.
Matrix sym_basis(int n, int k);
Matrix vars_to_sym(const Vector& x, int n);
/// Throws std::invalid_argument if X is not symmetric.
Vector sym_to_vars(const Matrix& X);

struct SdpCertificate {
    Matrix X;
    double tau = 0.0;
    Vector variables;
    double margin_achieved = 0.0;
    int solver_iterations = 0;
};

enum class SdpVerdict { Feasible, Infeasible, NumericalFailure };

const char* to_string(SdpVerdict v);

struct SdpResult {
    SdpVerdict verdict = SdpVerdict::NumericalFailure;
    std::optional<SdpCertificate> certificate;  // present iff Feasible
    double best_margin = 0.0;                    // -s at termination
    int iterations = 0;
};

struct SdpOptions {
    double delta = 1e-7;
    int newton_cap = 200;            // per centering step
    double variable_bound = 1e6;     // |x_i| <= bound
    double barrier_growth = 8.0;
    double gap_tolerance = 1e-10;
};

SdpResult solve_feasibility(const LmiProblem& problem, const SdpOptions& options = {});

/// Minimum satisfaction margin over all constraints: lambda_min(F) for
/// positive constraints, -lambda_max(F) for negative ones. Uses cert.X,
/// cert.tau and, for any remaining variables, cert.variables.
double check_certificate(const LmiProblem& problem, const SdpCertificate& cert);

enum class GainStatus { Certified, UnstableOrUncertifiable };

struct BisectionStep {
    double gain;
    SdpVerdict verdict;
};

struct GainResult {
    GainStatus status = GainStatus::UnstableOrUncertifiable;
    double gain = 0.0;
    std::optional<SdpCertificate> certificate;
    std::vector<BisectionStep> trace;
};

struct BisectionOptions {
    double lo = 0.0;
    double hi = 100.0;
    double tol = 1e-3;
    double hi_cap = 1e4;
    SdpOptions sdp;
};

/// Smallest certified gain within tol. builder(gain^2) returns the LMI
/// problem for that gain; feasibility must be monotone in the gain.
GainResult bisect_gain(const std::function<LmiProblem(double)>& builder, const BisectionOptions& options = {});

}  // namespace encctl
