#pragma once

// Plant, controller, closed-loop and lifted representations of the encrypted
// control loop, plus the interconnection/lifting algebra and a reference
// simulator for all of them.

#include "encctl/linalg.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace encctl {

/// x+ = A x + B u + B1 w1,  y = C x + F1 w1,  z = C1 x + E u + D1 w1.
struct Plant {
    Matrix A, B, B1, C, F1, C1, E, D1;

    int states() const { return static_cast<int>(A.rows()); }
    int inputs() const { return static_cast<int>(B.cols()); }
    int disturbances() const { return static_cast<int>(B1.cols()); }
    int measurements() const { return static_cast<int>(C.rows()); }
    int performance_outputs() const { return static_cast<int>(C1.rows()); }

    /// Throws std::invalid_argument naming the offending pair.
    void validate() const;
};

/// xc+ = Ac xc + Bc y + B2 w2 + Ac wu,  u = Cc xc + Dc y + F2 w2,  zu = xc.
///
/// The uncertainty input enters through Ac itself: the bootstrapped state is
/// what the next update multiplies.
struct Controller {
    Matrix Ac, Bc, B2, Cc, Dc, F2;

    int states() const { return static_cast<int>(Ac.rows()); }
    int measurements() const { return static_cast<int>(Bc.cols()); }
    int outputs() const { return static_cast<int>(Cc.rows()); }
    int disturbances() const { return static_cast<int>(B2.cols()); }

    void validate() const;
};

/// Block matrices of a system with a performance channel (wp -> zp) and an
/// uncertainty channel (wu -> zu).
struct LoopMatrices {
    Matrix A, Bp, Bu, Cp, Dpp, Dpu, Cu, Dup, Duu;

    int states() const { return static_cast<int>(A.rows()); }
    int perf_inputs() const { return static_cast<int>(Bp.cols()); }
    int perf_outputs() const { return static_cast<int>(Cp.rows()); }
    int unc_inputs() const { return static_cast<int>(Bu.cols()); }
    int unc_outputs() const { return static_cast<int>(Cu.rows()); }

    void validate() const;
};

struct ClosedLoop : LoopMatrices {};

/// One lifted step covers `horizon` base steps. Performance signals are
/// stacked time-ascending; the uncertainty channel acts at the first base
/// step of each block only.
struct LiftedSystem {
    LoopMatrices blocks;
    int horizon = 1;
};

/// P_p = [[Qp, Sp], [Sp^T, Rp]] on the stacked vector (wp, zp).
struct PerformanceIndex {
    Matrix Qp, Sp, Rp;

    Matrix assembled() const;
    void validate() const;
};

/// Qp = -gain^2 I, Sp = 0, Rp = I.
PerformanceIndex l2_gain_index(double gain, int perf_inputs, int perf_outputs);

ClosedLoop interconnect(const Plant& plant, const Controller& controller);

LiftedSystem lift(const ClosedLoop& cl, int horizon);

PerformanceIndex lift_performance(const PerformanceIndex& p, int horizon);

struct Trajectory {
    std::vector<Vector> state;  // steps + 1 entries, state[0] = x0
    std::vector<Vector> zp;     // steps entries
    std::vector<Vector> zu;     // steps entries
    std::vector<Vector> wu;     // uncertainty inputs actually applied
};

/// Open uncertainty channel: wu is a given signal.
Trajectory simulate(const LoopMatrices& sys, const Vector& x0, const std::vector<Vector>& wp,
                    const std::vector<Vector>& wu, int steps);

/// Closed uncertainty channel: wu(t) = feedback(t, zu(t)). Requires Duu = 0.
using UncertaintyFeedback = std::function<Vector(int, const Vector&)>;
Trajectory simulate(const LoopMatrices& sys, const Vector& x0, const std::vector<Vector>& wp,
                    const UncertaintyFeedback& feedback, int steps);

/// Stacks wp(k*T + i), i = 0..T-1, for k = 0..blocks-1.
std::vector<Vector> stack_signal(const std::vector<Vector>& signal, int horizon, int blocks);

/// Max abs deviation between `blocks` steps of `lifted` and blocks*T base steps
/// of `cl` (states at block boundaries, stacked zp, zu), over `trials` seeded
/// random x0, wp and wu. Base wu is applied at the first step of each block.
double lift_deviation(const ClosedLoop& cl, const LiftedSystem& lifted, int blocks, int trials, std::uint64_t seed);

/// Sum over t of [w; z]^T P [w; z].
double quadratic_performance_sum(const PerformanceIndex& p, const std::vector<Vector>& w,
                                 const std::vector<Vector>& z);

}  // namespace encctl
