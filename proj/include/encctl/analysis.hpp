#pragma once

// Robust quadratic-performance tests for the encrypted loop.
//
// The bootstrapping error is modelled as a sector-bounded uncertainty
// w_u = Delta(z_u) on the controller state. Theorem-1 assembly certifies the
// base loop; Theorem-2 assembly certifies the loop lifted over T_BS steps,
// where the uncertainty acts once per block. Reset and FIR controllers reuse
// the same machinery with a unit sector.

#include "encctl/bootpoly.hpp"
#include "encctl/sdp.hpp"
#include "encctl/statespace.hpp"

#include <optional>
#include <string>

namespace encctl {

/// (w - L_lower z)^T (L_upper z - w) >= 0 componentwise.
struct SectorBound {
    Matrix lower;
    Matrix upper;

    /// [[-2I, Ll + Lu], [(Ll + Lu)^T, -Ll^T Lu - Lu^T Ll]]
    Matrix multiplier() const;
    int dim() const { return static_cast<int>(upper.rows()); }

    static SectorBound symmetric(double gamma, int dim);
};

/// Rejects gamma >= 1 (the error could flip the sign of a state component).
SectorBound sector_from_bootstrap(const BootstrapPolynomial& poly, int n_zu);

/// LMI in (X, tau): X > 0, tau > 0 and
///   F1^T diag(-X, X) F1 + F2^T Pp F2 + tau F3^T Pu F3 < 0
/// with F1 = [I 0 0; A Bp Bu], F2 = [0 I 0; Cp Dpp Dpu], F3 = [0 0 I; Cu Dup Duu].
LmiProblem build_theorem1(const LoopMatrices& sys, const PerformanceIndex& perf, const SectorBound& sector);
LmiProblem build_theorem2(const ClosedLoop& cl, const PerformanceIndex& perf, const SectorBound& sector, int tbs);

/// Nominal loop with the controller state reset to zero every T_reset steps,
/// i.e. Delta = -I inside a unit sector, tested on the lifted system.
LmiProblem build_reset_analysis(const Plant& plant, const Controller& controller, const PerformanceIndex& perf,
                                int t_reset);

/// Delay-line realization of the length-N FIR controller
///   x_c(t) = sum_{j=1..N} Ac^{j-1} Bc y(t-j)  (+ B2 w2 and initial-state terms).
/// State (x, x_c, d_1..d_N) with d_1+ = y and d_i+ = d_{i-1}; z_u = d_N = y(t-N)
/// and Bu = [0; Ac^N Bc; 0], so w_u = -z_u removes the dropped measurement.
LoopMatrices fir_loop(const Plant& plant, const Controller& controller, int N);
LmiProblem build_fir_analysis(const Plant& plant, const Controller& fir_controller, int N,
                              const PerformanceIndex& perf);

enum class Verdict { Certified, NotCertified };
enum class Method { Theorem1, Theorem2 };
enum class AnalysisMode { Bootstrap, Reset, Fir };

const char* to_string(Verdict v);
const char* to_string(Method m);
const char* to_string(AnalysisMode m);

struct AnalysisReport {
    Verdict verdict = Verdict::NotCertified;
    std::optional<double> gain;
    std::optional<SdpCertificate> certificate;
    std::optional<double> certificate_margin;  // re-checked independently
    Method method = Method::Theorem1;
    AnalysisMode mode = AnalysisMode::Bootstrap;
    int tbs = 1;
    double gamma_sector = 0.0;
    LoopMatrices loop;  // matrices the LMI was built from (before lifting)
    std::vector<BisectionStep> trace;
};

struct AnalysisRequest {
    Plant plant;
    Controller controller;
    double gamma_sector = 0.0;  // ignored for reset/FIR (unit sector)
    Method method = Method::Theorem1;
    AnalysisMode mode = AnalysisMode::Bootstrap;
    int tbs = 1;         // lifting horizon, reset period or FIR length
    BisectionOptions bisection;
};

/// l2-gain bound by bisection. Never throws on an uncertifiable loop; the
/// verdict is NOT_CERTIFIED instead.
AnalysisReport analyze(const AnalysisRequest& request);

}  // namespace encctl
