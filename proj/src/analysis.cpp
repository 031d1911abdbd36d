#include "encctl/analysis.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <functional>
#include <stdexcept>

namespace encctl {

Matrix SectorBound::multiplier() const {
    const auto n = upper.rows();
    if (upper.cols() != n || lower.rows() != n || lower.cols() != n)
        throw std::invalid_argument("sector bound: L_lower and L_upper must be square of equal size");
    const Matrix cross = lower + upper;
    Matrix P(2 * n, 2 * n);
    P << -2.0 * Matrix::Identity(n, n), cross, cross.transpose(),
        -(lower.transpose() * upper + upper.transpose() * lower);
    if (n > 0) {
        // The w_u block must penalize uncertainty energy.
        const Eigen::SelfAdjointEigenSolver<Matrix> es(P.topLeftCorner(n, n), Eigen::EigenvaluesOnly);
        if (es.eigenvalues().maxCoeff() >= 0.0) throw std::logic_error("sector multiplier: top-left block not negative");
    }
    return P;
}

SectorBound SectorBound::symmetric(double gamma, int dim) {
    if (!(gamma >= 0.0)) throw std::invalid_argument("sector slope must be non-negative");
    return {-gamma * Matrix::Identity(dim, dim), gamma * Matrix::Identity(dim, dim)};
}

SectorBound sector_from_bootstrap(const BootstrapPolynomial& poly, int n_zu) {
    if (!(poly.gamma_certified < 1.0))
        throw std::invalid_argument("bootstrapping polynomial has gamma >= 1; sector is not certifiable");
    return SectorBound::symmetric(poly.gamma_certified, n_zu);
}

namespace {

void require_rp_psd(const PerformanceIndex& perf) {
    perf.validate();
    if (perf.Rp.size() == 0) return;
    const Eigen::SelfAdjointEigenSolver<Matrix> es(perf.Rp, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-12)
        throw std::invalid_argument("Rp must be positive semidefinite (hypothesis of the robust performance test)");
}

Matrix congruence(const Matrix& F, const Matrix& M) { return symmetrize(F.transpose() * M * F); }

}  // namespace

LmiProblem build_theorem1(const LoopMatrices& sys, const PerformanceIndex& perf, const SectorBound& sector) {
    sys.validate();
    require_rp_psd(perf);
    const int n = sys.states();
    const int mp = sys.perf_inputs();
    const int pz = sys.perf_outputs();
    const int mu = sys.unc_inputs();
    const int nzu = sys.unc_outputs();
    if (perf.Qp.rows() != mp || perf.Rp.rows() != pz)
        throw std::invalid_argument("performance index does not match the performance channel");
    if (sector.dim() != nzu || mu != nzu)
        throw std::invalid_argument("sector dimension does not match the uncertainty channel");

    const int cols = n + mp + mu;
    Matrix F1 = Matrix::Zero(2 * n, cols);
    F1.topLeftCorner(n, n).setIdentity();
    F1.bottomRows(n) << sys.A, sys.Bp, sys.Bu;

    Matrix F2 = Matrix::Zero(mp + pz, cols);
    F2.block(0, n, mp, mp).setIdentity();
    F2.bottomRows(pz) << sys.Cp, sys.Dpp, sys.Dpu;

    Matrix F3 = Matrix::Zero(mu + nzu, cols);
    F3.block(0, n + mp, mu, mu).setIdentity();
    F3.bottomRows(nzu) << sys.Cu, sys.Dup, sys.Duu;

    const int nx = sym_vars(n);
    LmiProblem prob;
    prob.sym_dim = n;
    prob.tau_index = nx;
    prob.num_variables = nx + 1;

    AffineLmi xpos{"X > 0", Definiteness::Positive, Matrix::Zero(n, n), {}};
    AffineLmi tpos{"tau > 0", Definiteness::Positive, Matrix::Zero(1, 1), {}};
    AffineLmi main{"robust performance", Definiteness::Negative, congruence(F2, perf.assembled()), {}};
    xpos.coefficients.resize(prob.num_variables);
    tpos.coefficients.resize(prob.num_variables);
    main.coefficients.resize(prob.num_variables);

    for (int k = 0; k < nx; ++k) {
        const Matrix E = sym_basis(n, k);
        xpos.coefficients[k] = E;
        Matrix mid = Matrix::Zero(2 * n, 2 * n);
        mid.topLeftCorner(n, n) = -E;
        mid.bottomRightCorner(n, n) = E;
        main.coefficients[k] = congruence(F1, mid);
    }
    tpos.coefficients[nx] = Matrix::Ones(1, 1);
    main.coefficients[nx] = congruence(F3, sector.multiplier());

    prob.constraints = {std::move(xpos), std::move(tpos), std::move(main)};
    return prob;
}

LmiProblem build_theorem2(const ClosedLoop& cl, const PerformanceIndex& perf, const SectorBound& sector, int tbs) {
    const LiftedSystem lifted = lift(cl, tbs);
    return build_theorem1(lifted.blocks, lift_performance(perf, tbs), sector);
}

LmiProblem build_reset_analysis(const Plant& plant, const Controller& controller, const PerformanceIndex& perf,
                                int t_reset) {
    if (t_reset < 1) throw std::invalid_argument("reset period must be >= 1");
    const ClosedLoop cl = interconnect(plant, controller);
    return build_theorem2(cl, perf, SectorBound::symmetric(1.0, controller.states()), t_reset);
}

LoopMatrices fir_loop(const Plant& plant, const Controller& controller, int N) {
    if (N < 1) throw std::invalid_argument("FIR length must be >= 1");
    const ClosedLoop cl = interconnect(plant, controller);
    const int n = plant.states();
    const int nc = controller.states();
    const int py = plant.measurements();
    const int nxi = n + nc;
    const int dim = nxi + N * py;
    const int mp = cl.perf_inputs();
    const int pz = cl.perf_outputs();

    LoopMatrices s;
    s.A = Matrix::Zero(dim, dim);
    s.A.topLeftCorner(nxi, nxi) = cl.A;
    s.A.block(nxi, 0, py, n) = plant.C;
    for (int i = 1; i < N; ++i) s.A.block(nxi + i * py, nxi + (i - 1) * py, py, py).setIdentity();

    s.Bp = Matrix::Zero(dim, mp);
    s.Bp.topRows(nxi) = cl.Bp;
    s.Bp.block(nxi, 0, py, plant.disturbances()) = plant.F1;

    s.Bu = Matrix::Zero(dim, py);
    s.Bu.block(n, 0, nc, py) = matrix_power(controller.Ac, N) * controller.Bc;

    s.Cp = Matrix::Zero(pz, dim);
    s.Cp.leftCols(nxi) = cl.Cp;
    s.Dpp = cl.Dpp;
    s.Dpu = Matrix::Zero(pz, py);

    s.Cu = Matrix::Zero(py, dim);
    s.Cu.rightCols(py).setIdentity();
    s.Dup = Matrix::Zero(py, mp);
    s.Duu = Matrix::Zero(py, py);
    return s;
}

LmiProblem build_fir_analysis(const Plant& plant, const Controller& fir_controller, int N,
                              const PerformanceIndex& perf) {
    return build_theorem1(fir_loop(plant, fir_controller, N), perf,
                          SectorBound::symmetric(1.0, plant.measurements()));
}

const char* to_string(Verdict v) { return v == Verdict::Certified ? "CERTIFIED" : "NOT_CERTIFIED"; }
const char* to_string(Method m) { return m == Method::Theorem1 ? "THEOREM_1" : "THEOREM_2"; }
const char* to_string(AnalysisMode m) {
    switch (m) {
        case AnalysisMode::Bootstrap: return "bootstrap";
        case AnalysisMode::Reset: return "reset";
        case AnalysisMode::Fir: return "fir";
    }
    return "?";
}

AnalysisReport analyze(const AnalysisRequest& req) {
    if (req.tbs < 1) throw std::invalid_argument("analyze: T_BS must be >= 1");
    AnalysisReport rep;
    rep.mode = req.mode;
    rep.tbs = req.tbs;

    std::function<LmiProblem(double)> builder;
    switch (req.mode) {
        case AnalysisMode::Bootstrap: {
            if (!(req.gamma_sector >= 0.0 && req.gamma_sector < 1.0))
                throw std::invalid_argument("analyze: sector slope must lie in [0, 1)");
            const ClosedLoop cl = interconnect(req.plant, req.controller);
            const SectorBound sector = SectorBound::symmetric(req.gamma_sector, cl.unc_outputs());
            rep.method = req.method;
            rep.gamma_sector = req.gamma_sector;
            rep.loop = cl;
            if (req.method == Method::Theorem1) {
                rep.tbs = 1;
                builder = [cl, sector](double g2) {
                    return build_theorem1(cl, l2_gain_index(std::sqrt(g2), cl.perf_inputs(), cl.perf_outputs()),
                                          sector);
                };
            } else {
                const int T = req.tbs;
                builder = [cl, sector, T](double g2) {
                    return build_theorem2(cl, l2_gain_index(std::sqrt(g2), cl.perf_inputs(), cl.perf_outputs()),
                                          sector, T);
                };
            }
            break;
        }
        case AnalysisMode::Reset: {
            const ClosedLoop cl = interconnect(req.plant, req.controller);
            rep.method = Method::Theorem2;
            rep.gamma_sector = 1.0;
            rep.loop = cl;
            const Plant p = req.plant;
            const Controller k = req.controller;
            const int T = req.tbs;
            builder = [p, k, T, cl](double g2) {
                return build_reset_analysis(p, k, l2_gain_index(std::sqrt(g2), cl.perf_inputs(), cl.perf_outputs()),
                                            T);
            };
            break;
        }
        case AnalysisMode::Fir: {
            rep.method = Method::Theorem1;
            rep.gamma_sector = 1.0;
            rep.loop = fir_loop(req.plant, req.controller, req.tbs);
            const LoopMatrices s = rep.loop;
            const SectorBound sector = SectorBound::symmetric(1.0, s.unc_outputs());
            builder = [s, sector](double g2) {
                return build_theorem1(s, l2_gain_index(std::sqrt(g2), s.perf_inputs(), s.perf_outputs()), sector);
            };
            break;
        }
    }

    const GainResult gr = bisect_gain(builder, req.bisection);
    rep.trace = gr.trace;
    if (gr.status == GainStatus::Certified && gr.certificate) {
        const double margin = check_certificate(builder(gr.gain * gr.gain), *gr.certificate);
        if (margin > 0.0) {
            rep.verdict = Verdict::Certified;
            rep.gain = gr.gain;
            rep.certificate = gr.certificate;
            rep.certificate_margin = margin;
        }
    }
    return rep;
}

}  // namespace encctl
