#include "encctl/statespace.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>

namespace encctl {

namespace {

void require_finite(const Matrix& m, const char* name) {
    if (!m.allFinite()) throw std::invalid_argument(std::string(name) + " has non-finite entries");
}

void require_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols, const std::string& pair) {
    if (m.rows() != rows || m.cols() != cols)
        throw std::invalid_argument("dimension mismatch (" + pair + "): expected " + std::to_string(rows) +
                                    "x" + std::to_string(cols) + ", got " + std::to_string(m.rows()) + "x" +
                                    std::to_string(m.cols()));
}

}  // namespace

void Plant::validate() const {
    const auto n = A.rows();
    require_shape(A, n, n, "A square");
    require_rows(B, n, "A/B");
    require_rows(B1, n, "A/B1");
    require_cols(C, n, "A/C");
    require_shape(F1, C.rows(), B1.cols(), "C/F1 vs B1");
    require_cols(C1, n, "A/C1");
    require_shape(E, C1.rows(), B.cols(), "C1/E vs B");
    require_shape(D1, C1.rows(), B1.cols(), "C1/D1 vs B1");
    const std::pair<const Matrix*, const char*> fields[] = {{&A, "A"},   {&B, "B"},   {&B1, "B1"}, {&C, "C"},
                                                            {&F1, "F1"}, {&C1, "C1"}, {&E, "E"},   {&D1, "D1"}};
    for (auto [m, name] : fields) require_finite(*m, name);
}

void Controller::validate() const {
    const auto n = Ac.rows();
    require_shape(Ac, n, n, "Ac square");
    require_rows(Bc, n, "Ac/Bc");
    require_rows(B2, n, "Ac/B2");
    require_cols(Cc, n, "Ac/Cc");
    require_shape(Dc, Cc.rows(), Bc.cols(), "Cc/Dc vs Bc");
    require_shape(F2, Cc.rows(), B2.cols(), "Cc/F2 vs B2");
    const std::pair<const Matrix*, const char*> fields[] = {{&Ac, "Ac"}, {&Bc, "Bc"}, {&B2, "B2"},
                                                            {&Cc, "Cc"}, {&Dc, "Dc"}, {&F2, "F2"}};
    for (auto [m, name] : fields) require_finite(*m, name);
}

void LoopMatrices::validate() const {
    const auto n = A.rows();
    require_shape(A, n, n, "A square");
    require_rows(Bp, n, "A/Bp");
    require_rows(Bu, n, "A/Bu");
    require_cols(Cp, n, "A/Cp");
    require_cols(Cu, n, "A/Cu");
    require_shape(Dpp, Cp.rows(), Bp.cols(), "Cp/Dpp vs Bp");
    require_shape(Dpu, Cp.rows(), Bu.cols(), "Cp/Dpu vs Bu");
    require_shape(Dup, Cu.rows(), Bp.cols(), "Cu/Dup vs Bp");
    require_shape(Duu, Cu.rows(), Bu.cols(), "Cu/Duu vs Bu");
}

Matrix PerformanceIndex::assembled() const {
    Matrix P(Qp.rows() + Rp.rows(), Qp.cols() + Rp.cols());
    P << Qp, Sp, Sp.transpose(), Rp;
    return P;
}

void PerformanceIndex::validate() const {
    if (Qp.rows() != Qp.cols() || Rp.rows() != Rp.cols())
        throw std::invalid_argument("performance index: Qp and Rp must be square");
    require_shape(Sp, Qp.rows(), Rp.rows(), "Qp/Sp vs Rp");
    if (!is_symmetric(Qp) || !is_symmetric(Rp))
        throw std::invalid_argument("performance index: Qp and Rp must be symmetric");
}

PerformanceIndex l2_gain_index(double gain, int perf_inputs, int perf_outputs) {
    return {-gain * gain * Matrix::Identity(perf_inputs, perf_inputs), Matrix::Zero(perf_inputs, perf_outputs),
            Matrix::Identity(perf_outputs, perf_outputs)};
}

ClosedLoop interconnect(const Plant& p, const Controller& k) {
    p.validate();
    k.validate();
    if (k.measurements() != p.measurements())
        throw std::invalid_argument("dimension mismatch (C/Bc): controller expects " +
                                    std::to_string(k.measurements()) + " measurements, plant provides " +
                                    std::to_string(p.measurements()));
    if (k.outputs() != p.inputs())
        throw std::invalid_argument("dimension mismatch (B/Cc): plant expects " + std::to_string(p.inputs()) +
                                    " inputs, controller provides " + std::to_string(k.outputs()));

    const int n = p.states();
    const int nc = k.states();
    const int mw1 = p.disturbances();
    const int mw2 = k.disturbances();
    const int pz = p.performance_outputs();

    ClosedLoop cl;
    cl.A.resize(n + nc, n + nc);
    cl.A << p.A + p.B * k.Dc * p.C, p.B * k.Cc, k.Bc * p.C, k.Ac;

    cl.Bp.resize(n + nc, mw1 + mw2);
    cl.Bp << p.B1 + p.B * k.Dc * p.F1, p.B * k.F2, k.Bc * p.F1, k.B2;

    cl.Bu.resize(n + nc, nc);
    cl.Bu << Matrix::Zero(n, nc), k.Ac;

    cl.Cp.resize(pz, n + nc);
    cl.Cp << p.C1 + p.E * k.Dc * p.C, p.E * k.Cc;

    cl.Dpp.resize(pz, mw1 + mw2);
    cl.Dpp << p.D1 + p.E * k.Dc * p.F1, p.E * k.F2;

    cl.Dpu = Matrix::Zero(pz, nc);

    cl.Cu.resize(nc, n + nc);
    cl.Cu << Matrix::Zero(nc, n), Matrix::Identity(nc, nc);

    cl.Dup = Matrix::Zero(nc, mw1 + mw2);
    cl.Duu = Matrix::Zero(nc, nc);
    return cl;
}

LiftedSystem lift(const ClosedLoop& cl, int horizon) {
    if (horizon < 1) throw std::invalid_argument("lift: horizon must be >= 1");
    cl.validate();
    const int T = horizon;
    const int n = cl.states();
    const int mp = cl.perf_inputs();
    const int pz = cl.perf_outputs();
    const int mu = cl.unc_inputs();

    // powers[i] = A^i, i = 0..T
    std::vector<Matrix> powers{Matrix::Identity(n, n)};
    for (int i = 1; i <= T; ++i) powers.push_back(powers.back() * cl.A);

    LiftedSystem out;
    out.horizon = T;
    auto& b = out.blocks;
    b.A = powers[T];
    b.Bu = powers[T - 1] * cl.Bu;

    b.Bp.resize(n, mp * T);
    for (int j = 0; j < T; ++j) b.Bp.middleCols(j * mp, mp) = powers[T - 1 - j] * cl.Bp;

    b.Cp.resize(pz * T, n);
    for (int i = 0; i < T; ++i) b.Cp.middleRows(i * pz, pz) = cl.Cp * powers[i];

    b.Dpp = Matrix::Zero(pz * T, mp * T);
    for (int i = 0; i < T; ++i) {
        b.Dpp.block(i * pz, i * mp, pz, mp) = cl.Dpp;
        for (int j = 0; j < i; ++j) b.Dpp.block(i * pz, j * mp, pz, mp) = cl.Cp * powers[i - j - 1] * cl.Bp;
    }

    // First block row is the direct feedthrough (zero for an interconnected loop).
    b.Dpu.resize(pz * T, mu);
    b.Dpu.topRows(pz) = cl.Dpu;
    for (int i = 1; i < T; ++i) b.Dpu.middleRows(i * pz, pz) = cl.Cp * powers[i - 1] * cl.Bu;

    b.Cu = cl.Cu;
    b.Dup = Matrix::Zero(cl.unc_outputs(), mp * T);
    b.Dup.leftCols(mp) = cl.Dup;
    b.Duu = cl.Duu;
    return out;
}

PerformanceIndex lift_performance(const PerformanceIndex& p, int horizon) {
    if (horizon < 1) throw std::invalid_argument("lift_performance: horizon must be >= 1");
    p.validate();
    return {kron_identity(horizon, p.Qp), kron_identity(horizon, p.Sp), kron_identity(horizon, p.Rp)};
}

namespace {

void check_signal(const std::vector<Vector>& s, int steps, Eigen::Index dim, const char* name) {
    if (static_cast<int>(s.size()) < steps)
        throw std::invalid_argument(std::string("simulate: signal ") + name + " shorter than steps");
    for (int t = 0; t < steps; ++t)
        if (s[t].size() != dim)
            throw std::invalid_argument(std::string("simulate: signal ") + name + " has wrong dimension at t=" +
                                        std::to_string(t));
}

}  // namespace

Trajectory simulate(const LoopMatrices& sys, const Vector& x0, const std::vector<Vector>& wp,
                    const std::vector<Vector>& wu, int steps) {
    check_signal(wu, steps, sys.unc_inputs(), "wu");
    return simulate(sys, x0, wp, [&wu](int t, const Vector&) { return wu[t]; }, steps);
}

Trajectory simulate(const LoopMatrices& sys, const Vector& x0, const std::vector<Vector>& wp,
                    const UncertaintyFeedback& feedback, int steps) {
    sys.validate();
    if (steps < 0) throw std::invalid_argument("simulate: negative step count");
    if (x0.size() != sys.states()) throw std::invalid_argument("simulate: x0 has wrong dimension");
    check_signal(wp, steps, sys.perf_inputs(), "wp");

    Trajectory tr;
    tr.state.reserve(steps + 1);
    tr.zp.reserve(steps);
    tr.zu.reserve(steps);
    tr.wu.reserve(steps);
    tr.state.push_back(x0);

    const bool feedthrough = sys.Duu.size() > 0 && max_abs(sys.Duu) != 0.0;
    for (int t = 0; t < steps; ++t) {
        const Vector& x = tr.state.back();
        Vector zu = sys.Cu * x + sys.Dup * wp[t];
        Vector wu = feedback(t, zu);
        if (wu.size() != sys.unc_inputs())
            throw std::invalid_argument("simulate: uncertainty input has wrong dimension at t=" + std::to_string(t));
        if (feedthrough) zu += sys.Duu * wu;
        tr.zp.push_back(sys.Cp * x + sys.Dpp * wp[t] + sys.Dpu * wu);
        tr.state.push_back(sys.A * x + sys.Bp * wp[t] + sys.Bu * wu);
        tr.zu.push_back(std::move(zu));
        tr.wu.push_back(std::move(wu));
    }
    return tr;
}

std::vector<Vector> stack_signal(const std::vector<Vector>& signal, int horizon, int blocks) {
    if (static_cast<int>(signal.size()) < horizon * blocks)
        throw std::invalid_argument("stack_signal: signal too short");
    std::vector<Vector> out;
    out.reserve(blocks);
    for (int k = 0; k < blocks; ++k) {
        const auto dim = signal[k * horizon].size();
        Vector v(dim * horizon);
        for (int i = 0; i < horizon; ++i) v.segment(i * dim, dim) = signal[k * horizon + i];
        out.push_back(std::move(v));
    }
    return out;
}

double lift_deviation(const ClosedLoop& cl, const LiftedSystem& lifted, int blocks, int trials, std::uint64_t seed) {
    if (blocks < 1 || trials < 1) throw std::invalid_argument("lift_deviation: blocks and trials must be >= 1");
    const int T = lifted.horizon;
    const int steps = T * blocks;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    auto random_vector = [&](Eigen::Index n) {
        Vector v(n);
        for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(rng);
        return v;
    };

    double worst = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
        const Vector x0 = random_vector(cl.states());
        std::vector<Vector> wp, wu_base, wu_lifted;
        for (int t = 0; t < steps; ++t) wp.push_back(random_vector(cl.perf_inputs()));
        for (int k = 0; k < blocks; ++k) {
            wu_lifted.push_back(random_vector(cl.unc_inputs()));
            wu_base.push_back(wu_lifted.back());
            for (int i = 1; i < T; ++i) wu_base.push_back(Vector::Zero(cl.unc_inputs()));
        }
        const Trajectory base = simulate(cl, x0, wp, wu_base, steps);
        const Trajectory lift_tr = simulate(lifted.blocks, x0, stack_signal(wp, T, blocks), wu_lifted, blocks);
        const auto z_stacked = stack_signal(base.zp, T, blocks);
        for (int k = 0; k < blocks; ++k) {
            worst = std::max(worst, (lift_tr.state[k + 1] - base.state[(k + 1) * T]).cwiseAbs().maxCoeff());
            worst = std::max(worst, (lift_tr.zp[k] - z_stacked[k]).cwiseAbs().maxCoeff());
            if (cl.unc_outputs() > 0)
                worst = std::max(worst, (lift_tr.zu[k] - base.zu[k * T]).cwiseAbs().maxCoeff());
        }
    }
    return worst;
}

double quadratic_performance_sum(const PerformanceIndex& p, const std::vector<Vector>& w,
                                 const std::vector<Vector>& z) {
    if (w.size() != z.size()) throw std::invalid_argument("quadratic_performance_sum: length mismatch");
    const Matrix P = p.assembled();
    double sum = 0.0;
    for (std::size_t t = 0; t < w.size(); ++t) {
        Vector v(w[t].size() + z[t].size());
        v << w[t], z[t];
        sum += v.dot(P * v);
    }
    return sum;
}

}  // namespace encctl
