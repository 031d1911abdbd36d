#include "encctl/lp.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>

namespace encctl {

namespace {

double max_step(const Vector& v, const Vector& dv) {
    double alpha = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (dv[i] < 0.0) alpha = std::min(alpha, -v[i] / dv[i]);
    return alpha;
}

double inf_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

struct Direction {
    Vector dx, ds, dz;
};

// Inequality-only LP in x. Returns the primal point.
LpSolution solve_inequality_lp(const Vector& c, const Matrix& G, const Vector& h, const LpOptions& opt) {
    const Eigen::Index n = c.size();
    const Eigen::Index m = h.size();
    if (m == 0) {
        if (inf_norm(c) > 0.0) throw LpError("lp: unbounded (no inequality constraints)");
        return {Vector::Zero(n), 0.0, 0, 0.0, 0.0};
    }

    Vector x = Vector::Zero(n);
    Vector s = h - G * x;
    const double smin = s.minCoeff();
    if (smin <= 0.0) s.array() += 1.0 - smin;
    Vector z = Vector::Ones(m);

    const double h_scale = 1.0 + inf_norm(h);
    const double c_scale = 1.0 + inf_norm(c);
    const double g_norm = G.cwiseAbs().maxCoeff();

    for (int it = 0; it < opt.max_iterations; ++it) {
        const Vector rd = G.transpose() * z + c;
        const Vector rp = G * x + s - h;
        const double mu = s.dot(z) / static_cast<double>(m);
        const double obj = c.dot(x);

        // dual residual relative to the size of G^T z, which grows as constraints go tight
        const double d_scale = c_scale + g_norm * inf_norm(z);
        if (inf_norm(rp) <= opt.feasibility_tol * h_scale && inf_norm(rd) <= opt.dual_tol * d_scale &&
            mu <= opt.gap_tol * (1.0 + std::abs(obj)))
            return {x, obj, it, inf_norm(rp), 0.0};

        if (!x.allFinite() || inf_norm(x) > 1e12) throw LpError("lp: iterates diverged (unbounded or infeasible)");

        const Vector w = z.cwiseQuotient(s);
        Matrix H = G.transpose() * w.asDiagonal() * G;
        H.diagonal().array() += 1e-14 * (1.0 + H.diagonal().cwiseAbs().maxCoeff());
        const Eigen::LDLT<Matrix> ldlt(H);
        if (ldlt.info() != Eigen::Success) throw LpError("lp: normal equations factorization failed");

        auto solve_dir = [&](const Vector& rc) {
            Direction d;
            const Vector rhs = -rd - G.transpose() * (w.cwiseProduct(rp) + rc.cwiseQuotient(s));
            d.dx = ldlt.solve(rhs);
            d.dz = w.cwiseProduct(G * d.dx + rp) + rc.cwiseQuotient(s);
            d.ds = (rc - s.cwiseProduct(d.dz)).cwiseQuotient(z);
            return d;
        };

        // Predictor (affine scaling) step.
        const Vector rc_aff = -s.cwiseProduct(z);
        const Direction aff = solve_dir(rc_aff);
        const double ap_aff = std::min(1.0, max_step(s, aff.ds));
        const double ad_aff = std::min(1.0, max_step(z, aff.dz));
        const double mu_aff =
            (s + ap_aff * aff.ds).dot(z + ad_aff * aff.dz) / static_cast<double>(m);
        const double sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3);

        // Corrector.
        const Vector rc = rc_aff - aff.ds.cwiseProduct(aff.dz) + Vector::Constant(m, sigma * mu);
        const Direction d = solve_dir(rc);
        const double ap = std::min(1.0, 0.99 * max_step(s, d.ds));
        const double ad = std::min(1.0, 0.99 * max_step(z, d.dz));
        x += ap * d.dx;
        s += ap * d.ds;
        z += ad * d.dz;
    }
    throw LpError("lp: iteration limit reached");
}

}  // namespace

LpSolution solve_lp(const LpProblem& p, const LpOptions& opt) {
    const Eigen::Index n = p.c.size();
    if (p.G.cols() != n || p.G.rows() != p.h.size()) throw std::invalid_argument("lp: inequality shape mismatch");
    const bool has_eq = p.A.rows() > 0;
    if (has_eq && (p.A.cols() != n || p.A.rows() != p.b.size()))
        throw std::invalid_argument("lp: equality shape mismatch");

    Vector x_particular = Vector::Zero(n);
    Matrix basis = Matrix::Identity(n, n);
    if (has_eq) {
        Eigen::JacobiSVD<Matrix> svd(p.A, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const auto& sv = svd.singularValues();
        const double tol = 1e-12 * std::max(1.0, sv.size() ? sv[0] : 0.0) * static_cast<double>(std::max(p.A.rows(), p.A.cols()));
        Eigen::Index rank = 0;
        while (rank < sv.size() && sv[rank] > tol) ++rank;
        svd.setThreshold(tol / std::max(1.0, sv.size() ? sv[0] : 1.0));
        x_particular = svd.solve(p.b);
        if (inf_norm(p.A * x_particular - p.b) > 1e-9 * (1.0 + inf_norm(p.b)))
            throw LpError("lp: equality constraints are inconsistent");
        basis = svd.matrixV().rightCols(n - rank);
    }

    const Vector c_red = basis.transpose() * p.c;
    const Matrix G_red = p.G * basis;
    const Vector h_red = p.h - p.G * x_particular;

    LpSolution reduced;
    if (basis.cols() == 0) {
        if (h_red.size() && h_red.minCoeff() < -opt.feasibility_tol * (1.0 + inf_norm(p.h)))
            throw LpError("lp: infeasible (equalities fix x and violate inequalities)");
        reduced.x = Vector::Zero(0);
    } else {
        reduced = solve_inequality_lp(c_red, G_red, h_red, opt);
    }

    LpSolution out;
    out.x = x_particular + basis * reduced.x;
    out.objective = p.c.dot(out.x);
    out.iterations = reduced.iterations;
    const Vector viol = (p.G * out.x - p.h).cwiseMax(0.0);
    out.primal_residual = inf_norm(viol);
    out.equality_residual = has_eq ? inf_norm(p.A * out.x - p.b) : 0.0;
    return out;
}

}  // namespace encctl
