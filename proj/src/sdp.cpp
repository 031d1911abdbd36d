#include "encctl/sdp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace encctl {

Matrix AffineLmi::evaluate(const Vector& x) const {
    Matrix out = constant;
    for (std::size_t i = 0; i < coefficients.size(); ++i)
        if (coefficients[i].size() != 0 && x[static_cast<Eigen::Index>(i)] != 0.0)
            out.noalias() += x[static_cast<Eigen::Index>(i)] * coefficients[i];
    return out;
}

void LmiProblem::validate(double tol) const {
    if (num_variables < 0 || sym_vars(sym_dim) > num_variables)
        throw std::invalid_argument("lmi problem: symmetric block does not fit in the variable vector");
    if (tau_index >= num_variables) throw std::invalid_argument("lmi problem: tau index out of range");
    for (const auto& c : constraints) {
        if (c.constant.rows() != c.constant.cols())
            throw std::invalid_argument("lmi problem: constraint '" + c.name + "' is not square");
        if (!is_symmetric(c.constant, tol))
            throw std::invalid_argument("lmi problem: constraint '" + c.name + "' constant is not symmetric");
        if (static_cast<int>(c.coefficients.size()) != num_variables)
            throw std::invalid_argument("lmi problem: constraint '" + c.name + "' has wrong coefficient count");
        for (const auto& f : c.coefficients) {
            if (f.size() == 0) continue;
            if (f.rows() != c.constant.rows() || f.cols() != c.constant.cols())
                throw std::invalid_argument("lmi problem: constraint '" + c.name + "' coefficient size mismatch");
            if (!is_symmetric(f, tol))
                throw std::invalid_argument("lmi problem: constraint '" + c.name + "' coefficient is not symmetric");
        }
    }
}

LmiProblem LmiProblem::scaled(double factor) const {
    if (!(factor > 0.0)) throw std::invalid_argument("lmi problem: scale factor must be positive");
    LmiProblem out = *this;
    for (auto& c : out.constraints) {
        c.constant *= factor;
        for (auto& f : c.coefficients) f *= factor;
    }
    return out;
}

int sym_vars(int n) { return n * (n + 1) / 2; }

Matrix sym_basis(int n, int k) {
    Matrix E = Matrix::Zero(n, n);
    int idx = 0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i <= j; ++i, ++idx)
            if (idx == k) {
                E(i, j) = 1.0;
                E(j, i) = 1.0;
                return E;
            }
    throw std::out_of_range("sym_basis: index out of range");
}

Matrix vars_to_sym(const Vector& x, int n) {
    Matrix X(n, n);
    int idx = 0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i <= j; ++i, ++idx) X(i, j) = X(j, i) = x[idx];
    return X;
}

Vector sym_to_vars(const Matrix& X) {
    if (!is_symmetric(X)) throw std::invalid_argument("certificate matrix X is not symmetric");
    const int n = static_cast<int>(X.rows());
    Vector x(sym_vars(n));
    int idx = 0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i <= j; ++i, ++idx) x[idx] = X(i, j);
    return x;
}

const char* to_string(SdpVerdict v) {
    switch (v) {
        case SdpVerdict::Feasible: return "FEASIBLE";
        case SdpVerdict::Infeasible: return "INFEASIBLE";
        case SdpVerdict::NumericalFailure: return "NUMERICAL_FAILURE";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Barrier solver
// ---------------------------------------------------------------------------

namespace {

struct ShiftedConstraint {
    Matrix constant;                      // sign * F0
    std::vector<int> vars;                // indices with nonzero coefficient
    std::vector<Matrix> coefficients;     // sign * F_i for i in vars
};

struct Phase1 {
    std::vector<ShiftedConstraint> cons;
    int n = 0;            // number of x variables; s is index n
    double bound = 1e6;
    double degree = 0.0;  // barrier parameter nu

    // S_j(z) = sign*F_j(x) + s I
    Matrix slack(std::size_t j, const Vector& z) const {
        const auto& c = cons[j];
        Matrix S = c.constant;
        for (std::size_t k = 0; k < c.vars.size(); ++k) S.noalias() += z[c.vars[k]] * c.coefficients[k];
        S.diagonal().array() += z[n];
        return S;
    }

    // Barrier value; +inf outside the domain.
    double barrier(const Vector& z) const {
        double f = 0.0;
        for (int i = 0; i < n; ++i) {
            const double a = bound * bound - z[i] * z[i];
            if (!(a > 0.0)) return std::numeric_limits<double>::infinity();
            f -= std::log(a);
        }
        for (std::size_t j = 0; j < cons.size(); ++j) {
            const Eigen::LLT<Matrix> llt(slack(j, z));
            if (llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
            const auto& L = llt.matrixLLT();
            for (Eigen::Index i = 0; i < L.rows(); ++i) {
                const double d = L(i, i);
                if (!(d > 0.0) || !std::isfinite(d)) return std::numeric_limits<double>::infinity();
                f -= 2.0 * std::log(d);
            }
        }
        return f;
    }

    // Gradient and Hessian of t*s + barrier(z). Returns false if z is outside the domain.
    bool derivatives(const Vector& z, double t, Vector& g, Matrix& H) const {
        const int dim = n + 1;
        g = Vector::Zero(dim);
        H = Matrix::Zero(dim, dim);
        g[n] = t;
        for (int i = 0; i < n; ++i) {
            const double a = bound * bound - z[i] * z[i];
            if (!(a > 0.0)) return false;
            g[i] += 2.0 * z[i] / a;
            H(i, i) += 2.0 / a + 4.0 * z[i] * z[i] / (a * a);
        }
        for (std::size_t j = 0; j < cons.size(); ++j) {
            const auto& c = cons[j];
            const Eigen::LLT<Matrix> llt(slack(j, z));
            if (llt.info() != Eigen::Success) return false;
            const auto L = llt.matrixL();
            const Eigen::Index m = c.constant.rows();

            // W_k = L^-1 A_k L^-T for every active variable plus s (A_s = I).
            std::vector<Matrix> W;
            std::vector<int> idx = c.vars;
            idx.push_back(n);
            W.reserve(idx.size());
            for (std::size_t k = 0; k < c.vars.size(); ++k) {
                Matrix tmp = L.solve(c.coefficients[k]);
                Matrix wk = L.solve(tmp.transpose());
                W.push_back(std::move(wk));
            }
            {
                const Matrix Linv = L.solve(Matrix::Identity(m, m));
                W.push_back(Linv * Linv.transpose());
            }
            for (std::size_t a = 0; a < idx.size(); ++a) {
                g[idx[a]] -= W[a].trace();
                for (std::size_t b = a; b < idx.size(); ++b) {
                    const double v = (W[a].cwiseProduct(W[b].transpose())).sum();
                    H(idx[a], idx[b]) += v;
                    if (a != b) H(idx[b], idx[a]) += v;
                }
            }
        }
        return g.allFinite() && H.allFinite();
    }
};

double gershgorin_radius(const Matrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().rowwise().sum().maxCoeff();
}

SdpCertificate make_certificate(const LmiProblem& p, const Vector& x, double margin, int iterations) {
    SdpCertificate cert;
    cert.variables = x;
    cert.X = p.sym_dim > 0 ? vars_to_sym(x, p.sym_dim) : Matrix(0, 0);
    cert.tau = p.tau_index >= 0 ? x[p.tau_index] : 0.0;
    cert.margin_achieved = margin;
    cert.solver_iterations = iterations;
    return cert;
}

}  // namespace

SdpResult solve_feasibility(const LmiProblem& problem, const SdpOptions& opt) {
    if (!(opt.delta > 0.0)) throw std::invalid_argument("solve_feasibility: delta must be positive");
    problem.validate();

    Phase1 ph;
    ph.n = problem.num_variables;
    ph.bound = opt.variable_bound;
    ph.degree = 2.0 * ph.n;
    double s0 = 0.0;
    for (const auto& c : problem.constraints) {
        const double sign = c.sense == Definiteness::Positive ? 1.0 : -1.0;
        ShiftedConstraint sc;
        sc.constant = sign * c.constant;
        for (int i = 0; i < ph.n; ++i)
            if (c.coefficients[i].size() != 0 && max_abs(c.coefficients[i]) > 0.0) {
                sc.vars.push_back(i);
                sc.coefficients.push_back(sign * c.coefficients[i]);
            }
        s0 = std::max(s0, gershgorin_radius(c.constant));
        ph.degree += static_cast<double>(c.dim());
        ph.cons.push_back(std::move(sc));
    }

    Vector z = Vector::Zero(ph.n + 1);
    z[ph.n] = s0 + 1.0;

    SdpResult result;
    int total_newton = 0;
    const auto x_of = [&](const Vector& zz) { return Vector(zz.head(ph.n)); };

    auto finish_feasible = [&](const Vector& zz) {
        result.verdict = SdpVerdict::Feasible;
        result.best_margin = -zz[ph.n];
        result.iterations = total_newton;
        result.certificate = make_certificate(problem, x_of(zz), -zz[ph.n], total_newton);
        return result;
    };

    // Feasibility is decided as soon as the margin clearly clears delta.
    const double early_exit = -10.0 * opt.delta;
    const double scale = 1.0 + s0;
    double t = 1.0 / scale;

    for (int stage = 0; stage < 200; ++stage) {
        // Centering: damped Newton on t*s + barrier.
        bool centered = false;
        for (int it = 0; it < opt.newton_cap; ++it) {
            Vector g;
            Matrix H;
            if (!ph.derivatives(z, t, g, H)) {
                result.verdict = SdpVerdict::NumericalFailure;
                result.best_margin = -z[ph.n];
                result.iterations = total_newton;
                return result;
            }
            ++total_newton;
            const Eigen::LDLT<Matrix> ldlt(H);
            Vector dz = -ldlt.solve(g);
            if (!dz.allFinite()) break;
            const double decrement = -g.dot(dz);
            if (decrement <= 2e-10) {
                centered = true;
                break;
            }
            const double f0 = t * z[ph.n] + ph.barrier(z);
            double alpha = 1.0;
            bool moved = false;
            while (alpha > 1e-14) {
                const Vector trial = z + alpha * dz;
                const double f1 = t * trial[ph.n] + ph.barrier(trial);
                if (std::isfinite(f1) && f1 <= f0 - 0.25 * alpha * decrement) {
                    z = trial;
                    moved = true;
                    break;
                }
                alpha *= 0.5;
            }
            if (z[ph.n] <= early_exit) return finish_feasible(z);
            if (!moved) {
                // Stalled at the numerical floor; treat as centered.
                centered = true;
                break;
            }
        }
        if (!centered) {
            if (z[ph.n] <= -opt.delta) return finish_feasible(z);
            result.verdict = SdpVerdict::NumericalFailure;
            result.best_margin = -z[ph.n];
            result.iterations = total_newton;
            return result;
        }

        const double gap = ph.degree / t;
        // Lower bound on the optimal s at the central point.
        if (z[ph.n] - gap > -opt.delta) {
            result.verdict = SdpVerdict::Infeasible;
            result.best_margin = -z[ph.n];
            result.iterations = total_newton;
            return result;
        }
        if (gap <= opt.gap_tolerance * scale) break;
        t *= opt.barrier_growth;
    }

    if (z[ph.n] <= -opt.delta) return finish_feasible(z);
    result.verdict = SdpVerdict::Infeasible;
    result.best_margin = -z[ph.n];
    result.iterations = total_newton;
    return result;
}

// ---------------------------------------------------------------------------
// Independent certificate check (symmetric eigensolver only)
// ---------------------------------------------------------------------------

double check_certificate(const LmiProblem& problem, const SdpCertificate& cert) {
    problem.validate();
    Vector x = Vector::Zero(problem.num_variables);
    if (cert.variables.size() == problem.num_variables) x = cert.variables;
    else if (cert.variables.size() != 0)
        throw std::invalid_argument("check_certificate: variable vector has wrong size");
    if (problem.sym_dim > 0) {
        if (cert.X.rows() != problem.sym_dim || cert.X.cols() != problem.sym_dim)
            throw std::invalid_argument("check_certificate: X has wrong dimension");
        x.head(sym_vars(problem.sym_dim)) = sym_to_vars(cert.X);
    }
    if (problem.tau_index >= 0) x[problem.tau_index] = cert.tau;

    double margin = std::numeric_limits<double>::infinity();
    for (const auto& c : problem.constraints) {
        const Matrix F = c.evaluate(x);
        const Eigen::SelfAdjointEigenSolver<Matrix> es(F, Eigen::EigenvaluesOnly);
        if (es.info() != Eigen::Success) throw std::runtime_error("check_certificate: eigensolver failed");
        const auto& ev = es.eigenvalues();
        const double m = c.sense == Definiteness::Positive ? ev.minCoeff() : -ev.maxCoeff();
        margin = std::min(margin, m);
    }
    return margin;
}

// ---------------------------------------------------------------------------
// Gain bisection
// ---------------------------------------------------------------------------

GainResult bisect_gain(const std::function<LmiProblem(double)>& builder, const BisectionOptions& opt) {
    if (!(opt.tol > 0.0) || opt.lo < 0.0 || !(opt.hi > opt.lo))
        throw std::invalid_argument("bisect_gain: need 0 <= lo < hi and tol > 0");
    GainResult out;
    auto probe = [&](double g) {
        const SdpResult r = solve_feasibility(builder(g * g), opt.sdp);
        out.trace.push_back({g, r.verdict});
        return r;
    };

    double lo = opt.lo;
    double hi = opt.hi;
    SdpResult hi_res = probe(hi);
    while (hi_res.verdict != SdpVerdict::Feasible) {
        lo = hi;
        hi *= 2.0;
        if (hi > opt.hi_cap) return out;  // UnstableOrUncertifiable
        hi_res = probe(hi);
    }
    if (lo == opt.lo) {
        SdpResult lo_res = probe(lo);
        if (lo_res.verdict == SdpVerdict::Feasible) {
            out.status = GainStatus::Certified;
            out.gain = lo;
            out.certificate = lo_res.certificate;
            return out;
        }
    }
    while (hi - lo > opt.tol) {
        const double mid = 0.5 * (lo + hi);
        SdpResult r = probe(mid);
        // Numerical failures count as "not certified".
        if (r.verdict == SdpVerdict::Feasible) {
            hi = mid;
            hi_res = std::move(r);
        } else {
            lo = mid;
        }
    }
    out.status = GainStatus::Certified;
    out.gain = hi;
    out.certificate = hi_res.certificate;
    return out;
}

}  // namespace encctl
