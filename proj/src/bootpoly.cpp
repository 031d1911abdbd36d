#include "encctl/bootpoly.hpp"

#include "encctl/kernels.hpp"
#include "encctl/lp.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace encctl {

void BootstrapSpec::validate() const {
    if (!(q > 0.0) || !std::isfinite(q)) throw std::invalid_argument("bootstrap spec: q must be positive");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("bootstrap spec: epsilon must lie in (0,1)");
    if (K < 0) throw std::invalid_argument("bootstrap spec: K must be >= 0");
    if (degree < 1) throw std::invalid_argument("bootstrap spec: degree must be >= 1");
}

double centered_mod(double m, double q) { return m - q * std::round(m / q); }

namespace {

double clenshaw(const Vector& c, double x) {
    double b1 = 0.0;
    double b2 = 0.0;
    for (Eigen::Index k = c.size() - 1; k >= 1; --k) {
        const double b0 = c[k] + 2.0 * x * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    return (c.size() ? c[0] : 0.0) + x * b1 - b2;
}

// T_1, T_3, ... , T_{2k-1} at x.
void odd_chebyshev_row(double x, Eigen::Ref<Eigen::RowVectorXd> row) {
    double t_prev = 1.0;  // T_0
    double t_cur = x;     // T_1
    for (Eigen::Index j = 0; j < row.size(); ++j) {
        row[j] = t_cur;
        for (int step = 0; step < 2; ++step) {
            const double t_next = 2.0 * x * t_cur - t_prev;
            t_prev = t_cur;
            t_cur = t_next;
        }
    }
}

}  // namespace

double evaluate(const BootstrapPolynomial& poly, double m) {
    return clenshaw(poly.coefficients, m / poly.spec.domain_radius());
}

double evaluate_at_modulus(const BootstrapPolynomial& poly, double m, double q_use) {
    const double scale = poly.spec.q / q_use;
    return evaluate(poly, m * scale) / scale;
}

BootstrapPolynomial fit(const BootstrapSpec& spec, const FitOptions& options) {
    spec.validate();
    if (options.samples_per_interval < 2 * (spec.degree + 1))
        throw std::invalid_argument("fit: samples_per_interval must be >= 2(d+1)");

    // Work at q = 1; the program is homogeneous in q.
    const int n_odd = (spec.degree + 1) / 2;
    const double radius = spec.K + 0.5 * spec.epsilon;
    const double half = 0.5 * spec.epsilon;
    const int S = options.samples_per_interval;

    std::vector<double> nodes;
    nodes.reserve(S);
    for (int k = 0; k < S; ++k) {
        const double m = half * std::cos((2.0 * k + 1.0) * std::numbers::pi / (2.0 * S));
        if (std::abs(m) > 1e-15) nodes.push_back(m);
    }

    // Odd p makes (m, r) and (-m, -r) the same constraint; keep r >= 0 and,
    // for r = 0, m > 0.
    std::vector<std::pair<double, int>> samples;
    for (int r = 0; r <= spec.K; ++r)
        for (double m : nodes)
            if (r > 0 || m > 0.0) samples.emplace_back(m, r);

    const Eigen::Index rows = 2 * static_cast<Eigen::Index>(samples.size());
    LpProblem lp;
    lp.c = Vector::Zero(n_odd + 1);
    lp.c[n_odd] = 1.0;  // minimize gamma
    lp.G.resize(rows, n_odd + 1);
    lp.h.resize(rows);
    Eigen::RowVectorXd phi(n_odd);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto [m, r] = samples[i];
        odd_chebyshev_row((m - r) / radius, phi);
        const Eigen::Index a = 2 * static_cast<Eigen::Index>(i);
        //  p(v) - m <= gamma |m|  and  m - p(v) <= gamma |m|
        lp.G.row(a) << phi, -std::abs(m);
        lp.h[a] = m;
        lp.G.row(a + 1) << -phi, -std::abs(m);
        lp.h[a + 1] = -m;
    }
    // Roots at every nonzero multiple of q (r = 0 is structural).
    lp.A = Matrix::Zero(spec.K, n_odd + 1);
    lp.b = Vector::Zero(spec.K);
    for (int r = 1; r <= spec.K; ++r) {
        odd_chebyshev_row(r / radius, phi);
        lp.A.row(r - 1).head(n_odd) = phi;
    }

    LpSolution sol;
    try {
        sol = solve_lp(lp);
    } catch (const LpError& e) {
        throw FitError(std::string("fit: LP failed: ") + e.what(), 1.0);
    }

    BootstrapPolynomial poly;
    poly.spec = spec;
    poly.coefficients = Vector::Zero(spec.degree + 1);
    for (int j = 0; j < n_odd; ++j) poly.coefficients[2 * j + 1] = spec.q * sol.x[j];
    poly.lp_gamma = sol.x[n_odd];

    VerifyOptions vo;
    vo.samples_per_interval = options.verification_samples_per_interval;
    vo.seed = options.verification_seed;
    poly.gamma_certified = verify(poly, vo);
    poly.verification_samples = vo.samples_per_interval * (2 * spec.K + 1);
    if (!std::isfinite(poly.gamma_certified))
        throw FitError("fit: polynomial failed the root check at multiples of q", poly.lp_gamma);
    return poly;
}

std::vector<double> verification_points(const BootstrapSpec& spec, std::int64_t samples_per_interval,
                                        std::uint64_t seed) {
    const double half = 0.5 * spec.epsilon * spec.q;
    const std::int64_t n_grid = samples_per_interval - samples_per_interval / 4;
    const std::int64_t n_rand = samples_per_interval - n_grid;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-half, half);

    std::vector<double> pts;
    pts.reserve(static_cast<std::size_t>(samples_per_interval) * (2 * spec.K + 1));
    for (int r = -spec.K; r <= spec.K; ++r) {
        const double offset = r * spec.q;
        for (std::int64_t i = 0; i < n_grid; ++i) {
            const double m = n_grid == 1 ? half : -half + 2.0 * half * static_cast<double>(i) / (n_grid - 1);
            if (m != 0.0) pts.push_back(m - offset);
        }
        for (std::int64_t i = 0; i < n_rand; ++i) {
            const double m = uni(rng);
            if (m != 0.0) pts.push_back(m - offset);
        }
    }
    return pts;
}

double verify(const BootstrapPolynomial& poly, const VerifyOptions& options) {
    poly.spec.validate();
    if (poly.coefficients.size() == 0) throw std::invalid_argument("verify: empty coefficient vector");
    for (int r = -poly.spec.K; r <= poly.spec.K; ++r)
        if (std::abs(evaluate(poly, r * poly.spec.q)) > options.root_tolerance * poly.spec.q)
            return std::numeric_limits<double>::infinity();

    const auto pts = verification_points(poly.spec, options.samples_per_interval, options.seed);
    return options.parallel ? kernels::max_relative_error_parallel(poly, pts)
                            : kernels::max_relative_error_serial(poly, pts);
}

}  // namespace encctl
