#include "encctl/bootpoly.hpp"
#include "encctl/kernels.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace encctl;

namespace {

// Chebyshev series via the trigonometric definition on [-1, 1].
double cheb_direct(const Vector& c, double x) {
    double s = 0.0;
    for (Eigen::Index k = 0; k < c.size(); ++k) s += c(k) * std::cos(static_cast<double>(k) * std::acos(x));
    return s;
}

BootstrapPolynomial identity_poly(const BootstrapSpec& spec) {
    BootstrapPolynomial p;
    p.spec = spec;
    p.coefficients = Vector::Zero(spec.degree + 1);
    p.coefficients(1) = spec.domain_radius();
    return p;
}

}  // namespace

TEST_CASE("centered_mod") {
    CHECK(centered_mod(0.3, 1.0) == doctest::Approx(0.3));
    CHECK(centered_mod(1.2, 1.0) == doctest::Approx(0.2));
    CHECK(centered_mod(-2.6, 1.0) == doctest::Approx(0.4));
    CHECK(centered_mod(0.5, 1.0) == doctest::Approx(-0.5));
    CHECK(centered_mod(-0.5, 1.0) == doctest::Approx(0.5));
    CHECK(centered_mod(7.0, 2.0) == doctest::Approx(-1.0));
    CHECK(centered_mod(3.0, 4.0) == doctest::Approx(-1.0));
}

TEST_CASE("spec validation") {
    BootstrapSpec s;
    CHECK_NOTHROW(s.validate());
    s.epsilon = 1.5;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = {};
    s.K = -1;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = {};
    s.degree = 0;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = {};
    s.q = 0.0;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    FitOptions few;
    few.samples_per_interval = 10;
    CHECK_THROWS_AS(fit(BootstrapSpec{}, few), std::invalid_argument);
}

TEST_CASE("Clenshaw evaluation matches the trigonometric definition") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n;
    BootstrapPolynomial p;
    p.spec.q = 1.0;
    p.spec.K = 2;
    p.spec.epsilon = 0.5;
    p.spec.degree = 15;
    p.coefficients.resize(16);
    for (auto& c : p.coefficients) c = n(rng);
    const double R = p.spec.domain_radius();
    for (int i = 0; i <= 200; ++i) {
        const double x = -1.0 + 2.0 * i / 200.0;
        CHECK(evaluate(p, x * R) == doctest::Approx(cheb_direct(p.coefficients, x)).epsilon(1e-12));
    }
}

TEST_CASE("K = 0 interpolant is exact") {
    BootstrapSpec s;
    s.K = 0;
    s.epsilon = 0.5;
    s.degree = 3;
    const auto p = identity_poly(s);
    CHECK(verify(p) <= 1e-12);
}

TEST_CASE("fit with K = 0 and degree 1 recovers the identity") {
    BootstrapSpec s;
    s.K = 0;
    s.degree = 1;
    const auto p = fit(s);
    CHECK(p.gamma_certified <= 1e-9);
}

TEST_CASE("zero polynomial has gamma exactly 1") {
    BootstrapSpec s;
    s.K = 1;
    s.degree = 5;
    BootstrapPolynomial p;
    p.spec = s;
    p.coefficients = Vector::Zero(6);
    CHECK(verify(p) == 1.0);
    CHECK_FALSE(p.usable());
}

TEST_CASE("a polynomial missing a root fails verification") {
    BootstrapSpec s;
    s.K = 1;
    s.degree = 3;
    const auto p = identity_poly(s);
    CHECK(std::isinf(verify(p)));
}

TEST_CASE("cubic with one overflow: brute-force oracle") {
    // Odd cubics vanishing at +-q form the family t (x - x^3/q^2). Its sector
    // gamma on I has a closed form per interval; minimize over t on a grid.
    BootstrapSpec s;
    s.q = 1.0;
    s.K = 1;
    s.epsilon = 0.1;
    s.degree = 3;
    const double h = 0.5 * s.epsilon;
    auto gamma_of = [&](double t) {
        double g = 0.0;
        for (int i = 1; i <= 20000; ++i) {
            const double m = h * i / 20000.0;
            for (double mm : {m, -m})
                for (int r = -1; r <= 1; ++r) {
                    const double v = mm - r;
                    g = std::max(g, std::abs(t * (v - v * v * v) - mm) / std::abs(mm));
                }
        }
        return g;
    };
    double best = 1e9;
    for (int i = -2000; i <= 2000; ++i) best = std::min(best, gamma_of(i * 1e-3));
    for (int i = -1000; i <= 1000; ++i) best = std::min(best, gamma_of(i * 1e-7));
    const auto p = fit(s);
    CHECK(p.gamma_certified == doctest::Approx(best).epsilon(1e-6));
    CHECK_FALSE(p.usable());
}

TEST_CASE("quintic with one overflow: pattern-search oracle") {
    // Odd quintics vanishing at +-1: (x - x^3)(a + b x^2). gamma(a, b) is convex.
    BootstrapSpec s;
    s.q = 1.0;
    s.K = 1;
    s.epsilon = 0.1;
    s.degree = 5;
    const double h = 0.5 * s.epsilon;
    std::vector<std::pair<double, double>> pts;  // (v, z)
    for (int i = 1; i <= 4000; ++i) {
        const double m = h * i / 4000.0;
        for (double mm : {m, -m})
            for (int r = -1; r <= 1; ++r) pts.emplace_back(mm - r, mm);
    }
    auto gamma_of = [&](double a, double b) {
        double g = 0.0;
        for (auto [v, z] : pts) g = std::max(g, std::abs((v - v * v * v) * (a + b * v * v) - z) / std::abs(z));
        return g;
    };
    // zooming grid search; the objective is convex so the best cell keeps the minimizer nearby
    double a = 0.0, b = 0.0, g = gamma_of(a, b), half = 4.0;
    for (int level = 0; level < 14; ++level) {
        const double ca = a, cb = b;
        for (int i = -20; i <= 20; ++i)
            for (int j = -20; j <= 20; ++j) {
                const double ta = ca + half * i / 20.0, tb = cb + half * j / 20.0;
                const double gn = gamma_of(ta, tb);
                if (gn < g) g = gn, a = ta, b = tb;
            }
        half *= 0.25;
    }
    const auto p = fit(s);
    CAPTURE(g);
    CHECK(p.gamma_certified == doctest::Approx(g).epsilon(1e-4));
    CHECK(p.gamma_certified <= g + 1e-4);
}

TEST_CASE("default fit: roots, odd symmetry, gamma well below 1") {
    const auto p = fit(BootstrapSpec{});
    CHECK(p.gamma_certified <= 0.25);
    CHECK(p.verification_samples >= 1000000);
    CHECK(p.gamma_certified <= 1.1 * p.lp_gamma + 1e-9);
    for (int r = -2; r <= 2; ++r) CHECK(std::abs(evaluate(p, r * 1.0)) <= 1e-9);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-2.25, 2.25);
    for (int i = 0; i < 1000; ++i) {
        const double m = u(rng);
        CHECK(evaluate(p, -m) == -evaluate(p, m));
    }
    for (Eigen::Index k = 0; k < p.coefficients.size(); k += 2) CHECK(p.coefficients(k) == 0.0);
}

TEST_CASE("gamma is non-increasing in the degree") {
    double prev = 2.0;
    for (int d = 5; d <= 25; d += 4) {
        BootstrapSpec s;
        s.degree = d;
        const double g = fit(s).gamma_certified;
        CAPTURE(d);
        CHECK(g <= prev + 1e-6);
        prev = std::min(prev, g);
    }
}

TEST_CASE("sector membership on fresh random samples") {
    const auto p = fit(BootstrapSpec{});
    const double g = p.gamma_certified;
    std::mt19937_64 rng(0xabcdef);
    std::uniform_real_distribution<double> m(-0.25, 0.25);
    std::uniform_int_distribution<int> r(-2, 2);
    double worst = 0.0;
    for (int i = 0; i < 1000000; ++i) {
        const double mm = m(rng);
        if (mm == 0.0) continue;
        const double v = mm - r(rng);
        const double z = centered_mod(v, 1.0);
        const double w = evaluate(p, v) - z;
        worst = std::min(worst, (w + g * z) * (g * z - w));
    }
    CHECK(worst >= -1e-9);
}

TEST_CASE("evaluation at another modulus is a pure rescaling") {
    const auto p = fit(BootstrapSpec{});
    const double q0 = std::ldexp(1.0, 40);
    for (double m : {0.1, -0.7, 1.9, 2.2}) {
        CHECK(evaluate_at_modulus(p, m * q0, q0) == doctest::Approx(q0 * evaluate(p, m)).epsilon(1e-12));
    }
}

TEST_CASE("serial and parallel kernels agree exactly") {
    const auto p = fit(BootstrapSpec{});
    const auto pts = verification_points(p.spec, 50000, 3);
    CHECK(kernels::max_relative_error_serial(p, pts) == kernels::max_relative_error_parallel(p, pts));
    CHECK(kernels::min_sector_product_serial(p, 0.2, pts) == kernels::min_sector_product_parallel(p, 0.2, pts));
    VerifyOptions a, b;
    a.parallel = true;
    b.parallel = false;
    a.samples_per_interval = b.samples_per_interval = 50000;
    CHECK(verify(p, a) == verify(p, b));
}

TEST_CASE("trial runners keep order and propagate exceptions") {
    auto sq = [](int i) { return i * i; };
    CHECK(kernels::run_trials_serial(50, sq) == kernels::run_trials_parallel(50, sq));
    auto boom = [](int i) -> int {
        if (i == 7) throw std::runtime_error("trial 7");
        return i;
    };
    CHECK_THROWS_AS(kernels::run_trials_parallel(20, boom), std::runtime_error);
}
