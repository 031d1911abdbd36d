// Acceptance suite: one PASS/FAIL line per criterion with its runtime.
// Exit code is the number of failed criteria.

#include "crypto_properties.hpp"
#include "fixtures.hpp"

#include "encctl/analysis.hpp"
#include "encctl/bootpoly.hpp"
#include "encctl/simulator.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

using namespace encctl;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    const char* title;
    double budget_s;  // 0 means no runtime bound
    std::function<Outcome()> body;
};

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

AnalysisRequest example_request(Method m, int tbs) {
    AnalysisRequest r;
    r.plant = fixtures::example_plant();
    r.controller = fixtures::example_controller();
    r.gamma_sector = 0.2296;
    r.method = m;
    r.tbs = tbs;
    r.bisection.tol = 1e-3;
    return r;
}

const BootstrapPolynomial& default_poly() {
    static const BootstrapPolynomial p = fit(BootstrapSpec{});
    return p;
}

Outcome theorem1() {
    const auto r = analyze(example_request(Method::Theorem1, 1));
    if (r.verdict != Verdict::Certified) return {false, "not certified"};
    const bool ok = std::abs(*r.gain - 5.13) <= 0.10 && *r.certificate_margin > 0.0;
    return {ok, fmt("gain %.4f", *r.gain) + fmt(", re-checked margin %.2e", *r.certificate_margin)};
}

Outcome theorem2() {
    const auto t1 = analyze(example_request(Method::Theorem1, 1));
    const auto t2 = analyze(example_request(Method::Theorem2, 10));
    if (t2.verdict != Verdict::Certified || t1.verdict != Verdict::Certified) return {false, "not certified"};
    const bool ok = std::abs(*t2.gain - 3.97) <= 0.10 && *t2.gain <= *t1.gain && *t2.certificate_margin > 0.0;
    return {ok, fmt("gain %.4f", *t2.gain) + fmt(" (Theorem 1: %.4f)", *t1.gain)};
}

Outcome polynomial_fit() {
    const auto& p = default_poly();
    const bool ok = p.gamma_certified <= 0.25 && p.verification_samples >= 1000000;
    return {ok, fmt("gamma %.5f", p.gamma_certified) + fmt(" over %.0f samples", double(p.verification_samples)) +
                    fmt(", LP objective %.5f", p.lp_gamma)};
}

Outcome lifting() {
    std::mt19937_64 rng(4242);
    double worst_traj = 0.0, worst_perf = 0.0;
    for (int sys = 0; sys < 100; ++sys) {
        const auto cl = fixtures::random_closed_loop(rng, 4, 2, 2, 2, 2);
        for (int T : {1, 2, 5, 10}) {
            const auto L = lift(cl, T);
            const int blocks = 4;
            const Vector x0 = fixtures::random_vector(rng, 4);
            std::vector<Vector> wp, wu, wul;
            for (int t = 0; t < blocks * T; ++t) {
                wp.push_back(fixtures::random_vector(rng, 2));
                if (t % T == 0) {
                    wul.push_back(fixtures::random_vector(rng, 2));
                    wu.push_back(wul.back());
                } else {
                    wu.push_back(Vector::Zero(2));
                }
            }
            // base recursion written out
            Vector x = x0;
            std::vector<Vector> zs, states{x0}, zus;
            for (int t = 0; t < blocks * T; ++t) {
                zs.push_back(cl.Cp * x + cl.Dpp * wp[t] + cl.Dpu * wu[t]);
                if (t % T == 0) zus.push_back(cl.Cu * x + cl.Dup * wp[t]);
                x = cl.A * x + cl.Bp * wp[t] + cl.Bu * wu[t];
                if ((t + 1) % T == 0) states.push_back(x);
            }
            const auto wl = stack_signal(wp, T, blocks);
            const auto zl = stack_signal(zs, T, blocks);
            Vector xl = x0;
            for (int k = 0; k < blocks; ++k) {
                const auto& B = L.blocks;
                const Vector z = B.Cp * xl + B.Dpp * wl[k] + B.Dpu * wul[k];
                const Vector zu = B.Cu * xl + B.Dup * wl[k] + B.Duu * wul[k];
                xl = B.A * xl + B.Bp * wl[k] + B.Bu * wul[k];
                worst_traj = std::max({worst_traj, (z - zl[k]).cwiseAbs().maxCoeff(),
                                       (zu - zus[k]).cwiseAbs().maxCoeff(),
                                       (xl - states[k + 1]).cwiseAbs().maxCoeff()});
            }
            const auto perf = l2_gain_index(1.7, 2, 2);
            const double sb = quadratic_performance_sum(perf, wp, zs);
            const double sl = quadratic_performance_sum(lift_performance(perf, T), wl, zl);
            worst_perf = std::max(worst_perf, std::abs(sb - sl) / std::max(1.0, std::abs(sb)));
        }
    }
    return {worst_traj <= 1e-9 && worst_perf <= 1e-9,
            fmt("max trajectory deviation %.2e", worst_traj) + fmt(", performance-sum deviation %.2e", worst_perf)};
}

Outcome empirical() {
    SimulationConfig cfg;
    cfg.plant = fixtures::example_plant();
    cfg.controller = fixtures::example_controller();
    cfg.mode = SimMode::Encrypted;
    cfg.poly = default_poly();
    cfg.tbs = 10;
    cfg.horizon = 10000;
    cfg.seed = 2024;
    const int trials = 21;  // aligned + 20 seeded random
    const auto est = estimate_empirical_gain(cfg, trials);
    double worst_random = 0.0;
    for (int i = 1; i < trials; ++i) worst_random = std::max(worst_random, est.trial_gains[i]);
    const double aligned = est.trial_gains[0];
    const bool ok = est.assumption_violations == 0 && est.gain <= 3.97 && aligned >= 1.5;
    return {ok, fmt("aligned %.4f", aligned) + fmt(", max over 20 random seeds %.4f", worst_random) +
                    fmt(", assumption violations %.0f", est.assumption_violations)};
}

Outcome crypto() {
    const auto rep = crypto_props::run_all(100000, toy::SchemeParams{}, default_poly(), 7);
    std::string d = fmt("%.0f cases", double(rep.cases)) + fmt(", %.0f checks", double(rep.checks)) +
                    fmt(", max bootstrap relative error %.5f", rep.max_bootstrap_relative_error);
    if (!rep.ok()) d += ", first failure: " + rep.first_failure;
    return {rep.ok(), d};
}

Outcome oracles() {
    // scalar gain vs frequency sweep
    ClosedLoop sc;
    sc.A = Matrix::Constant(1, 1, 0.5);
    sc.Bp = Matrix::Ones(1, 1);
    sc.Bu = Matrix::Zero(1, 1);
    sc.Cp = Matrix::Ones(1, 1);
    sc.Dpp = Matrix::Zero(1, 1);
    sc.Dpu = Matrix::Zero(1, 1);
    sc.Cu = Matrix::Zero(1, 1);
    sc.Dup = Matrix::Zero(1, 1);
    sc.Duu = Matrix::Zero(1, 1);
    const double hinf = fixtures::hinf_sweep(sc.A, sc.Bp, sc.Cp, sc.Dpp);
    const auto g = bisect_gain([&](double g2) {
        return build_theorem1(sc, l2_gain_index(std::sqrt(g2), 1, 1), SectorBound::symmetric(0.0, 1));
    });
    const double rel = g.status == GainStatus::Certified ? std::abs(g.gain - hinf) / hinf : 1.0;

    // reset mode vs w_u = -z_u
    const auto p = fixtures::example_plant();
    const auto k = fixtures::example_controller();
    SimulationConfig cfg;
    cfg.plant = p;
    cfg.controller = k;
    cfg.mode = SimMode::Reset;
    cfg.tbs = 10;
    cfg.horizon = 1000;
    cfg.seed = 5;
    cfg.x0 = Vector::Ones(2);
    cfg.xc0 = Vector::Constant(2, 0.3);
    const auto w = make_disturbance(cfg);
    const auto rs = run(cfg, w);
    Vector x0(4);
    x0 << cfg.x0, cfg.xc0;
    const auto tr = simulate(interconnect(p, k), x0, w, [](int t, const Vector& zu) -> Vector {
        return (t > 0 && t % 10 == 0) ? Vector(-zu) : Vector(Vector::Zero(zu.size()));
    }, cfg.horizon);
    double reset_dev = 0.0;
    for (int t = 0; t < cfg.horizon; ++t)
        reset_dev = std::max({reset_dev, (rs.x[t] - tr.state[t].head(2)).cwiseAbs().maxCoeff(),
                              (rs.xc[t] - tr.state[t].tail(2)).cwiseAbs().maxCoeff()});

    // FIR mode vs direct convolution
    const int N = 10;
    cfg.mode = SimMode::Fir;
    cfg.tbs = N;
    const auto fr = run(cfg, w);
    Vector x = cfg.x0, s = cfg.xc0;
    std::vector<Vector> ys;
    double fir_dev = 0.0;
    for (int t = 0; t < cfg.horizon; ++t) {
        Vector xc = s;
        for (int j = 1; j <= std::min(t, N); ++j) xc += matrix_power(k.Ac, j - 1) * k.Bc * ys[t - j];
        fir_dev = std::max({fir_dev, (fr.x[t] - x).cwiseAbs().maxCoeff(), (fr.xc[t] - xc).cwiseAbs().maxCoeff()});
        const Vector w1 = w[t].head(1), w2 = w[t].tail(2);
        const Vector y = p.C * x + p.F1 * w1;
        const Vector u = k.Cc * xc + k.Dc * y + k.F2 * w2;
        ys.push_back(y);
        x = p.A * x + p.B * u + p.B1 * w1;
        s = k.Ac * s + k.B2 * w2;
    }
    const bool ok = rel <= 0.01 && reset_dev <= 1e-12 && fir_dev <= 1e-10;
    return {ok, fmt("scalar gain %.4f", g.gain) + fmt(" vs sweep %.4f", hinf) + fmt(", reset deviation %.1e", reset_dev) +
                    fmt(", FIR deviation %.1e", fir_dev)};
}

Outcome negative_controls() {
    auto req = example_request(Method::Theorem1, 1);
    req.plant.A *= 6.0;
    const auto cl = interconnect(req.plant, req.controller);
    int feasible = 0, probes = 0;
    for (double g = 0.01; g <= 1e4; g *= 2.0, ++probes) {
        const auto prob = build_theorem1(cl, l2_gain_index(g, 3, 2), SectorBound::symmetric(0.2296, 2));
        feasible += solve_feasibility(prob).verdict != SdpVerdict::Infeasible;
    }
    const bool unstable_ok = feasible == 0 && analyze(req).verdict == Verdict::NotCertified;

    const auto good = interconnect(fixtures::example_plant(), fixtures::example_controller());
    const auto sec = SectorBound::symmetric(0.2296, 2);
    const auto prob = build_theorem1(good, l2_gain_index(6.0, 3, 2), sec);
    const auto r = solve_feasibility(prob);
    if (!r.certificate) return {false, "no certificate for the stable loop"};
    int rejected = 0, tampered = 0;
    auto tamper = [&](SdpCertificate c) {
        ++tampered;
        c.variables = Vector::Zero(prob.num_variables);
        c.variables.head(sym_vars(c.X.rows())) = sym_to_vars(c.X);
        c.variables(prob.tau_index) = c.tau;
        rejected += check_certificate(prob, c) <= 0.0;
    };
    auto c = *r.certificate;
    c.X = -c.X;
    tamper(c);
    c = *r.certificate;
    c.X.setZero();
    tamper(c);
    c = *r.certificate;
    c.tau *= 1e3;
    tamper(c);
    c = *r.certificate;
    c.X *= 1e-3;
    tamper(c);
    c = *r.certificate;
    c.X(0, 0) -= 2.0 * c.X.diagonal().maxCoeff();
    tamper(c);
    // valid at gain 6 but not at gain 1
    {
        const auto tight = build_theorem1(good, l2_gain_index(1.0, 3, 2), sec);
        ++tampered;
        rejected += check_certificate(tight, *r.certificate) <= 0.0;
    }
    const bool genuine = check_certificate(prob, *r.certificate) > 0.0;
    std::ostringstream d;
    d << "unstable loop feasible at " << feasible << "/" << probes << " gains, " << rejected << "/" << tampered
      << " tampered certificates rejected, genuine accepted: " << (genuine ? "yes" : "no");
    return {unstable_ok && rejected == tampered && genuine, d.str()};
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "Theorem 1 gain on the example loop", 10.0, theorem1},
        {2, "Theorem 2 gain (T_BS = 10) on the example loop", 30.0, theorem2},
        {3, "Bootstrapping polynomial fit (d=25, K=2, eps=0.5)", 60.0, polynomial_fit},
        {4, "Lifting exactness over 100 random systems", 0.0, lifting},
        {5, "Empirical soundness of the encrypted loop", 120.0, empirical},
        {6, "Toy scheme properties over 1e5 cases", 0.0, crypto},
        {7, "Oracle equivalences (H-infinity, reset, FIR)", 0.0, oracles},
        {8, "Negative controls for certificates", 0.0, negative_controls},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.body();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.budget_s > 0.0 && secs > c.budget_s) {
            o.pass = false;
            o.detail += fmt(", over the %.0f s budget", c.budget_s);
        }
        failed += !o.pass;
        std::printf("[%s] %d. %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.title, o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed;
}
