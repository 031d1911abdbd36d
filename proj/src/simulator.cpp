#include "encctl/simulator.hpp"

#include "encctl/kernels.hpp"

#include <cmath>
#include <deque>
#include <random>

namespace encctl {

const char* to_string(SimMode m) {
    switch (m) {
        case SimMode::Encrypted: return "encrypted";
        case SimMode::Reset: return "reset";
        case SimMode::Fir: return "fir";
        case SimMode::PlaintextReference: return "plaintext";
    }
    return "?";
}

const char* to_string(DisturbanceKind k) {
    switch (k) {
        case DisturbanceKind::Zero: return "zero";
        case DisturbanceKind::Impulse: return "impulse";
        case DisturbanceKind::Random: return "random";
        case DisturbanceKind::Aligned: return "aligned";
    }
    return "?";
}

void SimulationConfig::validate() const {
    interconnect(plant, controller);  // validates both and their coupling
    if (controller.states() < 1) throw std::invalid_argument("simulation: controller must have at least one state");
    if (tbs < 1) throw std::invalid_argument("simulation: T_BS must be >= 1");
    if (horizon < 1) throw std::invalid_argument("simulation: horizon must be >= 1");
    if (horizon < tbs) throw std::invalid_argument("simulation: horizon must be >= T_BS");
    if (x0.size() != 0 && x0.size() != plant.states()) throw std::invalid_argument("simulation: x0 has wrong size");
    if (xc0.size() != 0 && xc0.size() != controller.states())
        throw std::invalid_argument("simulation: xc0 has wrong size");
    const int mp = plant.disturbances() + controller.disturbances();
    if (disturbance.kind == DisturbanceKind::Impulse && (disturbance.impulse_channel < 0 || disturbance.impulse_channel >= mp))
        throw std::invalid_argument("simulation: impulse channel out of range");
    if (mode == SimMode::Encrypted) {
        if (!poly) throw std::invalid_argument("simulation: encrypted mode needs a bootstrapping polynomial");
        scheme.validate();
        if (scheme.L < tbs + 1)
            throw std::invalid_argument("simulation: level budget L must be >= T_BS + 1 (one rescale per step)");
    }
}

std::uint64_t trial_seed(std::uint64_t base, int trial) {
    // splitmix64 finalizer
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(trial + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::vector<Vector> aligned_disturbance(const ClosedLoop& cl, int horizon, int iterations, bool include_w2, int mw1) {
    const int mp = cl.perf_inputs();
    const int active = include_w2 ? mp : mw1;
    const Matrix B = cl.Bp.leftCols(active);
    const Matrix D = cl.Dpp.leftCols(active);
    const int n = cl.states();
    const int pz = cl.perf_outputs();

    std::mt19937_64 rng(0xa11e);
    std::normal_distribution<double> normal;
    Matrix w(active, horizon);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = normal(rng);
    w /= w.norm();

    Matrix z(pz, horizon);
    for (int it = 0; it < iterations; ++it) {
        Vector xi = Vector::Zero(n);
        for (int t = 0; t < horizon; ++t) {
            z.col(t) = cl.Cp * xi + D * w.col(t);
            xi = cl.A * xi + B * w.col(t);
        }
        Vector lambda = Vector::Zero(n);
        for (int t = horizon - 1; t >= 0; --t) {
            w.col(t) = B.transpose() * lambda + D.transpose() * z.col(t);
            lambda = cl.A.transpose() * lambda + cl.Cp.transpose() * z.col(t);
        }
        const double nrm = w.norm();
        if (nrm == 0.0) break;
        w /= nrm;
    }

    std::vector<Vector> out(horizon, Vector::Zero(mp));
    for (int t = 0; t < horizon; ++t) out[t].head(active) = w.col(t);
    return out;
}

std::vector<Vector> make_disturbance(const SimulationConfig& cfg) {
    const int mw1 = cfg.plant.disturbances();
    const int mp = mw1 + cfg.controller.disturbances();
    const int active = cfg.disturbance.include_w2 ? mp : mw1;
    std::vector<Vector> w(cfg.horizon, Vector::Zero(mp));
    switch (cfg.disturbance.kind) {
        case DisturbanceKind::Zero: break;
        case DisturbanceKind::Impulse: w[0][cfg.disturbance.impulse_channel] = 1.0; break;
        case DisturbanceKind::Random: {
            std::mt19937_64 rng(cfg.seed);
            std::normal_distribution<double> normal;
            for (auto& v : w)
                for (int i = 0; i < active; ++i) v[i] = normal(rng);
            break;
        }
        case DisturbanceKind::Aligned: {
            w = aligned_disturbance(interconnect(cfg.plant, cfg.controller), cfg.horizon,
                                    cfg.disturbance.power_iterations, cfg.disturbance.include_w2, mw1);
            const double energy = std::sqrt(static_cast<double>(cfg.horizon) * active);
            for (auto& v : w) v *= energy;
            break;
        }
    }
    if (cfg.disturbance.norm_budget > 0.0) {
        double e = 0.0;
        for (const auto& v : w) e += v.squaredNorm();
        if (e > 0.0)
            for (auto& v : w) v *= cfg.disturbance.norm_budget / std::sqrt(e);
    }
    return w;
}

SimulationResult run(const SimulationConfig& cfg) { return run(cfg, make_disturbance(cfg)); }

SimulationResult run(const SimulationConfig& cfg, const std::vector<Vector>& wp) {
    cfg.validate();
    const Plant& P = cfg.plant;
    const Controller& K = cfg.controller;
    const int mw1 = P.disturbances();
    const int mw2 = K.disturbances();
    const int nc = K.states();
    const int py = P.measurements();
    if (static_cast<int>(wp.size()) < cfg.horizon) throw std::invalid_argument("simulation: disturbance too short");
    for (int t = 0; t < cfg.horizon; ++t)
        if (wp[t].size() != mw1 + mw2) throw std::invalid_argument("simulation: disturbance has wrong dimension");

    Vector x = cfg.x0.size() ? cfg.x0 : Vector::Zero(P.states());
    Vector xc = cfg.xc0.size() ? cfg.xc0 : Vector::Zero(nc);

    SimulationResult res;
    auto record = [&](std::vector<Vector>& dst, const Vector& v) {
        if (cfg.record_trajectories) dst.push_back(v);
    };

    // Encrypted-mode state.
    const bool enc = cfg.mode == SimMode::Encrypted;
    toy::Keys keys;
    std::mt19937_64 enc_rng(trial_seed(cfg.seed ^ 0x5ca1ab1eULL, 0));
    toy::IntMatrix Mu, Mx;
    std::vector<toy::Ciphertext> xs;
    if (enc) {
        keys = toy::keygen(cfg.scheme);
        Mu = toy::quantize(hstack({&K.Cc, &K.Dc, &K.F2}), cfg.scheme);
        Mx = toy::quantize(hstack({&K.Ac, &K.Bc, &K.B2}), cfg.scheme);
        for (int i = 0; i < nc; ++i) xs.push_back(toy::encrypt(xc[i], cfg.scheme.L, keys.pub, cfg.scheme, enc_rng));
    }

    // FIR delay line of past measurements, oldest first.
    const Matrix fir_tap = cfg.mode == SimMode::Fir ? Matrix(matrix_power(K.Ac, cfg.tbs) * K.Bc) : Matrix();
    std::deque<Vector> past_y;
    if (cfg.mode == SimMode::Fir) past_y.assign(cfg.tbs, Vector::Zero(py));

    for (int t = 0; t < cfg.horizon; ++t) {
        const Vector w1 = wp[t].head(mw1);
        const Vector w2 = wp[t].tail(mw2);
        const Vector y = P.C * x + P.F1 * w1;
        const bool event = t > 0 && t % cfg.tbs == 0;
        Vector u;

        if (enc) {
            try {
                std::vector<toy::Ciphertext> inputs;
                for (int i = 0; i < py; ++i) inputs.push_back(toy::encrypt(y[i], cfg.scheme.L, keys.pub, cfg.scheme, enc_rng));
                for (int i = 0; i < mw2; ++i)
                    inputs.push_back(toy::encrypt(w2[i], cfg.scheme.L, keys.pub, cfg.scheme, enc_rng));
                auto operands = [&]() {
                    std::vector<toy::Ciphertext> v = xs;
                    for (const auto& ct : inputs) v.push_back(toy::mod_down(ct, xs[0].level, cfg.scheme));
                    return v;
                };

                for (int i = 0; i < nc; ++i) {
                    xc[i] = toy::decrypt(xs[i], keys.secret, cfg.scheme);
                    const double err = std::abs(xc[i] - xs[i].debug_plaintext);
                    res.max_ledger_ratio = std::max(res.max_ledger_ratio, err / xs[i].debug_noise);
                }

                const auto u_ct = toy::plain_mul(Mu, operands(), cfg.scheme);
                u.resize(u_ct.size());
                for (std::size_t i = 0; i < u_ct.size(); ++i) u[i] = toy::decrypt(u_ct[i], keys.secret, cfg.scheme);

                if (event) {
                    for (int i = 0; i < nc; ++i) {
                        auto out = toy::bootstrap_emulated(toy::mod_down(xs[i], 0, cfg.scheme), *cfg.poly, keys,
                                                           cfg.scheme, enc_rng, toy::ViolationPolicy::Record);
                        if (out.telemetry.status != toy::BootstrapStatus::Ok) ++res.assumption_violations;
                        res.bootstraps.push_back({t, i, out.telemetry});
                        xs[i] = std::move(out.ct);
                    }
                }

                const auto next = toy::plain_mul(Mx, operands(), cfg.scheme);
                for (int i = 0; i < nc; ++i) xs[i] = toy::rescale(next[i], cfg.scheme);
            } catch (const toy::CryptoError& e) {
                throw SimulationError(t, e.what());
            }
        } else {
            u = K.Cc * xc + K.Dc * y + K.F2 * w2;
        }

        const Vector z = P.C1 * x + P.E * u + P.D1 * w1;
        record(res.x, x);
        record(res.xc, xc);
        record(res.u, u);
        record(res.y, y);
        record(res.zp, z);
        record(res.wp, wp[t]);
        res.z_energy += z.squaredNorm();
        res.w_energy += wp[t].squaredNorm();

        switch (cfg.mode) {
            case SimMode::Encrypted: break;
            case SimMode::PlaintextReference: xc = K.Ac * xc + K.Bc * y + K.B2 * w2; break;
            case SimMode::Reset:
                if (event) xc.setZero();
                xc = K.Ac * xc + K.Bc * y + K.B2 * w2;
                break;
            case SimMode::Fir: {
                xc = K.Ac * xc + K.Bc * y + K.B2 * w2 - fir_tap * past_y.front();
                past_y.pop_front();
                past_y.push_back(y);
                break;
            }
        }
        x = P.A * x + P.B * u + P.B1 * w1;
    }

    if (res.w_energy > 0.0) res.empirical_gain = std::sqrt(res.z_energy / res.w_energy);
    return res;
}

GainEstimate estimate_empirical_gain(const SimulationConfig& config, int n_trials) {
    if (n_trials < 1) throw std::invalid_argument("estimate_empirical_gain: n_trials must be >= 1");
    if (config.disturbance.kind == DisturbanceKind::Zero)
        throw std::invalid_argument("estimate_empirical_gain: zero disturbance has no energy");
    config.validate();

    struct Trial {
        double gain;
        int violations;
    };
    const auto trials = kernels::run_trials_parallel(n_trials, [&](int i) {
        SimulationConfig cfg = config;
        cfg.seed = trial_seed(config.seed, i);
        cfg.disturbance.kind = i == 0 ? DisturbanceKind::Aligned : DisturbanceKind::Random;
        cfg.record_trajectories = false;
        const SimulationResult r = run(cfg);
        if (!r.empirical_gain) throw std::runtime_error("estimate_empirical_gain: trial produced no disturbance energy");
        return Trial{*r.empirical_gain, r.assumption_violations};
    });

    GainEstimate est;
    for (int i = 0; i < n_trials; ++i) {
        est.trial_gains.push_back(trials[i].gain);
        est.assumption_violations += trials[i].violations;
        if (trials[i].gain > est.gain) {
            est.gain = trials[i].gain;
            est.best_trial = i;
        }
    }
    return est;
}

}  // namespace encctl
