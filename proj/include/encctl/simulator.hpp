#pragma once

// Closed-loop simulation of the plant with an encrypted, resetting, FIR or
// plaintext controller, and empirical l2-gain estimation.
//
// The plant always runs in the clear. In ENCRYPTED mode the controller state
// lives in toy ciphertexts: every step encrypts y (and w2), evaluates
// u = [Cc Dc F2][xc; y; w2] homomorphically and decrypts it, then updates
// xc = [Ac Bc B2][xc; y; w2] followed by one rescale. At t > 0 with
// t mod T_BS == 0 the state is bootstrapped after u has been computed and
// before the update, so the bootstrapping error enters through Ac exactly as
// the uncertainty channel of the closed-loop model.

#include "encctl/bootpoly.hpp"
#include "encctl/crypto_sim.hpp"
#include "encctl/statespace.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace encctl {

enum class SimMode { Encrypted, Reset, Fir, PlaintextReference };
enum class DisturbanceKind { Zero, Impulse, Random, Aligned };

const char* to_string(SimMode m);
const char* to_string(DisturbanceKind k);

struct DisturbanceSpec {
    DisturbanceKind kind = DisturbanceKind::Random;
    double norm_budget = 0.0;    // > 0 rescales the whole signal to this l2 norm
    int impulse_channel = 0;
    bool include_w2 = false;     // controller-side channel (quantization) is zero unless set
    int power_iterations = 60;   // aligned disturbances only
};

struct SimulationConfig {
    Plant plant;
    Controller controller;
    toy::SchemeParams scheme;
    std::optional<BootstrapPolynomial> poly;  // required in ENCRYPTED mode
    int tbs = 10;
    int horizon = 10000;
    DisturbanceSpec disturbance;
    SimMode mode = SimMode::Encrypted;
    std::uint64_t seed = 1;
    Vector x0;   // plant initial state, zero if empty
    Vector xc0;  // controller initial state, zero if empty
    bool record_trajectories = true;

    void validate() const;
};

struct BootstrapEvent {
    int t = 0;
    int component = 0;
    toy::BootstrapTelemetry telemetry;
};

struct SimulationResult {
    // Per step t = 0..horizon-1 (states are the values at step t).
    std::vector<Vector> x, xc, u, y, zp, wp;
    std::vector<BootstrapEvent> bootstraps;
    std::optional<double> empirical_gain;  // empty when the disturbance energy is zero
    int assumption_violations = 0;
    double z_energy = 0.0;
    double w_energy = 0.0;
    // Encrypted mode: max over steps and components of |Dec - plaintext| / ledger bound.
    double max_ledger_ratio = 0.0;
};

/// Raised for scheme failures inside run(); carries the step index.
class SimulationError : public std::runtime_error {
  public:
    SimulationError(int step, const std::string& what)
        : std::runtime_error("step " + std::to_string(step) + ": " + what), step_(step) {}
    int step() const { return step_; }

  private:
    int step_;
};

/// Disturbance signal for the configured horizon (w1 stacked over w2 per step).
std::vector<Vector> make_disturbance(const SimulationConfig& config);

/// Unit-energy input maximizing the finite-horizon nominal wp -> zp operator
/// norm, by power iteration with the adjoint recursion.
std::vector<Vector> aligned_disturbance(const ClosedLoop& cl, int horizon, int iterations, bool include_w2,
                                        int mw1);

SimulationResult run(const SimulationConfig& config);
/// Same loop with an explicit disturbance signal (length >= horizon).
SimulationResult run(const SimulationConfig& config, const std::vector<Vector>& wp);

struct GainEstimate {
    double gain = 0.0;
    int best_trial = 0;
    std::vector<double> trial_gains;  // trial 0 is the aligned disturbance
    int assumption_violations = 0;
};

/// Max empirical gain over n_trials runs: trial 0 aligned, the rest seeded
/// random. Trials run concurrently. Throws if the configured disturbance is zero.
GainEstimate estimate_empirical_gain(const SimulationConfig& config, int n_trials);

/// Deterministic per-trial seed.
std::uint64_t trial_seed(std::uint64_t base, int trial);

}  // namespace encctl
