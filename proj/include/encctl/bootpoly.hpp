#pragma once

// Bootstrapping polynomials with a relative (sector) error bound.
//
// A bootstrapping polynomial p approximates the centered modulo function on
//   I = { m - r q : |m| <= eps q / 2, r in {-K..K} }
// such that |p(v) - (v mod q)| <= gamma |v mod q| for all v in I. The
// relative form is what turns the bootstrapping error into a sector-bounded
// uncertainty with slope gamma.
//
// Fitting solves a discretized minimax LP over odd Chebyshev coefficients on
// [-(K + eps/2) q, (K + eps/2) q]; the reported gamma always comes from a
// dense a-posteriori verification, never from the LP objective.

#include "encctl/linalg.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace encctl {

struct BootstrapSpec {
    double q = 1.0;
    double epsilon = 0.5;
    int K = 2;
    int degree = 25;

    /// Half-width of the Chebyshev domain: (K + eps/2) q.
    double domain_radius() const { return (K + 0.5 * epsilon) * q; }
    /// Throws std::invalid_argument.
    void validate() const;
};

struct BootstrapPolynomial {
    BootstrapSpec spec;
    Vector coefficients;  // Chebyshev coefficients c_0..c_d on the domain
    double gamma_certified = 1.0;
    std::int64_t verification_samples = 0;
    double lp_gamma = 1.0;  // discretized LP objective, informational only

    bool usable() const { return gamma_certified < 1.0; }
};

/// Raised when the LP cannot be solved; carries the best gamma seen.
class FitError : public std::runtime_error {
  public:
    FitError(const std::string& what, double best_gamma) : std::runtime_error(what), best_gamma_(best_gamma) {}
    double best_gamma() const { return best_gamma_; }

  private:
    double best_gamma_;
};

struct FitOptions {
    int samples_per_interval = 512;
    std::int64_t verification_samples_per_interval = 200000;
    std::uint64_t verification_seed = 0x5eed;
};

/// m - q * round(m / q), ties away from zero.
double centered_mod(double m, double q);

/// Clenshaw evaluation of the Chebyshev series; defined for every real m.
double evaluate(const BootstrapPolynomial& poly, double m);

/// Same polynomial used at another modulus: q_use * p(m * q / q_use) / q.
double evaluate_at_modulus(const BootstrapPolynomial& poly, double m, double q_use);

BootstrapPolynomial fit(const BootstrapSpec& spec, const FitOptions& options = {});

struct VerifyOptions {
    std::int64_t samples_per_interval = 200000;
    std::uint64_t seed = 0x5eed;
    bool parallel = true;
    double root_tolerance = 1e-9;  // relative to q
};

/// Sup over a dense grid plus seeded random points in I of
/// |p(v) - (v mod q)| / |v mod q|. At v = r q the ratio is replaced by the
/// root check |p(r q)| <= root_tolerance * q; a failed root check yields +inf.
/// Values >= 1 mean the polynomial is unusable for bootstrapping.
double verify(const BootstrapPolynomial& poly, const VerifyOptions& options = {});

/// Dense verification sample points (v values in I, excluding v mod q == 0).
std::vector<double> verification_points(const BootstrapSpec& spec, std::int64_t samples_per_interval,
                                        std::uint64_t seed);

}  // namespace encctl
