#pragma once

// Toy LWE-style approximate homomorphic scheme with a modulus chain
// q_l = q0 c^l, rescaling, and emulated bootstrapping.
//
// NOT SECURE. Parameters are chosen for numerical fidelity only; the layer
// exists to reproduce the error semantics of an encrypted controller.
//
// A ciphertext at level l is (b, a) in Z_{q_l}^{n+1} with
//   b + <a, s> = round(c^k m) + e  (mod q_l),  k = scale_exponent.
// Each ciphertext also carries its intended real plaintext and a bound on
// |Dec - plaintext| (the noise ledger, in real units). These debug fields
// never feed back into ciphertext arithmetic; the ledger is used to detect
// wraparound before it happens.

#include "encctl/bootpoly.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace encctl::toy {

using BigInt = boost::multiprecision::checked_int512_t;
using IntMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

enum class ErrorCode { Overflow, LevelMismatch, ScaleMismatch, NoLevelsLeft, AssumptionViolation, RangeViolation };

const char* to_string(ErrorCode code);

class CryptoError : public std::runtime_error {
  public:
    CryptoError(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
    ErrorCode code() const { return code_; }

  private:
    ErrorCode code_;
};

struct SchemeParams {
    int n = 64;
    std::uint64_t q0 = std::uint64_t{1} << 40;
    std::uint64_t c = std::uint64_t{1} << 24;
    int L = 11;
    int noise_bound = 8;
    std::uint64_t seed = 1;
    int hamming_weight = 4;     // number of nonzero entries of the ternary secret
    int public_key_rows = 64;

    BigInt modulus(int level) const;
    double scale() const { return static_cast<double>(c); }
    /// Throws std::invalid_argument.
    void validate() const;
};

struct SecretKey {
    std::vector<int> s;  // ternary
    int l1_norm() const;
};

/// Pool of encryptions of zero at the top level: b_j = -<a_j, s> + e_j mod q_L.
struct PublicKey {
    std::vector<std::vector<BigInt>> rows;  // each row is (b, a_1..a_n)
};

struct Keys {
    SecretKey secret;
    PublicKey pub;
};

struct Ciphertext {
    std::vector<BigInt> body;  // (b, a_1..a_n) in [0, q_level)
    int level = 0;
    int scale_exponent = 1;
    double debug_plaintext = 0.0;
    double debug_noise = 0.0;
};

Keys keygen(const SchemeParams& params);

BigInt mod_positive(const BigInt& x, const BigInt& q);
BigInt centered(const BigInt& x, const BigInt& q);

/// round(c m) encrypted at `level` with scale exponent 1.
Ciphertext encrypt(double m, int level, const PublicKey& pk, const SchemeParams& params, std::mt19937_64& rng);
double decrypt(const Ciphertext& ct, const SecretKey& sk, const SchemeParams& params);

Ciphertext add(const Ciphertext& x, const Ciphertext& y, const SchemeParams& params);

/// Integer matrix with entries round(c M_ij). Scale exponent of the result is
/// one higher than the inputs'.
IntMatrix quantize(const Matrix& M, const SchemeParams& params);
std::vector<Ciphertext> plain_mul(const IntMatrix& M, const std::vector<Ciphertext>& x, const SchemeParams& params);

Ciphertext rescale(const Ciphertext& ct, const SchemeParams& params);
/// Reduces the modulus to q_level without changing the plaintext.
Ciphertext mod_down(const Ciphertext& ct, int level, const SchemeParams& params);

enum class BootstrapStatus { Ok, AssumptionViolation, RangeViolation };
enum class ViolationPolicy { Throw, Record };

const char* to_string(BootstrapStatus s);

struct BootstrapTelemetry {
    int r = 0;                   // realized overflow count
    double m_plus_e = 0.0;       // real units
    double poly_error = 0.0;     // w - (m + e), real units
    double relative_error = 0.0; // |poly_error| / |m + e| (0 when both vanish)
    BootstrapStatus status = BootstrapStatus::Ok;
};

struct BootstrapOutcome {
    Ciphertext ct;
    BootstrapTelemetry telemetry;
};

/// Emulated bootstrapping of a level-0 ciphertext: the raw value
/// v = b + <a, s> = m + e - r q0 (centered representatives) is computed with
/// the secret key, w = q0 p(v / q0) is evaluated in the clear and re-encrypted
/// at level L. The output message error w - (m + e) is exactly the
/// polynomial approximation error.
BootstrapOutcome bootstrap_emulated(const Ciphertext& ct, const BootstrapPolynomial& poly, const Keys& keys,
                                    const SchemeParams& params, std::mt19937_64& rng,
                                    ViolationPolicy policy = ViolationPolicy::Throw);

}  // namespace encctl::toy
