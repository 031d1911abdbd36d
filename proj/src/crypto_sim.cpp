#include "encctl/crypto_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace encctl::toy {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::Overflow: return "OVERFLOW";
        case ErrorCode::LevelMismatch: return "LEVEL_MISMATCH";
        case ErrorCode::ScaleMismatch: return "SCALE_MISMATCH";
        case ErrorCode::NoLevelsLeft: return "NO_LEVELS_LEFT";
        case ErrorCode::AssumptionViolation: return "ASSUMPTION_VIOLATION";
        case ErrorCode::RangeViolation: return "RANGE_VIOLATION";
    }
    return "?";
}

const char* to_string(BootstrapStatus s) {
    switch (s) {
        case BootstrapStatus::Ok: return "OK";
        case BootstrapStatus::AssumptionViolation: return "ASSUMPTION_VIOLATION";
        case BootstrapStatus::RangeViolation: return "RANGE_VIOLATION";
    }
    return "?";
}

BigInt SchemeParams::modulus(int level) const {
    if (level < 0 || level > L) throw std::out_of_range("modulus level out of range");
    BigInt q = q0;
    for (int i = 0; i < level; ++i) q *= c;
    return q;
}

void SchemeParams::validate() const {
    if (n < 1) throw std::invalid_argument("scheme: n must be >= 1");
    if (q0 < 2 || c < 2) throw std::invalid_argument("scheme: q0 and c must be >= 2");
    if (L < 2) throw std::invalid_argument("scheme: L must be >= 2");
    if (noise_bound < 0) throw std::invalid_argument("scheme: noise_bound must be >= 0");
    if (hamming_weight < 1 || hamming_weight > n) throw std::invalid_argument("scheme: hamming_weight must be in [1, n]");
    if (public_key_rows < 1) throw std::invalid_argument("scheme: public_key_rows must be >= 1");
    // Products of a plaintext matrix entry (~c) with a top-level residue, summed
    // over a few terms, must fit the fixed-width integer.
    const double bits = std::log2(static_cast<double>(q0)) + (L + 2) * std::log2(static_cast<double>(c)) + 16.0;
    if (bits > 500.0) throw std::invalid_argument("scheme: modulus chain too large for 512-bit arithmetic");
}

int SecretKey::l1_norm() const {
    return std::accumulate(s.begin(), s.end(), 0, [](int acc, int v) { return acc + std::abs(v); });
}

BigInt mod_positive(const BigInt& x, const BigInt& q) {
    BigInt r = x % q;
    if (r < 0) r += q;
    return r;
}

BigInt centered(const BigInt& x, const BigInt& q) {
    BigInt r = mod_positive(x, q);
    if (2 * r > q) r -= q;
    return r;
}

namespace {

BigInt uniform_below(const BigInt& q, std::mt19937_64& rng) {
    const unsigned bits = boost::multiprecision::msb(q) + 1;
    BigInt v = 0;
    for (unsigned have = 0; have < bits + 64; have += 64) {
        v <<= 64;
        v += BigInt(rng());
    }
    return v % q;
}

double to_double(const BigInt& x) { return x.convert_to<double>(); }

double scale_power(const SchemeParams& p, int k) { return std::pow(p.scale(), k); }

// Allowance for double rounding in the ledger itself.
double fp_slack(double pt, double noise) { return 1e-14 * (std::abs(pt) + noise + 1e-300); }

void check_overflow(const Ciphertext& ct, const SchemeParams& p, const char* op) {
    const double bound = (std::abs(ct.debug_plaintext) + ct.debug_noise) * scale_power(p, ct.scale_exponent);
    if (!(bound < 0.5 * to_double(p.modulus(ct.level))))
        throw CryptoError(ErrorCode::Overflow, std::string(op) + ": message plus noise may exceed q/2 at level " +
                                                   std::to_string(ct.level));
}

BigInt inner_with_secret(const std::vector<BigInt>& body, const SecretKey& sk) {
    BigInt acc = body[0];
    for (std::size_t i = 0; i < sk.s.size(); ++i) {
        if (sk.s[i] == 1) acc += body[i + 1];
        else if (sk.s[i] == -1) acc -= body[i + 1];
    }
    return acc;
}

Ciphertext encrypt_integer(const BigInt& msg, int level, const PublicKey& pk, const SchemeParams& p,
                           std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> pick(0, pk.rows.size() - 1);
    const auto& row = pk.rows[pick(rng)];
    const BigInt q = p.modulus(level);
    Ciphertext ct;
    ct.level = level;
    ct.scale_exponent = 1;
    ct.body.resize(row.size());
    ct.body[0] = mod_positive(row[0] + msg, q);
    for (std::size_t i = 1; i < row.size(); ++i) ct.body[i] = mod_positive(row[i], q);
    return ct;
}

}  // namespace

Keys keygen(const SchemeParams& p) {
    p.validate();
    std::mt19937_64 rng(p.seed);
    Keys keys;
    keys.secret.s.assign(p.n, 0);
    std::vector<int> idx(p.n);
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = 0; i < p.hamming_weight; ++i) {
        std::uniform_int_distribution<int> pick(i, p.n - 1);
        std::swap(idx[i], idx[pick(rng)]);
        keys.secret.s[idx[i]] = (rng() & 1u) ? 1 : -1;
    }

    const BigInt qL = p.modulus(p.L);
    std::uniform_int_distribution<int> noise(-p.noise_bound, p.noise_bound);
    keys.pub.rows.resize(p.public_key_rows);
    for (auto& row : keys.pub.rows) {
        row.resize(p.n + 1);
        BigInt dot = 0;
        for (int i = 0; i < p.n; ++i) {
            row[i + 1] = uniform_below(qL, rng);
            if (keys.secret.s[i] == 1) dot += row[i + 1];
            else if (keys.secret.s[i] == -1) dot -= row[i + 1];
        }
        row[0] = mod_positive(-dot + noise(rng), qL);
    }
    return keys;
}

Ciphertext encrypt(double m, int level, const PublicKey& pk, const SchemeParams& p, std::mt19937_64& rng) {
    if (level < 0 || level > p.L) throw CryptoError(ErrorCode::LevelMismatch, "encrypt: level out of range");
    if (!std::isfinite(m)) throw CryptoError(ErrorCode::Overflow, "encrypt: non-finite message");
    const double scaled = std::round(p.scale() * m);
    if (!(std::abs(scaled) + p.noise_bound < 0.5 * to_double(p.modulus(level))))
        throw CryptoError(ErrorCode::Overflow, "encrypt: |c m| + noise_bound >= q/2");
    Ciphertext ct = encrypt_integer(BigInt(static_cast<long double>(scaled)), level, pk, p, rng);
    ct.debug_plaintext = m;
    ct.debug_noise = (p.noise_bound + 0.5) / p.scale() + fp_slack(m, 0.0);
    return ct;
}

double decrypt(const Ciphertext& ct, const SecretKey& sk, const SchemeParams& p) {
    if (ct.body.size() != sk.s.size() + 1) throw std::invalid_argument("decrypt: key/ciphertext size mismatch");
    const BigInt v = centered(inner_with_secret(ct.body, sk), p.modulus(ct.level));
    return to_double(v) / scale_power(p, ct.scale_exponent);
}

Ciphertext add(const Ciphertext& x, const Ciphertext& y, const SchemeParams& p) {
    if (x.level != y.level) throw CryptoError(ErrorCode::LevelMismatch, "add: operands at different levels");
    if (x.scale_exponent != y.scale_exponent) throw CryptoError(ErrorCode::ScaleMismatch, "add: operand scales differ");
    if (x.body.size() != y.body.size()) throw std::invalid_argument("add: ciphertext sizes differ");
    const BigInt q = p.modulus(x.level);
    Ciphertext out;
    out.level = x.level;
    out.scale_exponent = x.scale_exponent;
    out.body.resize(x.body.size());
    for (std::size_t i = 0; i < x.body.size(); ++i) out.body[i] = mod_positive(x.body[i] + y.body[i], q);
    out.debug_plaintext = x.debug_plaintext + y.debug_plaintext;
    out.debug_noise = x.debug_noise + y.debug_noise + fp_slack(out.debug_plaintext, 0.0);
    check_overflow(out, p, "add");
    return out;
}

IntMatrix quantize(const Matrix& M, const SchemeParams& p) {
    IntMatrix out(M.rows(), M.cols());
    for (Eigen::Index i = 0; i < M.rows(); ++i)
        for (Eigen::Index j = 0; j < M.cols(); ++j) {
            const double v = std::round(p.scale() * M(i, j));
            if (!(std::abs(v) < 9.0e18)) throw CryptoError(ErrorCode::Overflow, "quantize: entry too large");
            out(i, j) = static_cast<std::int64_t>(v);
        }
    return out;
}

std::vector<Ciphertext> plain_mul(const IntMatrix& M, const std::vector<Ciphertext>& x, const SchemeParams& p) {
    if (static_cast<std::size_t>(M.cols()) != x.size())
        throw std::invalid_argument("plain_mul: matrix columns do not match the ciphertext vector");
    if (x.empty()) throw std::invalid_argument("plain_mul: empty ciphertext vector");
    for (const auto& ct : x) {
        if (ct.level != x[0].level) throw CryptoError(ErrorCode::LevelMismatch, "plain_mul: inputs at different levels");
        if (ct.scale_exponent != x[0].scale_exponent)
            throw CryptoError(ErrorCode::ScaleMismatch, "plain_mul: input scales differ");
    }
    const int level = x[0].level;
    const BigInt q = p.modulus(level);
    const std::size_t width = x[0].body.size();
    std::vector<Ciphertext> out(M.rows());
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        Ciphertext& o = out[i];
        o.level = level;
        o.scale_exponent = x[0].scale_exponent + 1;
        o.body.assign(width, BigInt(0));
        double pt = 0.0;
        double noise = 0.0;
        for (Eigen::Index j = 0; j < M.cols(); ++j) {
            const std::int64_t mij = M(i, j);
            if (mij == 0) continue;
            for (std::size_t k = 0; k < width; ++k) o.body[k] += x[j].body[k] * mij;
            const double real = static_cast<double>(mij) / p.scale();
            pt += real * x[j].debug_plaintext;
            noise += std::abs(real) * x[j].debug_noise;
        }
        for (auto& v : o.body) v = mod_positive(v, q);
        o.debug_plaintext = pt;
        o.debug_noise = noise + fp_slack(pt, noise);
        check_overflow(o, p, "plain_mul");
    }
    return out;
}

Ciphertext rescale(const Ciphertext& ct, const SchemeParams& p) {
    if (ct.level < 1) throw CryptoError(ErrorCode::NoLevelsLeft, "rescale: ciphertext is at level 0");
    if (ct.scale_exponent < 2) throw CryptoError(ErrorCode::ScaleMismatch, "rescale: scale exponent must be >= 2");
    const BigInt c = p.c;
    const BigInt q = p.modulus(ct.level - 1);
    Ciphertext out;
    out.level = ct.level - 1;
    out.scale_exponent = ct.scale_exponent - 1;
    out.body.resize(ct.body.size());
    for (std::size_t i = 0; i < ct.body.size(); ++i) {
        // round-half-up of a non-negative residue
        const BigInt r = (2 * ct.body[i] + c) / (2 * c);
        out.body[i] = mod_positive(r, q);
    }
    out.debug_plaintext = ct.debug_plaintext;
    out.debug_noise = ct.debug_noise + 0.5 * (p.hamming_weight + 1) / scale_power(p, out.scale_exponent) +
                      fp_slack(ct.debug_plaintext, ct.debug_noise);
    check_overflow(out, p, "rescale");
    return out;
}

Ciphertext mod_down(const Ciphertext& ct, int level, const SchemeParams& p) {
    if (level < 0 || level > ct.level) throw CryptoError(ErrorCode::LevelMismatch, "mod_down: target level above current");
    Ciphertext out = ct;
    out.level = level;
    const BigInt q = p.modulus(level);
    for (auto& v : out.body) v = mod_positive(v, q);
    check_overflow(out, p, "mod_down");
    return out;
}

BootstrapOutcome bootstrap_emulated(const Ciphertext& ct, const BootstrapPolynomial& poly, const Keys& keys,
                                    const SchemeParams& p, std::mt19937_64& rng, ViolationPolicy policy) {
    if (ct.level != 0) throw CryptoError(ErrorCode::LevelMismatch, "bootstrap: ciphertext must be at level 0");
    if (ct.scale_exponent != 1) throw CryptoError(ErrorCode::ScaleMismatch, "bootstrap: scale exponent must be 1");
    if (ct.body.size() != keys.secret.s.size() + 1) throw std::invalid_argument("bootstrap: key size mismatch");

    const BigInt q0 = p.q0;
    // Centered representatives make the overflow count the one the
    // homomorphic evaluation would see.
    BigInt raw = centered(ct.body[0], q0);
    for (std::size_t i = 0; i < keys.secret.s.size(); ++i) {
        if (keys.secret.s[i] == 1) raw += centered(ct.body[i + 1], q0);
        else if (keys.secret.s[i] == -1) raw -= centered(ct.body[i + 1], q0);
    }
    const BigInt me = centered(raw, q0);
    const BigInt r_big = (me - raw) / q0;

    BootstrapTelemetry tel;
    tel.r = r_big.convert_to<int>();
    const double me_d = to_double(me);
    tel.m_plus_e = me_d / p.scale();

    const double q0_d = to_double(q0);
    if (std::abs(me_d) > 0.5 * poly.spec.epsilon * q0_d) tel.status = BootstrapStatus::RangeViolation;
    else if (std::abs(tel.r) > poly.spec.K) tel.status = BootstrapStatus::AssumptionViolation;
    if (policy == ViolationPolicy::Throw) {
        if (tel.status == BootstrapStatus::RangeViolation)
            throw CryptoError(ErrorCode::RangeViolation, "bootstrap: |m + e| exceeds eps q0 / 2");
        if (tel.status == BootstrapStatus::AssumptionViolation)
            throw CryptoError(ErrorCode::AssumptionViolation,
                              "bootstrap: overflow count " + std::to_string(tel.r) + " exceeds K");
    }

    const double w = evaluate_at_modulus(poly, to_double(raw), q0_d);
    tel.poly_error = (w - me_d) / p.scale();
    if (me_d != 0.0) tel.relative_error = std::abs(w - me_d) / std::abs(me_d);
    else tel.relative_error = std::abs(w) <= 1e-9 * q0_d ? 0.0 : std::numeric_limits<double>::infinity();

    const double w_round = std::round(w);
    if (!(std::abs(w_round) + p.noise_bound < 0.5 * to_double(p.modulus(p.L))))
        throw CryptoError(ErrorCode::Overflow, "bootstrap: refreshed message exceeds the top modulus");
    BootstrapOutcome out;
    out.ct = encrypt_integer(BigInt(static_cast<long double>(w_round)), p.L, keys.pub, p, rng);
    out.ct.debug_plaintext = w / p.scale();
    out.ct.debug_noise = (p.noise_bound + 0.5) / p.scale() + fp_slack(out.ct.debug_plaintext, 0.0);
    out.telemetry = tel;
    return out;
}

}  // namespace encctl::toy
