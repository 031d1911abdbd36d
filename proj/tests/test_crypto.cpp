#include "crypto_properties.hpp"

#include "encctl/crypto_sim.hpp"

#include <doctest.h>

#include <cmath>
#include <map>

using namespace encctl;
using namespace encctl::toy;

namespace {

const BootstrapPolynomial& default_poly() {
    static const BootstrapPolynomial p = [] {
        BootstrapSpec s;
        s.q = 1.0;
        return fit(s);
    }();
    return p;
}

}  // namespace

TEST_CASE("parameter validation") {
    SchemeParams p;
    CHECK_NOTHROW(p.validate());
    p.hamming_weight = 0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = {};
    p.L = 40;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = {};
    CHECK(p.modulus(2) == BigInt(p.q0) * p.c * p.c);
}

TEST_CASE("keygen is deterministic and satisfies the key equation") {
    SchemeParams p;
    const auto a = keygen(p), b = keygen(p);
    CHECK(a.secret.s == b.secret.s);
    CHECK(a.pub.rows == b.pub.rows);
    CHECK(a.secret.l1_norm() == p.hamming_weight);
    p.seed = 2;
    CHECK(keygen(p).secret.s != a.secret.s);

    const BigInt qL = SchemeParams{}.modulus(SchemeParams{}.L);
    for (const auto& row : a.pub.rows) {
        BigInt acc = row[0];
        for (std::size_t i = 0; i < a.secret.s.size(); ++i) acc += a.secret.s[i] * row[i + 1];
        const BigInt e = centered(acc, qL);
        CHECK(abs(e) <= SchemeParams{}.noise_bound);
    }
}

TEST_CASE("encryption and decryption") {
    SchemeParams p;
    p.c = std::uint64_t{1} << 16;
    p.noise_bound = 64;
    const auto k = keygen(p);
    std::mt19937_64 rng(1);
    for (double m : {0.0, 1.5, -3.25, 1000.0})
        CHECK(std::abs(decrypt(encrypt(m, 0, k.pub, p, rng), k.secret, p) - m) <= std::ldexp(1.0, -10));

    // largest message that still fits at level 0
    const double edge = (0.5 * static_cast<double>(p.q0) - p.noise_bound - 2.0) / p.scale();
    CHECK(std::abs(decrypt(encrypt(edge, 0, k.pub, p, rng), k.secret, p) - edge) <= std::ldexp(1.0, -10));
    try {
        encrypt(2.0 * edge, 0, k.pub, p, rng);
        FAIL("expected overflow");
    } catch (const CryptoError& e) {
        CHECK(e.code() == ErrorCode::Overflow);
    }
}

TEST_CASE("encryption is deterministic given the seed") {
    SchemeParams p;
    const auto k = keygen(p);
    std::mt19937_64 r1(5), r2(5);
    CHECK(encrypt(3.0, 4, k.pub, p, r1).body == encrypt(3.0, 4, k.pub, p, r2).body);
}

TEST_CASE("level and scale bookkeeping errors") {
    SchemeParams p;
    const auto k = keygen(p);
    std::mt19937_64 rng(2);
    const auto a = encrypt(1.0, 3, k.pub, p, rng);
    const auto b = encrypt(1.0, 2, k.pub, p, rng);
    auto code_of = [](auto&& fn) {
        try {
            fn();
        } catch (const CryptoError& e) {
            return e.code();
        }
        FAIL("expected CryptoError");
        return ErrorCode::Overflow;
    };
    CHECK(code_of([&] { add(a, b, p); }) == ErrorCode::LevelMismatch);
    const auto scaled = plain_mul(quantize(Matrix::Identity(1, 1), p), {a}, p)[0];
    CHECK(code_of([&] { add(a, scaled, p); }) == ErrorCode::ScaleMismatch);
    CHECK(code_of([&] { rescale(a, p); }) == ErrorCode::ScaleMismatch);
    const auto z = encrypt(1e-6, 0, k.pub, p, rng);
    const auto z2 = plain_mul(quantize(Matrix::Identity(1, 1), p), {z}, p)[0];
    CHECK(code_of([&] { rescale(z2, p); }) == ErrorCode::NoLevelsLeft);
    CHECK(code_of([&] { mod_down(b, 3, p); }) == ErrorCode::LevelMismatch);
    CHECK(code_of([&] { bootstrap_emulated(a, default_poly(), k, p, rng); }) == ErrorCode::LevelMismatch);
}

TEST_CASE("multiplying by c I and rescaling returns the message") {
    SchemeParams p;
    const auto k = keygen(p);
    std::mt19937_64 rng(3);
    const std::vector<Ciphertext> x = {encrypt(1.25, 5, k.pub, p, rng), encrypt(-7.5, 5, k.pub, p, rng)};
    IntMatrix cI = IntMatrix::Identity(2, 2) * static_cast<std::int64_t>(p.c);
    const auto y = plain_mul(cI, x, p);
    CHECK(y[0].scale_exponent == 2);
    CHECK(std::abs(decrypt(y[0], k.secret, p) - 1.25) <= y[0].debug_noise);
    const auto r = rescale(y[1], p);
    CHECK(r.level == 4);
    CHECK(r.scale_exponent == 1);
    CHECK(std::abs(decrypt(r, k.secret, p) + 7.5) <= r.debug_noise);
}

TEST_CASE("a chain of rescales consumes one level each") {
    SchemeParams p;
    const auto k = keygen(p);
    std::mt19937_64 rng(4);
    Ciphertext ct = encrypt(0.75, p.L, k.pub, p, rng);
    const IntMatrix half = quantize(Matrix::Constant(1, 1, 0.5), p);
    double expected = 0.75;
    for (int l = p.L; l > 0; --l) {
        ct = rescale(plain_mul(half, {ct}, p)[0], p);
        expected *= 0.5;
        CHECK(ct.level == l - 1);
        CHECK(std::abs(decrypt(ct, k.secret, p) - expected) <= ct.debug_noise);
    }
}

TEST_CASE("encrypted linear recursion tracks the plaintext one") {
    SchemeParams p;
    const auto k = keygen(p);
    std::mt19937_64 rng(6);
    Matrix A(2, 2);
    A << 0.13, 0.1, -1.27, 0.15;
    const IntMatrix Aq = quantize(A, p);
    Vector x(2);
    x << 1.0, -2.0;
    std::vector<Ciphertext> cx = {encrypt(x(0), p.L, k.pub, p, rng), encrypt(x(1), p.L, k.pub, p, rng)};
    for (int t = 0; t < 10; ++t) {
        auto y = plain_mul(Aq, cx, p);
        for (auto& c : y) c = rescale(c, p);
        cx = y;
        x = Aq.cast<double>() * x / p.scale();
        for (int i = 0; i < 2; ++i) CHECK(std::abs(decrypt(cx[i], k.secret, p) - x(i)) <= cx[i].debug_noise);
    }
}

TEST_CASE("bootstrapping: overflow counts stay within K for sparse keys") {
    SchemeParams p;
    const auto k = keygen(p);
    std::mt19937_64 rng(7);
    std::map<int, int> hist;
    int violations = 0;
    const double limit = 0.5 * 0.5 * static_cast<double>(p.q0) / p.scale() - 20.0;
    std::uniform_real_distribution<double> m(-limit, limit);
    for (int i = 0; i < 10000; ++i) {
        const auto out = bootstrap_emulated(encrypt(m(rng), 0, k.pub, p, rng), default_poly(), k, p, rng,
                                            ViolationPolicy::Record);
        ++hist[out.telemetry.r];
        violations += out.telemetry.status != BootstrapStatus::Ok;
    }
    CHECK(violations == 0);
    for (auto [r, count] : hist) CHECK(std::abs(r) <= 2);
    CHECK(hist.size() >= 2);
}

TEST_CASE("bootstrapping: dense keys and oversized messages are flagged") {
    SchemeParams dense;
    dense.hamming_weight = dense.n;
    const auto kd = keygen(dense);
    std::mt19937_64 rng(8);
    int flagged = 0;
    for (int i = 0; i < 200; ++i) {
        const auto out = bootstrap_emulated(encrypt(0.0, 0, kd.pub, dense, rng), default_poly(), kd, dense, rng,
                                            ViolationPolicy::Record);
        flagged += out.telemetry.status == BootstrapStatus::AssumptionViolation;
    }
    CHECK(flagged > 0);
    bool thrown = false;
    for (int i = 0; i < 200 && !thrown; ++i) {
        try {
            bootstrap_emulated(encrypt(0.0, 0, kd.pub, dense, rng), default_poly(), kd, dense, rng);
        } catch (const CryptoError& e) {
            thrown = e.code() == ErrorCode::AssumptionViolation;
        }
    }
    CHECK(thrown);

    SchemeParams p;
    const auto k = keygen(p);
    const double big = 0.3 * static_cast<double>(p.q0) / p.scale();
    try {
        bootstrap_emulated(encrypt(big, 0, k.pub, p, rng), default_poly(), k, p, rng);
        FAIL("expected range violation");
    } catch (const CryptoError& e) {
        CHECK(e.code() == ErrorCode::RangeViolation);
    }
}

TEST_CASE("randomized property suites") {
    const auto rep = crypto_props::run_all(2000, SchemeParams{}, default_poly(), 42);
    CAPTURE(rep.first_failure);
    CHECK(rep.ok());
    CHECK(rep.checks > 10000);
    CHECK(rep.max_bootstrap_relative_error <= default_poly().gamma_certified);
}
