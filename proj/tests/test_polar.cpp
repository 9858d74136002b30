#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "pbc/polar.hpp"
#include "pbc/rng.hpp"

using namespace pbc;

namespace {

// Independent transform oracle from the Kronecker structure: G[j][i] = 1 iff
// i is a bitwise submask of j, so x_i = XOR of u_j over supermasks j of i.
std::vector<std::uint8_t> transform_by_submask(const std::vector<std::uint8_t>& u) {
    const std::size_t N = u.size();
    std::vector<std::uint8_t> x(N, 0);
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < N; ++j)
            if ((i & ~j) == 0) x[i] ^= u[j];
    return x;
}

// Brute-force conditional P(u_i | u-prefix, measures) by enumerating all
// completions and transforming each candidate through the submask oracle.
MeasurePair brute_conditional(const std::vector<MeasurePair>& meas, const std::vector<std::uint8_t>& prefix) {
    const std::size_t N = meas.size();
    const std::size_t i = prefix.size();
    MeasurePair out{0.0, 0.0};
    std::vector<std::uint8_t> u(N);
    for (std::size_t cand = 0; cand < (std::size_t{1} << N); ++cand) {
        for (std::size_t b = 0; b < N; ++b) u[b] = static_cast<std::uint8_t>((cand >> b) & 1u);
        bool match = true;
        for (std::size_t b = 0; b < i && match; ++b) match = u[b] == prefix[b];
        if (!match) continue;
        auto x = transform_by_submask(u);
        double p = 1.0;
        for (std::size_t b = 0; b < N; ++b) p *= meas[b][x[b]];
        out[u[i]] += p;
    }
    const double s = out[0] + out[1];
    if (s > 0.0) {
        out[0] /= s;
        out[1] /= s;
    }
    return out;
}

}  // namespace

TEST_CASE("polar transform basics") {
    std::vector<std::uint8_t> zeros(8, 0);
    CHECK(polar_transform(zeros) == zeros);

    std::vector<std::uint8_t> u{0, 1};
    CHECK(polar_transform(u) == std::vector<std::uint8_t>{1, 1});

    CHECK_THROWS_AS(polar_transform({0, 1, 0}), ValidationError);
}

TEST_CASE("polar transform is an involution and linear") {
    RngStream rng(11);
    for (std::size_t N : {std::size_t{16}, std::size_t{256}, std::size_t{4096}}) {
        std::vector<std::uint8_t> a(N), b(N);
        for (std::size_t i = 0; i < N; ++i) {
            a[i] = static_cast<std::uint8_t>(rng.next_bit());
            b[i] = static_cast<std::uint8_t>(rng.next_bit());
        }
        CHECK(polar_transform(polar_transform(a)) == a);

        std::vector<std::uint8_t> sum(N);
        for (std::size_t i = 0; i < N; ++i) sum[i] = a[i] ^ b[i];
        auto ta = polar_transform(a), tb = polar_transform(b);
        std::vector<std::uint8_t> tsum(N);
        for (std::size_t i = 0; i < N; ++i) tsum[i] = ta[i] ^ tb[i];
        CHECK(polar_transform(sum) == tsum);
    }
}

TEST_CASE("polar transform matches the Kronecker submask oracle") {
    RngStream rng(12);
    for (int n = 0; n <= 5; ++n) {
        const std::size_t N = std::size_t{1} << n;
        std::vector<std::uint8_t> u(N);
        for (auto& b : u) b = static_cast<std::uint8_t>(rng.next_bit());
        CHECK(polar_transform(u) == transform_by_submask(u));
    }
}

TEST_CASE("SC engine conditionals equal brute-force enumeration") {
    RngStream rng(13);
    for (int n = 1; n <= 3; ++n) {
        const std::size_t N = std::size_t{1} << n;
        for (int rep = 0; rep < 8; ++rep) {
            std::vector<MeasurePair> meas(N);
            for (auto& m : meas) {
                // Random per-position joint measures, occasionally skewed hard.
                double a = rng.next_unit(), b = rng.next_unit();
                if (rep % 3 == 0) a *= 1e-6;
                m = {a + 1e-12, b + 1e-12};
            }
            ScProcess sc(n);
            sc.start(meas);
            std::vector<std::uint8_t> prefix;
            for (std::size_t i = 0; i < N; ++i) {
                auto pair = sc.next();
                auto expect = brute_conditional(meas, prefix);
                CHECK(pair[0] == Catch::Approx(expect[0]).margin(1e-11));
                CHECK(pair[1] == Catch::Approx(expect[1]).margin(1e-11));
                int bit = rng.next_bit();
                prefix.push_back(static_cast<std::uint8_t>(bit));
                sc.fix(bit);
            }
        }
    }
}

TEST_CASE("SC engine survives zero-probability evidence") {
    // Deterministic measures contradicting the fixed bits: pairs fall back to
    // (0.5, 0.5) instead of dividing by zero.
    ScProcess sc(1);
    std::vector<MeasurePair> meas{{1.0, 0.0}, {1.0, 0.0}};
    sc.start(meas);
    auto first = sc.next();
    CHECK(first[0] == Catch::Approx(1.0));
    sc.fix(1);  // impossible under the measures
    auto second = sc.next();
    CHECK(second[0] + second[1] == Catch::Approx(1.0));
    CHECK(sc.saw_zero_measure());
}
