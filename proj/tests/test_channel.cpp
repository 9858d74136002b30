#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>

#include "pbc/channel.hpp"
#include "pbc/rate_region.hpp"
#include "pbc/verify.hpp"

using namespace pbc;

namespace {

// Independent reimplementation of the documented stream recipe.
std::uint64_t ref_mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

struct RefStream {
    std::uint64_t state;
    double unit() {
        state += 0x9E3779B97F4A7C15ull;
        return static_cast<double>(ref_mix(state) >> 11) * 0x1.0p-53;
    }
};

}  // namespace

TEST_CASE("product channel construction") {
    auto noiseless = make_product_channel(identity_kernel(2), identity_kernel(2), identity_kernel(2));
    CHECK(noiseless.y1_given_x().at(0, 0) == Catch::Approx(1.0));
    CHECK(noiseless.y2_given_x().at(1, 1) == Catch::Approx(1.0));

    auto bsc = make_product_channel(bsc_kernel(0.1), bsc_kernel(0.2), bsc_kernel(0.05));
    CHECK(bsc.k13.at(0, 0 * 2 + 1) == Catch::Approx(0.9 * 0.2));
    // Degradation holds by construction: x->y2 equals composition through y1.
    auto y1 = bsc.y1_given_x();
    auto y2 = bsc.y2_given_x();
    for (int x = 0; x < 2; ++x)
        for (int b = 0; b < 2; ++b) {
            double composed = 0.0;
            for (int a = 0; a < 2; ++a) composed += y1.at(x, a) * bsc.k2.at(a, b);
            CHECK(y2.at(x, b) == Catch::Approx(composed).margin(1e-12));
        }

    auto bec = make_product_channel(bec_kernel(0.3), bsc_kernel(0.2), symmetric_kernel(3, 0.05));
    CHECK(bec.y1_size == 3);
    CHECK(bec.y3_size == 2);

    CHECK_THROWS_AS(make_product_channel(identity_kernel(3), bsc_kernel(0.1), bsc_kernel(0.1)),
                    ValidationError);
}

TEST_CASE("transmit over noiseless and degenerate channels") {
    auto noiseless = make_product_channel(identity_kernel(2), identity_kernel(2), identity_kernel(2));
    std::vector<std::uint8_t> x{0, 1, 1, 0, 1, 0, 0, 1};
    RngStream rng(5);
    auto s = transmit(noiseless, x, rng);
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(s.y1[i] == x[i]);
        CHECK(s.y2[i] == x[i]);
        CHECK(s.y3[i] == x[i]);
    }

    // Identity second hop: y2 always equals y1.
    auto ch = make_product_channel(bsc_kernel(0.3), bsc_kernel(0.3), bsc_kernel(0.0));
    RngStream rng2(6);
    auto s2 = transmit(ch, x, rng2);
    CHECK(s2.y1 == s2.y2);
}

TEST_CASE("transmit matches the documented stream recipe") {
    auto ch = make_product_channel(bsc_kernel(0.1), bsc_kernel(0.1), bsc_kernel(0.1));
    std::vector<std::uint8_t> x{1, 0, 1, 1, 0, 0, 1, 0};
    const std::uint64_t seed = 20240999;
    RngStream rng(seed);
    auto got = transmit(ch, x, rng);

    RefStream ref{seed};
    for (std::size_t i = 0; i < x.size(); ++i) {
        // (y1, y3) by CDF inversion over the k13 row, pair index y1*2+y3.
        double u = ref.unit();
        int pair = 3;
        double acc = 0.0;
        for (int c = 0; c < 3; ++c) {
            acc += ch.k13.at(x[i], c);
            if (u < acc) {
                pair = c;
                break;
            }
        }
        int y1 = pair / 2, y3 = pair % 2;
        double u2 = ref.unit();
        int y2 = u2 < ch.k2.at(y1, 0) ? 0 : 1;
        CHECK(got.y1[i] == y1);
        CHECK(got.y3[i] == y3);
        CHECK(got.y2[i] == y2);
    }
}

TEST_CASE("transmit frequencies converge to the kernel") {
    auto ch = make_product_channel(bsc_kernel(0.2), bsc_kernel(0.35), bsc_kernel(0.1));
    const int samples = 100000;
    for (int xbit = 0; xbit < 2; ++xbit) {
        std::vector<std::uint8_t> x(1, static_cast<std::uint8_t>(xbit));
        std::array<std::array<double, 2>, 3> freq{};
        RngStream rng(777 + static_cast<std::uint64_t>(xbit));
        for (int s = 0; s < samples; ++s) {
            auto out = transmit(ch, x, rng);
            freq[0][static_cast<std::size_t>(out.y1[0])] += 1.0;
            freq[1][static_cast<std::size_t>(out.y2[0])] += 1.0;
            freq[2][static_cast<std::size_t>(out.y3[0])] += 1.0;
        }
        auto y1k = ch.y1_given_x(), y2k = ch.y2_given_x(), y3k = ch.y3_given_x();
        for (int y = 0; y < 2; ++y) {
            CHECK(std::abs(freq[0][static_cast<std::size_t>(y)] / samples - y1k.at(xbit, y)) < 0.01);
            CHECK(std::abs(freq[1][static_cast<std::size_t>(y)] / samples - y2k.at(xbit, y)) < 0.01);
            CHECK(std::abs(freq[2][static_cast<std::size_t>(y)] / samples - y3k.at(xbit, y)) < 0.01);
        }
    }
}

TEST_CASE("induced joints") {
    // Noiseless channel: I(X;Y1) = H(X).
    auto noiseless = make_product_channel(identity_kernel(2), identity_kernel(2), identity_kernel(2));
    LayeredDistribution d(Pmf({0.5, 0.5}), bsc_kernel(0.2), bsc_kernel(0.1));
    auto joints = induced_output_joints(d, noiseless);
    CHECK(mutual_information(joint_of(joints.j1, 2)) == Catch::Approx(entropy(d.px())).margin(1e-12));

    // Constant W carries nothing.
    LayeredDistribution constw(Pmf({1.0, 0.0}), bsc_kernel(0.2), bsc_kernel(0.1));
    auto joints2 = induced_output_joints(constw, noiseless);
    CHECK(mutual_information(joint_of(joints2.j2, 0)) == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("receiver 2 is information-degraded") {
    RngStream rng(31337);
    for (int t = 0; t < 30; ++t) {
        auto layered = random_layered(rng);
        auto ch = random_channel(rng);
        auto prof = profile(layered, ch);
        CHECK(prof.i_w_y2 <= prof.i_w_y1 + 1e-12);
    }
}
