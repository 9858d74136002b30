#include <catch2/catch_amalgamated.hpp>

#include "case_factory.hpp"
#include "pbc/chaining.hpp"
#include "pbc/verify.hpp"

using namespace pbc;
using namespace pbc_test;

namespace {

// Synthetic sets with prescribed cardinalities for budget arithmetic tests.
BitChannelSets synthetic_sets(int N, const IndexSet& i1w, const IndexSet& i2w, const IndexSet& i3w,
                              const IndexSet& i1v, const IndexSet& i3v, const IndexSet& i1x) {
    BitChannelSets s;
    s.N = N;
    s.w.h = full_range(N);
    s.w.rec.emplace(1, carve_receiver(i1w, s.w.h));
    s.w.rec.emplace(2, carve_receiver(i2w, s.w.h));
    s.w.rec.emplace(3, carve_receiver(i3w, s.w.h));
    s.v.h = full_range(N);
    s.v.rec.emplace(1, carve_receiver(i1v, s.v.h));
    s.v.rec.emplace(3, carve_receiver(i3v, s.v.h));
    s.x.h = full_range(N);
    s.x.rec.emplace(1, carve_receiver(i1x, s.x.h));
    return s;
}

IndexSet range(int lo, int hi) {  // [lo, hi)
    IndexSet out;
    for (int i = lo; i < hi; ++i) out.push_back(i);
    return out;
}

}  // namespace

TEST_CASE("budget arithmetic per case") {
    const int N = 64, k = 3;
    // |I2w ∩ I3w| = 10, |I3w| = 20 (A-case carving shrinks it below NR0).
    auto sets = synthetic_sets(N, range(0, 40), range(0, 30), range(20, 40), range(0, 12), range(6, 20),
                               range(0, 8));
    // I2w∩I3w = [20,30) -> 10; I3w\I2w = [30,40) -> 10; I2w\I3w = [0,20) -> 20.
    // I1v∩I3v = [6,12) -> 6; I3v\I1v = [12,20) -> 8; I1v\I3v = [0,6) -> 6.

    SECTION("no chaining when the public bits fit the common set") {
        auto b = message_bit_budget(sets, RateSplit{2.0 / N, 1.0 / N}, 8.0 / N, N, k);
        CHECK(b.tag == CaseTag::B2);
        CHECK(b.public_total == k * 8);
        CHECK(b.private_total == k * 3);
    }
    SECTION("W-layer chaining when the public bits fit receiver 3's set") {
        auto b = message_bit_budget(sets, RateSplit{2.0 / N, 1.0 / N}, 16.0 / N, N, k);
        CHECK(b.tag == CaseTag::B1);
        CHECK(b.public_total == (k - 1) * 16 + 10);
        CHECK(b.private_total == k * 3);
    }
    SECTION("spill case with the private pool large enough") {
        auto b = message_bit_budget(sets, RateSplit{4.0 / N, 1.0 / N}, 25.0 / N, N, k);
        CHECK(b.tag == CaseTag::A2);
        CHECK(b.public_total == (k - 1) * 25 + 10);  // 2*25 + 10 = 60
        CHECK(b.private_total == k * 5);
    }
    SECTION("spill case with second-level chaining") {
        // Spill 5 claims I3v∩F1v; pool stays 6; NR11 = 8 forces chaining.
        auto b = message_bit_budget(sets, RateSplit{8.0 / N, 1.0 / N}, 25.0 / N, N, k);
        CHECK(b.tag == CaseTag::A1);
        CHECK(b.public_total == (k - 1) * 25 + 10);
        CHECK(b.private_total == (k - 1) * 8 + k * 1 + 6);
    }
    SECTION("zero rates are the trivial no-chaining case") {
        auto b = message_bit_budget(sets, RateSplit{0.0, 0.0}, 0.0, N, k);
        CHECK(b.tag == CaseTag::B2);
        CHECK(b.public_total == 0);
        CHECK(b.private_total == 0);
    }
    SECTION("infeasible rates name the violated inequality and a backoff") {
        try {
            message_bit_budget(sets, RateSplit{20.0 / N, 1.0 / N}, 25.0 / N, N, k);
            FAIL("expected infeasibility");
        } catch (const InfeasibleError& e) {
            CHECK(e.violated.find("I321v") != std::string::npos);
            CHECK(e.max_backoff > 0.0);
            CHECK(e.max_backoff < 1.0);
            // The reported factor is feasible.
            auto b = message_bit_budget(sets, RateSplit{e.max_backoff * 20.0 / N, e.max_backoff * 1.0 / N},
                                        e.max_backoff * 25.0 / N, N, k);
            CHECK(b.public_total >= 0);
        }
    }
}

TEST_CASE("layout invariants") {
    const int N = 64, k = 3;
    auto sets = synthetic_sets(N, range(0, 40), range(0, 30), range(20, 40), range(0, 12), range(6, 20),
                               range(0, 8));
    auto L = build_layout(sets, RateSplit{8.0 / N, 1.0 / N}, 25.0 / N, N, k);

    CHECK(L.tag == CaseTag::A1);
    // |B_w1| = NR0 - |I3w ∩ I2w|.
    CHECK(static_cast<int>(L.bw1.size()) == 25 - 10);
    // |I31v| = NR0 - |I3w|.
    CHECK(static_cast<int>(L.i31v.size()) == 25 - 20);
    // |I11v| = |I321v|.
    CHECK(L.i11v.size() == L.i321v.size());
    // Copy links pair equal-cardinality sets landing in next-block sets.
    for (const auto& link : L.copy_links) {
        CHECK(link.src.size() == link.dst.size());
        if (link.dst_layer == LayerId::W) CHECK(set_subset(link.dst, L.bw1));
        if (link.dst_layer == LayerId::V) CHECK(link.dst == L.i11v);
    }
    // Partitions within a layer are disjoint.
    CHECK(set_disjoint(L.w_common, L.w_chained));
    CHECK(set_disjoint(L.bw1, L.w_common));
    CHECK(set_disjoint(L.i31v, L.v_private));
    CHECK(set_disjoint(L.i31v, L.i321v));
    CHECK(set_disjoint(L.i321v, L.v_private));
    CHECK(set_disjoint(L.i11v, set_union(L.i31v, L.i321v)));

    // k = 1 never links blocks.
    auto single = build_layout(sets, RateSplit{8.0 / N, 1.0 / N}, 25.0 / N, N, 1);
    CHECK(single.copy_links.empty());

    // B1 keeps every link inside the W layer.
    auto b1 = build_layout(sets, RateSplit{2.0 / N, 1.0 / N}, 16.0 / N, N, k);
    CHECK(b1.tag == CaseTag::B1);
    for (const auto& link : b1.copy_links) {
        CHECK(link.src_layer == LayerId::W);
        CHECK(link.dst_layer == LayerId::W);
    }
}

TEST_CASE("copy destinations hold the source values") {
    for (CaseTag tag : {CaseTag::A1, CaseTag::A2, CaseTag::B1}) {
        auto ci = make_case(tag);
        RngStream rng(derive_seed(41, static_cast<std::uint64_t>(tag)));
        auto pub = random_bits(rng, ci.public_total);
        auto priv = random_bits(rng, ci.private_total);
        auto enc = encode_chain(ci, pub, priv);
        for (int t = 0; t + 1 < ci.k; ++t) {
            for (const auto& link : ci.layout.copy_links) {
                auto u_of = [&](LayerId l, int blk) -> const std::vector<std::uint8_t>& {
                    const auto& b = enc.blocks[static_cast<std::size_t>(blk)];
                    return l == LayerId::W ? b.u_w : (l == LayerId::V ? b.u_v : b.u_x);
                };
                auto src = detail::gather(u_of(link.src_layer, t), link.src);
                auto dst = detail::gather(u_of(link.dst_layer, t + 1), link.dst);
                CHECK(src == dst);
            }
        }
    }
}

TEST_CASE("realized message bit counts match the budget formulas") {
    for (CaseTag tag : {CaseTag::A1, CaseTag::A2, CaseTag::B1, CaseTag::B2}) {
        auto ci = make_case(tag);
        const auto& L = ci.layout;
        long long pub = 0, priv = 0;
        for (int t = 0; t < ci.k; ++t) {
            for (const auto& s : public_slots(L, t)) pub += static_cast<long long>(s.set->size());
            for (const auto& s : private_slots(L, t)) priv += static_cast<long long>(s.set->size());
        }
        CHECK(pub == ci.public_total);
        CHECK(priv == ci.private_total);
        const int k = ci.k;
        switch (tag) {
            case CaseTag::A1:
                CHECK(ci.public_total == (k - 1) * L.nr0 + static_cast<long long>(L.w_common.size()));
                CHECK(ci.private_total == (k - 1) * L.nr11 + k * L.nr12 +
                                              static_cast<long long>(L.v_private.size()));
                break;
            case CaseTag::A2:
            case CaseTag::B1:
                CHECK(ci.public_total == (k - 1) * L.nr0 + static_cast<long long>(L.w_common.size()));
                CHECK(ci.private_total == static_cast<long long>(k) * (L.nr11 + L.nr12));
                break;
            case CaseTag::B2:
                CHECK(ci.public_total == static_cast<long long>(k) * L.nr0);
                CHECK(ci.private_total == static_cast<long long>(k) * (L.nr11 + L.nr12));
                break;
        }
    }
}

TEST_CASE("noiseless round trips recover every message in every case") {
    for (CaseTag tag : {CaseTag::A1, CaseTag::A2, CaseTag::B1, CaseTag::B2}) {
        INFO("case " << to_string(tag));
        auto ci = make_case(tag);
        auto out = run_noiseless_round_trip(ci, 100, derive_seed(0x5EED, static_cast<std::uint64_t>(tag)));
        CHECK(out.r1_bad == 0);
        CHECK(out.r2_bad == 0);
        CHECK(out.r3_bad == 0);
    }
}

TEST_CASE("single-block no-chaining code round-trips") {
    auto ci = make_case(CaseTag::B2, 1);
    CHECK(ci.layout.copy_links.empty());
    auto out = run_noiseless_round_trip(ci, 50, 0xD00D);
    CHECK(out.r1_bad + out.r2_bad + out.r3_bad == 0);
}

TEST_CASE("all-frozen code is reproducible bit-exact from seeds") {
    const int N = 64;
    auto sets = synthetic_sets(N, range(0, 40), range(0, 30), range(20, 40), range(0, 12), range(6, 20),
                               range(0, 8));
    LayeredDistribution layered(Pmf({0.5, 0.5}), identity_kernel(2), identity_kernel(2));
    auto channel = make_product_channel(identity_kernel(2), identity_kernel(2), identity_kernel(2));
    // Pinned-model sets carry the degenerate layers.
    auto ci = make_pinned_case(CaseTag::B2);
    CodeInstance zero = make_code_instance(ci.n, ci.k, ci.layered, ci.channel, ci.sets, RateSplit{0, 0}, 0.0,
                                           1234, 5678);
    CHECK(zero.public_total == 0);
    CHECK(zero.private_total == 0);
    auto e1 = encode_chain(zero, {}, {});
    auto e2 = encode_chain(zero, {}, {});
    CHECK(e1.codewords == e2.codewords);
    (void)sets;
    (void)layered;
    (void)channel;
}

TEST_CASE("identical evidence gives identical W-layer decisions for receivers 1 and 2") {
    // k2 is the identity, so y2 == y1 and both backward decoders see the same
    // observations; their W-layer decisions must agree bit for bit.
    auto ci = make_case(CaseTag::B1);
    RngStream rng(321);
    auto pub = random_bits(rng, ci.public_total);
    auto priv = random_bits(rng, ci.private_total);
    auto enc = encode_chain(ci, pub, priv);
    std::vector<std::vector<int>> y(static_cast<std::size_t>(ci.k));
    for (int t = 0; t < ci.k; ++t) {
        auto s = transmit(ci.channel, enc.codewords[static_cast<std::size_t>(t)], rng);
        y[static_cast<std::size_t>(t)] = std::move(s.y1);
    }
    auto d1 = decode_receiver1_detail(ci, y);
    auto d2 = decode_receiver2_detail(ci, y);
    CHECK(d1.u_w == d2.u_w);
    CHECK(d1.public_msg == d2.public_msg);
}

TEST_CASE("messages of the wrong length are rejected") {
    auto ci = make_case(CaseTag::B2);
    std::vector<std::uint8_t> pub(static_cast<std::size_t>(ci.public_total + 1), 0);
    std::vector<std::uint8_t> priv(static_cast<std::size_t>(ci.private_total), 0);
    CHECK_THROWS_AS(encode_chain(ci, pub, priv), ValidationError);
}

TEST_CASE("single-block no-chaining code with an X-layer payload round-trips") {
    auto ci = make_x_payload_case();
    CHECK(ci.layout.nr12 == 6);
    CHECK(ci.private_total == static_cast<long long>(ci.k) * 6);
    auto out = run_noiseless_round_trip(ci, 50, 0xFEED);
    CHECK(out.r1_bad == 0);
    CHECK(out.r2_bad == 0);
    CHECK(out.r3_bad == 0);
}

TEST_CASE("encoder distribution equals the ensemble product law") {
    // n = 3 instance with nontrivial H/L/R split in every layer; the encoder
    // rule probabilities (uniform on H, argmax on L, exact conditional on R)
    // are compared cell by cell against an independent enumeration. The
    // asymmetric configuration keeps all three layers away from the exactly
    // polarized extremes.
    auto combo = oracle_combos()[3];
    const int n = combo.n;
    const std::size_t N = std::size_t{1} << n;
    const std::size_t M = std::size_t{1} << N;
    auto stats = exact_layer_stats(combo.layered, combo.channel, n);
    SelectParams params;
    params.mode = SelectionMode::Threshold;
    params.beta = 0.3;
    auto sets = select_sets(stats, params);
    REQUIRE_FALSE(sets.w.r.empty());  // the unpolarized midfield exists at n=3

    // Independent conditionals via prefix-sum tables: T[u] (u_1 as the most
    // significant bit) holds the joint of the whole u sequence with the
    // observations, s obtained from the Kronecker submask identity.
    auto build_levels = [&](const SingleLetter& sl, const std::vector<int>& obs) {
        std::vector<std::vector<double>> levels(N + 1);
        auto& top = levels[N];
        top.assign(M, 0.0);
        for (std::size_t cand = 0; cand < M; ++cand) {
            // cand bit b = u_{b+1}; submask transform gives the source symbols.
            double p = 1.0;
            for (std::size_t b = 0; b < N; ++b) {
                int s_b = 0;
                for (std::size_t j = 0; j < N; ++j)
                    if ((b & ~j) == 0) s_b ^= static_cast<int>((cand >> j) & 1u);
                p *= sl.tbl[static_cast<std::size_t>(obs[b])][static_cast<std::size_t>(s_b)];
            }
            std::size_t msb_index = 0;
            for (std::size_t b = 0; b < N; ++b) msb_index |= ((cand >> b) & 1u) << (N - 1 - b);
            top[msb_index] += p;
        }
        for (std::size_t l = N; l >= 1; --l) {
            levels[l - 1].assign(std::size_t{1} << (l - 1), 0.0);
            for (std::size_t p2 = 0; p2 < levels[l].size(); p2 += 2)
                levels[l - 1][p2 / 2] = levels[l][p2] + levels[l][p2 + 1];
        }
        return levels;
    };

    double worst = 0.0;
    for (LayerId layer : {LayerId::W, LayerId::V, LayerId::X}) {
        const LayerSets& ls = sets.layer(layer);
        SingleLetter model = source_model(layer, combo.layered);
        std::vector<std::uint8_t> cls(N, 2);
        for (int i : ls.h) cls[static_cast<std::size_t>(i)] = 0;
        for (int i : ls.l) cls[static_cast<std::size_t>(i)] = 1;

        const std::size_t ctx_count = layer == LayerId::W ? 1 : M;
        ScProcess sc(n);
        std::vector<std::uint8_t> ctx(N, 0);
        for (std::size_t c = 0; c < ctx_count; ++c) {
            for (std::size_t b = 0; b < N; ++b) ctx[b] = static_cast<std::uint8_t>((c >> b) & 1u);
            auto obs = source_observations(layer, ctx, N);
            auto meas = build_measures(model, obs);
            auto levels = build_levels(model, obs);
            for (std::size_t uu = 0; uu < M; ++uu) {
                sc.start(meas);
                double lhs = 1.0, rhs = 1.0;
                std::size_t prefix = 0;
                for (std::size_t i = 0; i < N; ++i) {
                    const int bit = static_cast<int>((uu >> i) & 1u);
                    auto engine = sc.next();
                    const double denom = levels[i][prefix];
                    MeasurePair brute{0.5, 0.5};
                    if (denom > 0.0)
                        brute = {levels[i + 1][2 * prefix] / denom, levels[i + 1][2 * prefix + 1] / denom};
                    auto rule = [&](const MeasurePair& pr) {
                        if (cls[i] == 0) return 0.5;
                        if (cls[i] == 1) return argmax_bit(pr) == bit ? 1.0 : 0.0;
                        return pr[static_cast<std::size_t>(bit)];
                    };
                    lhs *= rule(engine);
                    rhs *= rule(brute);
                    prefix = 2 * prefix + static_cast<std::size_t>(bit);
                    sc.fix(bit);
                }
                worst = std::max(worst, std::abs(lhs - rhs));
            }
        }
    }
    CHECK(worst < 1e-10);
}
