// Builders for code instances exercising all four chaining-layout cases over
// noiseless (identity) channels, used by the round-trip tests.
//
// The B cases use a fully pinned model (uniform W, V = W, X = V): every
// receiver posterior is exactly degenerate, so arbitrarily misaligned W-layer
// sets decode with zero error and the W-only chaining paths (B1) and the
// no-chaining path (B2) are exercised exactly.
//
// The A cases need V-layer message capacity, which no exactly-degenerate
// model provides, so they use low-noise auxiliary links (BSC(0.03)) and carve
// the receiver sets out of ultra-reliable positions (estimated Z <= 1e-8 for
// every argmax-decoded slot; the X layer is exactly pinned by Y1 = X). The
// deliberate two-sided misalignment between the carved sets forces the
// spill/chaining structure of cases A1 and A2.
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "pbc/chaining.hpp"
#include "pbc/harness.hpp"
#include "pbc/stats.hpp"

namespace pbc_test {

using namespace pbc;

// Auxiliary-distribution parameters of the block-length trend experiments:
// the W-V link carries the (small) auxiliary noise and the V-X link is the
// identity, which keeps every receiver's composite channel clean enough that
// desk-scale block lengths live in the regime where polarization outpaces
// the growing message size.
inline constexpr double kTrendPv = 0.025;
inline constexpr double kTrendPx = 0.0;
inline constexpr double kTrendInfoScale = 1.35;

inline ReceiverSets carve_receiver(const IndexSet& info, const IndexSet& h) {
    ReceiverSets rs;
    rs.info = info;
    rs.l_rec = info;
    rs.frozen = set_diff(h, info);
    rs.h_rec = rs.frozen;
    return rs;
}

inline IndexSet indices_at_most(const std::vector<double>& z, double thr) {
    IndexSet out;
    for (int i = 0; i < static_cast<int>(z.size()); ++i)
        if (z[static_cast<std::size_t>(i)] <= thr) out.push_back(i);
    return out;
}

inline IndexSet indices_at_least(const std::vector<double>& z, double thr) {
    IndexSet out;
    for (int i = 0; i < static_cast<int>(z.size()); ++i)
        if (z[static_cast<std::size_t>(i)] >= thr) out.push_back(i);
    return out;
}

inline IndexSet slice(const IndexSet& s, std::size_t from, std::size_t count) {
    if (from + count > s.size()) throw std::runtime_error("case factory: pool slice out of range");
    return IndexSet(s.begin() + static_cast<std::ptrdiff_t>(from),
                    s.begin() + static_cast<std::ptrdiff_t>(from + count));
}

inline IndexSet full_range(int n) {
    IndexSet out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = i;
    return out;
}

// ---------------------------------------------------------------------------
// B cases: pinned model, exact decoding everywhere.

inline CodeInstance make_pinned_case(CaseTag which, int n = 6, int k = 3) {
    const int N = 1 << n;
    LayeredDistribution layered(Pmf({0.5, 0.5}), identity_kernel(2), identity_kernel(2));
    auto channel = make_product_channel(identity_kernel(2), identity_kernel(2), identity_kernel(2));

    BitChannelSets sets;
    sets.N = N;
    sets.mode = SelectionMode::Rank;
    sets.w.h = full_range(N);
    // Deliberately two-sided misaligned public sets.
    IndexSet i2w = slice(sets.w.h, 0, 20);
    IndexSet i3w = slice(sets.w.h, 10, 20);
    IndexSet i1w = set_union(i2w, i3w);
    sets.w.rec.emplace(1, carve_receiver(i1w, sets.w.h));
    sets.w.rec.emplace(2, carve_receiver(i2w, sets.w.h));
    sets.w.rec.emplace(3, carve_receiver(i3w, sets.w.h));

    for (LayerSets* ls : {&sets.v, &sets.x}) {
        ls->l = full_range(N);  // deterministic given the context
        ls->rec.emplace(1, carve_receiver({}, {}));
        if (ls == &sets.v) ls->rec.emplace(3, carve_receiver({}, {}));
    }

    // |I2w ∩ I3w| = 10, |I3w| = 20.
    const int nr0 = which == CaseTag::B1 ? 16 : 8;
    const double r0 = static_cast<double>(nr0) / N;
    auto ci = make_code_instance(n, k, layered, channel, sets, RateSplit{0.0, 0.0}, r0, 0xB0FF, 0xC0FF);
    if (ci.layout.tag != which) throw std::runtime_error("case factory: unexpected B-case tag");
    return ci;
}

// ---------------------------------------------------------------------------
// A cases: carved ultra-reliable pools. The V link is the noisy one
// (BSC(0.11), so the V layer has message capacity); the X link is the
// identity, which makes the V-layer receiver posterior exactly degenerate
// under Y = X and pins the X layer (NR12 = 0 here; the X message path is
// exercised by the pinned-X instance below).

struct CarvedModel {
    LayeredDistribution layered;
    BroadcastChannel channel;
    LayerStatsBundle stats;
    int n;
};

inline const CarvedModel& carved_model_v() {
    static const CarvedModel model = [] {
        const int n = 9;
        LayeredDistribution layered(Pmf({0.5, 0.5}), bsc_kernel(0.11), identity_kernel(2));
        auto channel = make_product_channel(identity_kernel(2), identity_kernel(2), identity_kernel(2));
        RngStream rng(0xCA5E);
        auto stats = monte_carlo_layer_stats(layered, channel, n, 30000, rng);
        return CarvedModel{layered, channel, std::move(stats), n};
    }();
    return model;
}

inline const CarvedModel& carved_model_x() {
    static const CarvedModel model = [] {
        const int n = 9;
        LayeredDistribution layered(Pmf({0.5, 0.5}), identity_kernel(2), bsc_kernel(0.11));
        auto channel = make_product_channel(identity_kernel(2), identity_kernel(2), identity_kernel(2));
        RngStream rng(0xCA5F);
        auto stats = monte_carlo_layer_stats(layered, channel, n, 30000, rng);
        return CarvedModel{layered, channel, std::move(stats), n};
    }();
    return model;
}

// Pool of positions every receiver decodes essentially surely (estimated
// Z below `ultra` for all of them).
inline IndexSet w_ultra_pool(const LayerStatsBundle& stats, double ultra) {
    std::vector<double> zw(stats.w.z_receiver.at(1));
    for (int j : {2, 3})
        for (std::size_t i = 0; i < zw.size(); ++i) zw[i] = std::max(zw[i], stats.w.z_receiver.at(j)[i]);
    return indices_at_most(zw, ultra);
}

inline CodeInstance make_carved_case(CaseTag which, int k = 3) {
    if (which != CaseTag::A1 && which != CaseTag::A2)
        throw std::runtime_error("case factory: carved cases are A1/A2");
    const auto& m = carved_model_v();
    const int N = 1 << m.n;
    const double ultra = 1e-8;

    IndexSet good_w = w_ultra_pool(m.stats, ultra);
    IndexSet h_v = indices_at_least(m.stats.v.z_source, 1.0 - ultra);
    IndexSet l_v = indices_at_most(m.stats.v.z_source, ultra);
    std::vector<double> zv(m.stats.v.z_receiver.at(1));
    for (std::size_t i = 0; i < zv.size(); ++i) zv[i] = std::max(zv[i], m.stats.v.z_receiver.at(3)[i]);
    IndexSet good_v = set_intersect(h_v, indices_at_most(zv, ultra));

    if (good_w.size() < 48 || good_v.size() < 18)
        throw std::runtime_error("case factory: ultra pools too small (W " + std::to_string(good_w.size()) +
                                 ", V " + std::to_string(good_v.size()) + ")");

    BitChannelSets sets;
    sets.N = N;
    sets.mode = SelectionMode::Rank;
    sets.w.h = full_range(N);
    IndexSet i3w = slice(good_w, 0, 16);
    IndexSet i2w = slice(good_w, 8, 40);
    sets.w.rec.emplace(1, carve_receiver(good_w, sets.w.h));
    sets.w.rec.emplace(2, carve_receiver(i2w, sets.w.h));
    sets.w.rec.emplace(3, carve_receiver(i3w, sets.w.h));

    sets.v.h = h_v;
    sets.v.l = l_v;
    sets.v.r = set_complement(set_union(h_v, l_v), N);
    IndexSet i3v = slice(good_v, 0, 12);
    IndexSet i1v = slice(good_v, 8, 10);
    sets.v.rec.emplace(1, carve_receiver(i1v, h_v));
    sets.v.rec.emplace(3, carve_receiver(i3v, h_v));

    // Identity X link: deterministic layer, no X-layer capacity.
    sets.x.l = full_range(N);
    sets.x.rec.emplace(1, carve_receiver({}, {}));

    // |I3w| = 16, |I2w ∩ I3w| = 8, spill 4, pool |I1v ∩ I3v| = 4.
    const int nr0 = 20;
    const int nr11 = which == CaseTag::A1 ? 7 : 3;
    auto ci = make_code_instance(m.n, k, m.layered, m.channel, sets,
                                 RateSplit{static_cast<double>(nr11) / N, 0.0},
                                 static_cast<double>(nr0) / N, 0xAB0FF, 0xAC0FF);
    if (ci.layout.tag != which) throw std::runtime_error("case factory: unexpected A-case tag");
    return ci;
}

// No-chaining instance whose private payload rides the X layer (the V link is
// pinned instead, so X has capacity and its receiver posterior is exactly
// degenerate under Y1 = X).
inline CodeInstance make_x_payload_case(int k = 3) {
    const auto& m = carved_model_x();
    const int N = 1 << m.n;
    const double ultra = 1e-8;

    IndexSet good_w = w_ultra_pool(m.stats, ultra);
    IndexSet h_x = indices_at_least(m.stats.x.z_source, 1.0 - ultra);
    IndexSet l_x = indices_at_most(m.stats.x.z_source, ultra);
    IndexSet good_x = set_intersect(h_x, indices_at_most(m.stats.x.z_receiver.at(1), ultra));
    if (good_w.size() < 20 || good_x.size() < 8)
        throw std::runtime_error("case factory: ultra pools too small (W " + std::to_string(good_w.size()) +
                                 ", X " + std::to_string(good_x.size()) + ")");

    BitChannelSets sets;
    sets.N = N;
    sets.mode = SelectionMode::Rank;
    sets.w.h = full_range(N);
    IndexSet common = slice(good_w, 0, 20);
    sets.w.rec.emplace(1, carve_receiver(good_w, sets.w.h));
    sets.w.rec.emplace(2, carve_receiver(common, sets.w.h));
    sets.w.rec.emplace(3, carve_receiver(common, sets.w.h));

    sets.v.l = full_range(N);
    sets.v.rec.emplace(1, carve_receiver({}, {}));
    sets.v.rec.emplace(3, carve_receiver({}, {}));

    sets.x.h = h_x;
    sets.x.l = l_x;
    sets.x.r = set_complement(set_union(h_x, l_x), N);
    sets.x.rec.emplace(1, carve_receiver(good_x, h_x));

    auto ci = make_code_instance(m.n, k, m.layered, m.channel, sets, RateSplit{0.0, 6.0 / N}, 12.0 / N,
                                 0xD0FF, 0xE0FF);
    if (ci.layout.tag != CaseTag::B2) throw std::runtime_error("case factory: expected a B2 layout");
    return ci;
}

inline CodeInstance make_case(CaseTag which, int k = 3) {
    if (which == CaseTag::B1 || which == CaseTag::B2) return make_pinned_case(which, 6, k);
    return make_carved_case(which, k);
}

// One noiseless round trip; returns per-receiver mismatch counts.
struct RoundTripOutcome {
    long long trials = 0;
    long long r1_bad = 0, r2_bad = 0, r3_bad = 0;
};

inline RoundTripOutcome run_noiseless_round_trip(const CodeInstance& ci, int trials, std::uint64_t seed) {
    RoundTripOutcome out;
    out.trials = trials;
    for (int t = 0; t < trials; ++t) {
        RngStream rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
        auto pub = random_bits(rng, ci.public_total);
        auto priv = random_bits(rng, ci.private_total);
        auto enc = encode_chain(ci, pub, priv);
        std::vector<std::vector<int>> y1, y2, y3;
        for (const auto& cw : enc.codewords) {
            auto s = transmit(ci.channel, cw, rng);
            y1.push_back(std::move(s.y1));
            y2.push_back(std::move(s.y2));
            y3.push_back(std::move(s.y3));
        }
        auto [p1, q1] = decode_receiver1(ci, y1);
        out.r1_bad += (p1 != pub || q1 != priv);
        out.r2_bad += decode_receiver2(ci, y2) != pub;
        out.r3_bad += decode_receiver3(ci, y3) != pub;
    }
    return out;
}

}  // namespace pbc_test
