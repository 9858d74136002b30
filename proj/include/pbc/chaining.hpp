// Two-level chaining code over k polar blocks: layout planning (which index
// sets carry public/private message bits, which are copy destinations),
// randomized three-layer SC encoding, and the three receivers' decoders.
//
// Conventions fixed here and relied on by every encoder/decoder pair:
//  - message bit counts per block are floor(N * rate) per component;
//  - within every index set, bits are assigned in ascending index order;
//  - the per-block public stream order is [w_common, w_chained, i31v], the
//    private stream order is [v_private, i321v, x_private], with the chained
//    sets absent in the last block;
//  - copy values land in the destination set in ascending order, W-layer
//    sources before V-layer sources;
//  - common-randomness positions take bit 1 iff unit(block,layer,i) < P(1|.);
//  - argmax ties resolve to bit 0.
#pragma once

#include <array>
#include <cstdint>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pbc/polar.hpp"
#include "pbc/rng.hpp"
#include "pbc/sets.hpp"

namespace pbc {

enum class CaseTag { A1, A2, B1, B2 };

inline std::string to_string(CaseTag t) {
    switch (t) {
        case CaseTag::A1: return "A1";
        case CaseTag::A2: return "A2";
        case CaseTag::B1: return "B1";
        default: return "B2";
    }
}

struct Budgets {
    CaseTag tag = CaseTag::B2;
    int nr0 = 0, nr11 = 0, nr12 = 0;  // per-block message bit counts
    long long public_total = 0, private_total = 0;
};

struct ChainingLayout {
    CaseTag tag = CaseTag::B2;
    int k = 1;
    int nr0 = 0, nr11 = 0, nr12 = 0;

    // W layer
    IndexSet w_common;   // public bits, every block (within I2w ∩ I3w)
    IndexSet w_chained;  // public bits, blocks 0..k-2; copied into next block's bw1
    IndexSet bw1;        // copy destination within I2w ∩ F3w, blocks 1..k-1
    IndexSet bw2;        // remainder of I2w ∩ F3w (frozen)
    // V layer
    IndexSet i31v;       // public spill within I3v, blocks 0..k-2 (A cases)
    IndexSet i32v;       // I3v \ i31v (bookkeeping)
    IndexSet v_private;  // direct private bits, every block
    IndexSet i321v;      // chained private bits within I3v ∩ F1v, blocks 0..k-2 (A1)
    IndexSet i322v;      // bookkeeping remainder
    IndexSet i11v;       // copy destination within I1v ∩ F3v, blocks 1..k-1 (A1)
    IndexSet i12v;       // remainder of I1v ∩ F3v (frozen)
    // X layer
    IndexSet x_private;  // private bits, every block (prefix of I1x)

    struct CopyLink {
        LayerId src_layer;
        IndexSet src;
        LayerId dst_layer;
        IndexSet dst;
    };
    std::vector<CopyLink> copy_links;  // applied from block t to block t+1
};

namespace detail {

struct LayoutPlan {
    Budgets budgets;
    ChainingLayout layout;
};

inline LayoutPlan plan_chaining_impl(const BitChannelSets& sets, int nr0, int nr11, int nr12, int k) {
    if (k < 1) throw ValidationError("plan_chaining: k must be >= 1");
    LayoutPlan plan;
    auto& L = plan.layout;
    auto& B = plan.budgets;
    L.k = k;
    L.nr0 = nr0;
    L.nr11 = nr11;
    L.nr12 = nr12;

    const IndexSet& i2w = sets.w.receiver(2).info;
    const IndexSet& i3w = sets.w.receiver(3).info;
    const IndexSet& i1v = sets.v.receiver(1).info;
    const IndexSet& i3v = sets.v.receiver(3).info;
    const IndexSet& i1x = sets.x.receiver(1).info;
    const IndexSet i2i3 = set_intersect(i2w, i3w);
    const IndexSet i2f3 = set_diff(i2w, i3w);
    const IndexSet i3f2 = set_diff(i3w, i2w);

    auto fail = [](const std::string& ineq) {
        throw InfeasibleError("rate backoff required: " + ineq, ineq, 0.0);
    };

    if (nr12 > static_cast<int>(i1x.size())) fail("NR12 <= |I1x|");
    L.x_private = set_prefix(i1x, static_cast<std::size_t>(nr12));

    if (nr0 <= static_cast<int>(i2i3.size())) {
        // Everything public fits where receivers 2 and 3 are both good: no chaining.
        B.tag = CaseTag::B2;
        L.w_common = set_prefix(i2i3, static_cast<std::size_t>(nr0));
        L.bw2 = i2f3;
        if (nr11 > static_cast<int>(i1v.size())) fail("NR11 <= |I1v|");
        L.v_private = set_prefix(i1v, static_cast<std::size_t>(nr11));
        B.public_total = static_cast<long long>(k) * nr0;
        B.private_total = static_cast<long long>(k) * (nr11 + nr12);
    } else if (nr0 <= static_cast<int>(i3w.size())) {
        // Public fits inside I3w: chain within the W layer only.
        B.tag = CaseTag::B1;
        L.w_common = i2i3;
        const std::size_t need = static_cast<std::size_t>(nr0) - i2i3.size();
        L.w_chained = set_prefix(i3f2, need);
        if (need > i2f3.size()) fail("NR0 <= |I2w| (B_w1 destination)");
        L.bw1 = set_prefix(i2f3, need);
        L.bw2 = set_diff(i2f3, L.bw1);
        if (nr11 > static_cast<int>(i1v.size())) fail("NR11 <= |I1v|");
        L.v_private = set_prefix(i1v, static_cast<std::size_t>(nr11));
        B.public_total = static_cast<long long>(k - 1) * nr0 + static_cast<long long>(i2i3.size());
        B.private_total = static_cast<long long>(k) * (nr11 + nr12);
    } else {
        // Public spills into the V layer; receiver 3 recovers it indirectly.
        const std::size_t spill = static_cast<std::size_t>(nr0) - i3w.size();
        const IndexSet i3f1v = set_diff(i3v, i1v);
        const IndexSet i3i1v = set_intersect(i3v, i1v);
        if (spill > i3v.size()) fail("NR0 <= |I3w| + |I3v| (V-layer spill)");
        // Spill claims I3v ∩ F1v first, then overflows into I3v ∩ I1v,
        // shrinking the direct-private pool.
        IndexSet i31v = set_prefix(i3f1v, std::min(spill, i3f1v.size()));
        if (spill > i3f1v.size())
            i31v = set_union(i31v, set_prefix(i3i1v, spill - i3f1v.size()));
        L.i31v = i31v;
        const IndexSet pool = set_diff(i3i1v, i31v);

        L.w_common = i2i3;
        L.w_chained = i3f2;
        const std::size_t need = static_cast<std::size_t>(nr0) - i2i3.size();
        if (need > i2f3.size()) fail("NR0 <= |I2w| (B_w1 destination)");
        L.bw1 = set_prefix(i2f3, need);
        L.bw2 = set_diff(i2f3, L.bw1);

        if (nr11 <= static_cast<int>(pool.size())) {
            B.tag = CaseTag::A2;
            L.v_private = set_prefix(pool, static_cast<std::size_t>(nr11));
            B.public_total = static_cast<long long>(k - 1) * nr0 + static_cast<long long>(i2i3.size());
            B.private_total = static_cast<long long>(k) * (nr11 + nr12);
        } else {
            B.tag = CaseTag::A1;
            L.v_private = pool;
            const std::size_t chain2 = static_cast<std::size_t>(nr11) - pool.size();
            const IndexSet i321_cap = set_diff(i3f1v, i31v);
            if (chain2 > i321_cap.size()) fail("NR11 - |pool| <= |I3v ∩ F1v \\ I31v| (I321v)");
            L.i321v = set_prefix(i321_cap, chain2);
            L.i322v = set_diff(i321_cap, L.i321v);
            const IndexSet i1f3v = set_diff(i1v, i3v);
            if (chain2 > i1f3v.size()) fail("NR11 - |pool| <= |I1v ∩ F3v| (I11v)");
            L.i11v = set_prefix(i1f3v, chain2);
            L.i12v = set_diff(i1f3v, L.i11v);
            B.public_total = static_cast<long long>(k - 1) * nr0 + static_cast<long long>(i2i3.size());
            B.private_total = static_cast<long long>(k - 1) * nr11 + static_cast<long long>(k) * nr12 +
                              static_cast<long long>(pool.size());
        }
        L.i32v = set_diff(i3v, L.i31v);
    }
    B.nr0 = nr0;
    B.nr11 = nr11;
    B.nr12 = nr12;
    L.tag = B.tag;

    if (k > 1) {
        if (!L.w_chained.empty())
            L.copy_links.push_back({LayerId::W, L.w_chained, LayerId::W,
                                    set_prefix(L.bw1, L.w_chained.size())});
        if (!L.i31v.empty())
            L.copy_links.push_back({LayerId::V, L.i31v, LayerId::W,
                                    IndexSet(L.bw1.begin() + static_cast<std::ptrdiff_t>(L.w_chained.size()),
                                             L.bw1.end())});
        if (!L.i321v.empty()) L.copy_links.push_back({LayerId::V, L.i321v, LayerId::V, L.i11v});
    }
    return plan;
}

inline int rate_bits(int N, double rate) {
    return static_cast<int>(std::floor(static_cast<double>(N) * rate + 1e-9));
}

}  // namespace detail

// Largest common scale factor on (r0, r11, r12) for which the layout is
// feasible at block length N; 1.0 means no backoff needed.
inline double max_feasible_backoff(const BitChannelSets& sets, double r0, const RateSplit& split, int N,
                                   int k) {
    auto feasible = [&](double s) {
        try {
            detail::plan_chaining_impl(sets, detail::rate_bits(N, s * r0), detail::rate_bits(N, s * split.r11),
                                       detail::rate_bits(N, s * split.r12), k);
            return true;
        } catch (const InfeasibleError&) {
            return false;
        }
    };
    if (feasible(1.0)) return 1.0;
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 60; ++it) {
        double mid = (lo + hi) / 2.0;
        (feasible(mid) ? lo : hi) = mid;
    }
    return lo;
}

inline detail::LayoutPlan plan_chaining(const BitChannelSets& sets, const RateSplit& split, double r0, int N,
                                        int k) {
    const int nr0 = detail::rate_bits(N, r0);
    const int nr11 = detail::rate_bits(N, split.r11);
    const int nr12 = detail::rate_bits(N, split.r12);
    try {
        return detail::plan_chaining_impl(sets, nr0, nr11, nr12, k);
    } catch (const InfeasibleError& e) {
        const double backoff = max_feasible_backoff(sets, r0, split, N, k);
        std::ostringstream os;
        os << e.what() << " (max feasible backoff factor " << std::setprecision(15) << backoff << ")";
        throw InfeasibleError(os.str(), e.violated, backoff);
    }
}

inline Budgets message_bit_budget(const BitChannelSets& sets, const RateSplit& split, double r0, int N,
                                  int k) {
    return plan_chaining(sets, split, r0, N, k).budgets;
}

inline ChainingLayout build_layout(const BitChannelSets& sets, const RateSplit& split, double r0, int N,
                                   int k) {
    return plan_chaining(sets, split, r0, N, k).layout;
}

// ---------------------------------------------------------------------------
// Code instance

struct CodeInstance {
    int n = 0, N = 0, k = 1;
    LayeredDistribution layered;
    BroadcastChannel channel;
    BitChannelSets sets;
    ChainingLayout layout;
    long long public_total = 0, private_total = 0;
    std::uint64_t frozen_seed = 0, common_seed = 0;
    // frozen[layer][block][i] is -1 where position i carries message/copy
    // bits in that block, else the shared frozen bit. All receivers hold the
    // full table.
    std::array<std::vector<std::vector<std::int8_t>>, 3> frozen;

    const std::vector<std::int8_t>& frozen_row(LayerId layer, int block) const {
        return frozen[static_cast<std::size_t>(layer)][static_cast<std::size_t>(block)];
    }
};

struct SlotRef {
    LayerId layer;
    const IndexSet* set;
};

// Per-block stream consumption order; chained sets drop out of the last block.
inline std::vector<SlotRef> public_slots(const ChainingLayout& L, int t) {
    std::vector<SlotRef> s;
    s.push_back({LayerId::W, &L.w_common});
    if (t + 1 < L.k) {
        if (!L.w_chained.empty()) s.push_back({LayerId::W, &L.w_chained});
        if (!L.i31v.empty()) s.push_back({LayerId::V, &L.i31v});
    }
    return s;
}

inline std::vector<SlotRef> private_slots(const ChainingLayout& L, int t) {
    std::vector<SlotRef> s;
    if (!L.v_private.empty()) s.push_back({LayerId::V, &L.v_private});
    if (t + 1 < L.k && !L.i321v.empty()) s.push_back({LayerId::V, &L.i321v});
    if (!L.x_private.empty()) s.push_back({LayerId::X, &L.x_private});
    return s;
}

namespace detail {

inline void scatter(std::vector<std::int8_t>& a, const IndexSet& s, std::span<const std::uint8_t> bits,
                    std::size_t offset = 0) {
    for (std::size_t j = 0; j < s.size(); ++j) a[static_cast<std::size_t>(s[j])] =
        static_cast<std::int8_t>(bits[offset + j]);
}

inline std::vector<std::uint8_t> gather(const std::vector<std::uint8_t>& u, const IndexSet& s) {
    std::vector<std::uint8_t> out;
    out.reserve(s.size());
    for (int i : s) out.push_back(u[static_cast<std::size_t>(i)]);
    return out;
}

// Positions carrying message or copied bits in block t (cleared from the
// frozen table).
inline std::vector<IndexSet> non_frozen_sets(const ChainingLayout& L, int t, LayerId layer) {
    std::vector<IndexSet> out;
    for (const auto& s : public_slots(L, t))
        if (s.layer == layer) out.push_back(*s.set);
    for (const auto& s : private_slots(L, t))
        if (s.layer == layer) out.push_back(*s.set);
    if (t > 0) {
        if (layer == LayerId::W && !L.bw1.empty()) out.push_back(L.bw1);
        if (layer == LayerId::V && !L.i11v.empty()) out.push_back(L.i11v);
    }
    return out;
}

}  // namespace detail

// Fills the shared frozen table from the instance's seed: uniform bits on
// every H position not holding message or copied bits in that block.
inline void rebuild_frozen_table(CodeInstance& ci) {
    CommonRandomness fz{ci.frozen_seed};
    for (LayerId layer : {LayerId::W, LayerId::V, LayerId::X}) {
        auto& rows = ci.frozen[static_cast<std::size_t>(layer)];
        rows.assign(static_cast<std::size_t>(ci.k),
                    std::vector<std::int8_t>(static_cast<std::size_t>(ci.N), -1));
        const auto& h = ci.sets.layer(layer).h;
        for (int t = 0; t < ci.k; ++t) {
            for (int i : h)
                rows[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)] =
                    static_cast<std::int8_t>(fz.bit(t, static_cast<int>(layer), i));
            for (const auto& s : detail::non_frozen_sets(ci.layout, t, layer))
                for (int i : s) rows[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)] = -1;
        }
    }
}

inline CodeInstance make_code_instance(int n, int k, const LayeredDistribution& layered,
                                       const BroadcastChannel& channel, const BitChannelSets& sets,
                                       const RateSplit& split, double r0, std::uint64_t frozen_seed,
                                       std::uint64_t common_seed) {
    CodeInstance ci{.n = n,
                    .N = 1 << n,
                    .k = k,
                    .layered = layered,
                    .channel = channel,
                    .sets = sets,
                    .layout = {},
                    .public_total = 0,
                    .private_total = 0,
                    .frozen_seed = frozen_seed,
                    .common_seed = common_seed,
                    .frozen = {}};
    if (sets.N != ci.N) throw ValidationError("make_code_instance: sets built for a different N");
    auto plan = plan_chaining(sets, split, r0, ci.N, k);
    ci.layout = plan.layout;
    ci.public_total = plan.budgets.public_total;
    ci.private_total = plan.budgets.private_total;

    long long sched_pub = 0, sched_priv = 0;
    for (int t = 0; t < k; ++t) {
        for (const auto& s : public_slots(ci.layout, t)) sched_pub += static_cast<long long>(s.set->size());
        for (const auto& s : private_slots(ci.layout, t)) sched_priv += static_cast<long long>(s.set->size());
    }
    if (sched_pub != ci.public_total || sched_priv != ci.private_total)
        throw Error("make_code_instance: slot schedule disagrees with budget formulas (internal)");

    rebuild_frozen_table(ci);
    return ci;
}

// ---------------------------------------------------------------------------
// Encoding

struct BlockVectors {
    std::vector<std::uint8_t> u_w, w, u_v, v, u_x, x;
};

// One randomized SC layer pass: H positions from `h_assign`, low-entropy
// positions by the deterministic argmax rule, unpolarized positions sampled
// from the exact conditional through the shared randomness.
inline std::vector<std::uint8_t> sc_encode_layer(LayerId layer, std::span<const std::uint8_t> context,
                                                 std::span<const std::int8_t> h_assign,
                                                 const BitChannelSets& sets, const LayeredDistribution& layered,
                                                 const CommonRandomness& cr, int block,
                                                 ScProcess* scratch = nullptr) {
    const int N = sets.N;
    int n = 0;
    while ((1 << n) < N) ++n;
    const LayerSets& ls = sets.layer(layer);
    SingleLetter model = source_model(layer, layered);
    auto obs = source_observations(layer, context, static_cast<std::size_t>(N));
    auto meas = build_measures(model, obs);

    ScProcess local(scratch ? 0 : n);
    ScProcess& sc = scratch ? *scratch : local;
    sc.start(meas);

    // 0 = H, 1 = L, 2 = R per position.
    std::vector<std::uint8_t> cls(static_cast<std::size_t>(N), 2);
    for (int i : ls.h) cls[static_cast<std::size_t>(i)] = 0;
    for (int i : ls.l) cls[static_cast<std::size_t>(i)] = 1;

    std::vector<std::uint8_t> u(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i) {
        auto pr = sc.next();
        std::uint8_t bit;
        if (cls[static_cast<std::size_t>(i)] == 0) {
            if (h_assign[static_cast<std::size_t>(i)] < 0)
                throw ValidationError("sc_encode_layer: missing assignment on a high-entropy position");
            bit = static_cast<std::uint8_t>(h_assign[static_cast<std::size_t>(i)]);
        } else if (cls[static_cast<std::size_t>(i)] == 1) {
            bit = static_cast<std::uint8_t>(argmax_bit(pr));
        } else {
            bit = cr.unit(block, static_cast<int>(layer), i) < pr[1] ? 1 : 0;
        }
        u[static_cast<std::size_t>(i)] = bit;
        sc.fix(bit);
    }
    return u;
}

struct EncodeResult {
    std::vector<std::vector<std::uint8_t>> codewords;  // k blocks of x^{1:N}
    std::vector<BlockVectors> blocks;
};

inline EncodeResult encode_chain(const CodeInstance& ci, std::span<const std::uint8_t> public_msg,
                                 std::span<const std::uint8_t> private_msg) {
    if (static_cast<long long>(public_msg.size()) != ci.public_total)
        throw ValidationError("encode_chain: public message length != budget");
    if (static_cast<long long>(private_msg.size()) != ci.private_total)
        throw ValidationError("encode_chain: private message length != budget");

    const auto& L = ci.layout;
    CommonRandomness cr{ci.common_seed};
    ScProcess sc(ci.n);
    EncodeResult res;
    res.codewords.resize(static_cast<std::size_t>(ci.k));
    res.blocks.resize(static_cast<std::size_t>(ci.k));

    std::size_t pub_pos = 0, priv_pos = 0;
    std::vector<std::uint8_t> carry_w;  // values for next block's bw1
    std::vector<std::uint8_t> carry_v;  // values for next block's i11v

    for (int t = 0; t < ci.k; ++t) {
        std::array<std::vector<std::int8_t>, 3> assign;
        for (LayerId layer : {LayerId::W, LayerId::V, LayerId::X})
            assign[static_cast<std::size_t>(layer)] = ci.frozen_row(layer, t);

        for (const auto& slot : public_slots(L, t)) {
            if (pub_pos + slot.set->size() > public_msg.size())
                throw Error("encode_chain: public schedule exceeds budget (internal)");
            detail::scatter(assign[static_cast<std::size_t>(slot.layer)], *slot.set,
                            public_msg.subspan(pub_pos, slot.set->size()));
            pub_pos += slot.set->size();
        }
        for (const auto& slot : private_slots(L, t)) {
            if (priv_pos + slot.set->size() > private_msg.size())
                throw Error("encode_chain: private schedule exceeds budget (internal)");
            detail::scatter(assign[static_cast<std::size_t>(slot.layer)], *slot.set,
                            private_msg.subspan(priv_pos, slot.set->size()));
            priv_pos += slot.set->size();
        }
        if (t > 0) {
            detail::scatter(assign[static_cast<std::size_t>(LayerId::W)], L.bw1, carry_w);
            detail::scatter(assign[static_cast<std::size_t>(LayerId::V)], L.i11v, carry_v);
        }

        auto& blk = res.blocks[static_cast<std::size_t>(t)];
        blk.u_w = sc_encode_layer(LayerId::W, {}, assign[0], ci.sets, ci.layered, cr, t, &sc);
        blk.w = polar_transform(blk.u_w);
        blk.u_v = sc_encode_layer(LayerId::V, blk.w, assign[1], ci.sets, ci.layered, cr, t, &sc);
        blk.v = polar_transform(blk.u_v);
        blk.u_x = sc_encode_layer(LayerId::X, blk.v, assign[2], ci.sets, ci.layered, cr, t, &sc);
        blk.x = polar_transform(blk.u_x);
        res.codewords[static_cast<std::size_t>(t)] = blk.x;

        if (t + 1 < ci.k) {
            carry_w = detail::gather(blk.u_w, L.w_chained);
            auto spill = detail::gather(blk.u_v, L.i31v);
            carry_w.insert(carry_w.end(), spill.begin(), spill.end());
            carry_v = detail::gather(blk.u_v, L.i321v);
        }
    }
    if (pub_pos != public_msg.size() || priv_pos != private_msg.size())
        throw Error("encode_chain: message schedule mismatch (internal)");
    return res;
}

// ---------------------------------------------------------------------------
// Decoding

namespace detail {

// One receiver-side SC pass over one layer of one block. `known` holds frozen
// and chained bits; every other position is decided by the receiver argmax
// rule except unpolarized positions, which replay the shared randomness
// against the source conditional.
inline std::vector<std::uint8_t> decode_layer_pass(int n, LayerId layer, const LayerSets& ls,
                                                   const SingleLetter& rec_model, std::span<const int> rec_obs,
                                                   const LayeredDistribution& layered,
                                                   std::span<const std::uint8_t> context,
                                                   std::span<const std::int8_t> known,
                                                   const CommonRandomness& cr, int block, ScProcess& rec_sc,
                                                   ScProcess& src_sc) {
    const std::size_t N = std::size_t{1} << n;
    auto meas = build_measures(rec_model, rec_obs);
    rec_sc.start(meas);

    const bool need_src = !ls.r.empty();
    SingleLetter src_model_local;
    if (need_src) {
        src_model_local = source_model(layer, layered);
        auto src_obs = source_observations(layer, context, N);
        src_sc.start(build_measures(src_model_local, src_obs));
    }

    std::vector<std::uint8_t> in_r(N, 0);
    for (int i : ls.r) in_r[static_cast<std::size_t>(i)] = 1;

    std::vector<std::uint8_t> u(N);
    for (std::size_t i = 0; i < N; ++i) {
        auto pr = rec_sc.next();
        MeasurePair ps{0.0, 0.0};
        if (need_src) ps = src_sc.next();
        std::uint8_t bit;
        if (known[i] >= 0) {
            bit = static_cast<std::uint8_t>(known[i]);
        } else if (in_r[i]) {
            bit = cr.unit(block, static_cast<int>(layer), static_cast<int>(i)) < ps[1] ? 1 : 0;
        } else {
            bit = static_cast<std::uint8_t>(argmax_bit(pr));
        }
        u[i] = bit;
        rec_sc.fix(bit);
        if (need_src) src_sc.fix(bit);
    }
    return u;
}

}  // namespace detail

struct DecodeDetail {
    std::vector<std::vector<std::uint8_t>> u_w, u_v, u_x;  // per block; unused layers stay empty
    std::vector<std::uint8_t> public_msg, private_msg;
};

// Receiver 3: forward block order; W layer, plus the V layer in the spill
// cases (decoded for every block, including the last).
inline DecodeDetail decode_receiver3_detail(const CodeInstance& ci,
                                            const std::vector<std::vector<int>>& y3_blocks) {
    if (static_cast<int>(y3_blocks.size()) != ci.k) throw ValidationError("decode: need k blocks of samples");
    const auto& L = ci.layout;
    const bool decode_v = L.tag == CaseTag::A1 || L.tag == CaseTag::A2;
    CommonRandomness cr{ci.common_seed};
    ScProcess rec_sc(ci.n), src_sc(ci.n);
    SingleLetter w_model = receiver_model(LayerId::W, ci.layered, ci.channel, 3);
    SingleLetter v_model = decode_v ? receiver_model(LayerId::V, ci.layered, ci.channel, 3) : SingleLetter{};
    const int ys = ci.channel.y3_size;

    DecodeDetail out;
    out.u_w.resize(static_cast<std::size_t>(ci.k));
    if (decode_v) out.u_v.resize(static_cast<std::size_t>(ci.k));

    std::vector<std::uint8_t> carry_w, carry_v;
    for (int t = 0; t < ci.k; ++t) {
        const auto& y = y3_blocks[static_cast<std::size_t>(t)];
        std::vector<std::int8_t> known_w = ci.frozen_row(LayerId::W, t);
        if (t > 0) detail::scatter(known_w, L.bw1, carry_w);
        auto obs_w = receiver_observations(LayerId::W, {}, y, ys);
        auto u_w = detail::decode_layer_pass(ci.n, LayerId::W, ci.sets.w, w_model, obs_w, ci.layered, {},
                                             known_w, cr, t, rec_sc, src_sc);
        auto w = polar_transform(u_w);
        out.u_w[static_cast<std::size_t>(t)] = std::move(u_w);

        if (decode_v) {
            std::vector<std::int8_t> known_v = ci.frozen_row(LayerId::V, t);
            if (t > 0) detail::scatter(known_v, L.i11v, carry_v);
            auto obs_v = receiver_observations(LayerId::V, w, y, ys);
            auto u_v = detail::decode_layer_pass(ci.n, LayerId::V, ci.sets.v, v_model, obs_v, ci.layered, w,
                                                 known_v, cr, t, rec_sc, src_sc);
            out.u_v[static_cast<std::size_t>(t)] = std::move(u_v);
        }

        if (t + 1 < ci.k) {
            carry_w = detail::gather(out.u_w[static_cast<std::size_t>(t)], L.w_chained);
            if (decode_v) {
                auto spill = detail::gather(out.u_v[static_cast<std::size_t>(t)], L.i31v);
                carry_w.insert(carry_w.end(), spill.begin(), spill.end());
                carry_v = detail::gather(out.u_v[static_cast<std::size_t>(t)], L.i321v);
            }
        }
    }

    // Public bits in stream order, read directly per block.
    for (int t = 0; t < ci.k; ++t) {
        for (const auto& slot : public_slots(L, t)) {
            const auto& u = slot.layer == LayerId::W ? out.u_w[static_cast<std::size_t>(t)]
                                                     : out.u_v[static_cast<std::size_t>(t)];
            auto bits = detail::gather(u, *slot.set);
            out.public_msg.insert(out.public_msg.end(), bits.begin(), bits.end());
        }
    }
    return out;
}

namespace detail {

// Shared backward pass for receivers 1 and 2. Receiver 2 stops at the W
// layer; receiver 1 decodes all three layers.
inline DecodeDetail decode_backward(const CodeInstance& ci, const std::vector<std::vector<int>>& y_blocks,
                                    int receiver) {
    if (static_cast<int>(y_blocks.size()) != ci.k) throw ValidationError("decode: need k blocks of samples");
    const auto& L = ci.layout;
    const bool full = receiver == 1;
    CommonRandomness cr{ci.common_seed};
    ScProcess rec_sc(ci.n), src_sc(ci.n);
    SingleLetter w_model = receiver_model(LayerId::W, ci.layered, ci.channel, receiver);
    SingleLetter v_model = full ? receiver_model(LayerId::V, ci.layered, ci.channel, 1) : SingleLetter{};
    SingleLetter x_model = full ? receiver_model(LayerId::X, ci.layered, ci.channel, 1) : SingleLetter{};
    const int ys = receiver == 1 ? ci.channel.y1_size : ci.channel.y2_size;

    DecodeDetail out;
    out.u_w.resize(static_cast<std::size_t>(ci.k));
    if (full) {
        out.u_v.resize(static_cast<std::size_t>(ci.k));
        out.u_x.resize(static_cast<std::size_t>(ci.k));
    }

    // Chained sources of block t become known once block t+1 is decoded.
    std::vector<std::uint8_t> carry_w;  // values for this block's w_chained ++ i31v
    std::vector<std::uint8_t> carry_v;  // values for this block's i321v
    for (int t = ci.k - 1; t >= 0; --t) {
        const auto& y = y_blocks[static_cast<std::size_t>(t)];
        std::vector<std::int8_t> known_w = ci.frozen_row(LayerId::W, t);
        if (t + 1 < ci.k && !carry_w.empty())
            scatter(known_w, L.w_chained, std::span<const std::uint8_t>(carry_w).first(L.w_chained.size()));
        auto obs_w = receiver_observations(LayerId::W, {}, y, ys);
        auto u_w = decode_layer_pass(ci.n, LayerId::W, ci.sets.w, w_model, obs_w, ci.layered, {}, known_w, cr,
                                     t, rec_sc, src_sc);
        auto w = polar_transform(u_w);
        out.u_w[static_cast<std::size_t>(t)] = std::move(u_w);

        if (full) {
            std::vector<std::int8_t> known_v = ci.frozen_row(LayerId::V, t);
            if (t + 1 < ci.k && !carry_w.empty())
                scatter(known_v, L.i31v,
                        std::span<const std::uint8_t>(carry_w).subspan(L.w_chained.size(), L.i31v.size()));
            if (t + 1 < ci.k && !carry_v.empty()) scatter(known_v, L.i321v, carry_v);
            auto obs_v = receiver_observations(LayerId::V, w, y, ys);
            auto u_v = decode_layer_pass(ci.n, LayerId::V, ci.sets.v, v_model, obs_v, ci.layered, w, known_v,
                                         cr, t, rec_sc, src_sc);
            auto v = polar_transform(u_v);
            out.u_v[static_cast<std::size_t>(t)] = std::move(u_v);

            std::vector<std::int8_t> known_x = ci.frozen_row(LayerId::X, t);
            auto obs_x = receiver_observations(LayerId::X, v, y, ys);
            out.u_x[static_cast<std::size_t>(t)] =
                decode_layer_pass(ci.n, LayerId::X, ci.sets.x, x_model, obs_x, ci.layered, v, known_x, cr, t,
                                  rec_sc, src_sc);
        }

        if (t > 0) {
            carry_w = gather(out.u_w[static_cast<std::size_t>(t)], L.bw1);
            if (full && !L.i11v.empty()) carry_v = gather(out.u_v[static_cast<std::size_t>(t)], L.i11v);
        }
    }

    // Public bits: w_common read in place; chained chunks of block t sit in
    // block t+1's bw1 (W-layer sources first, then the V spill).
    for (int t = 0; t < ci.k; ++t) {
        auto common = gather(out.u_w[static_cast<std::size_t>(t)], L.w_common);
        out.public_msg.insert(out.public_msg.end(), common.begin(), common.end());
        if (t + 1 < ci.k && !L.bw1.empty()) {
            auto chained = gather(out.u_w[static_cast<std::size_t>(t) + 1], L.bw1);
            out.public_msg.insert(out.public_msg.end(), chained.begin(), chained.end());
        }
    }
    if (full) {
        for (int t = 0; t < ci.k; ++t) {
            auto direct = gather(out.u_v[static_cast<std::size_t>(t)], L.v_private);
            out.private_msg.insert(out.private_msg.end(), direct.begin(), direct.end());
            if (t + 1 < ci.k && !L.i11v.empty()) {
                auto chained = gather(out.u_v[static_cast<std::size_t>(t) + 1], L.i11v);
                out.private_msg.insert(out.private_msg.end(), chained.begin(), chained.end());
            }
            auto xs = gather(out.u_x[static_cast<std::size_t>(t)], L.x_private);
            out.private_msg.insert(out.private_msg.end(), xs.begin(), xs.end());
        }
    }
    return out;
}

}  // namespace detail

inline DecodeDetail decode_receiver1_detail(const CodeInstance& ci,
                                            const std::vector<std::vector<int>>& y1_blocks) {
    return detail::decode_backward(ci, y1_blocks, 1);
}

inline DecodeDetail decode_receiver2_detail(const CodeInstance& ci,
                                            const std::vector<std::vector<int>>& y2_blocks) {
    return detail::decode_backward(ci, y2_blocks, 2);
}

inline std::pair<std::vector<std::uint8_t>, std::vector<std::uint8_t>> decode_receiver1(
    const CodeInstance& ci, const std::vector<std::vector<int>>& y1_blocks) {
    auto d = decode_receiver1_detail(ci, y1_blocks);
    return {std::move(d.public_msg), std::move(d.private_msg)};
}

inline std::vector<std::uint8_t> decode_receiver2(const CodeInstance& ci,
                                                  const std::vector<std::vector<int>>& y2_blocks) {
    return decode_receiver2_detail(ci, y2_blocks).public_msg;
}

inline std::vector<std::uint8_t> decode_receiver3(const CodeInstance& ci,
                                                  const std::vector<std::vector<int>>& y3_blocks) {
    return decode_receiver3_detail(ci, y3_blocks).public_msg;
}

}  // namespace pbc
