// Rate-region machinery for the degraded-message-set broadcast setting:
// capacity-region membership, the five-inequality split region used by the
// typical-set argument, their Fourier-Motzkin equivalence check, and the
// constructive private-rate split.
#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "pbc/channel.hpp"
#include "pbc/prob.hpp"
#include "pbc/rng.hpp"

namespace pbc {

struct RatePair {
    double r0 = 0.0;  // public rate, bits/symbol
    double r1 = 0.0;  // private rate, bits/symbol
};

struct RateSplit {
    double r11 = 0.0;
    double r12 = 0.0;
};

struct MutualInfoProfile {
    double i_w_y1 = 0.0, i_w_y2 = 0.0, i_w_y3 = 0.0;
    double i_v_y3 = 0.0, i_v_y1_given_w = 0.0;
    double i_x_y1_given_w = 0.0, i_x_y1_given_v = 0.0, i_x_y1 = 0.0;
};

inline MutualInfoProfile profile(const LayeredDistribution& d, const BroadcastChannel& ch) {
    auto joints = induced_output_joints(d, ch);
    MutualInfoProfile p;
    p.i_w_y1 = mutual_information(joint_of(joints.j1, 0));
    p.i_w_y2 = mutual_information(joint_of(joints.j2, 0));
    p.i_w_y3 = mutual_information(joint_of(joints.j3, 0));
    p.i_v_y3 = mutual_information(joint_of(joints.j3, 1));
    p.i_v_y1_given_w = conditional_mutual_information(joint_of_given(joints.j1, 1, 0));
    p.i_x_y1_given_w = conditional_mutual_information(joint_of_given(joints.j1, 2, 0));
    p.i_x_y1_given_v = conditional_mutual_information(joint_of_given(joints.j1, 2, 1));
    p.i_x_y1 = mutual_information(joint_of(joints.j1, 2));
    return p;
}

// Strict membership: R0 < min(I(W;Y2), I(V;Y3)), R1 < I(X;Y1|W),
// R0+R1 < I(V;Y3) + I(X;Y1|V), each with `slack` subtracted from the bound.
inline bool in_capacity_region(const RatePair& p, const MutualInfoProfile& prof, double slack = 0.0) {
    if (p.r0 < 0.0 || p.r1 < 0.0) return false;
    return p.r0 < std::min(prof.i_w_y2, prof.i_v_y3) - slack && p.r1 < prof.i_x_y1_given_w - slack &&
           p.r0 + p.r1 < prof.i_v_y3 + prof.i_x_y1_given_v - slack;
}

// The five-inequality region over (R0, R11, R12).
inline bool in_split_region(double r0, double r11, double r12, const MutualInfoProfile& prof) {
    if (r0 < 0.0 || r11 < 0.0 || r12 < 0.0) return false;
    return r0 < prof.i_w_y2 && r12 < prof.i_x_y1_given_v && r11 + r12 < prof.i_x_y1_given_w &&
           r0 + r11 + r12 < prof.i_x_y1 && r0 + r11 < prof.i_v_y3;
}

struct FmCounterexample {
    bool from_projection = false;  // true: a split-region point projects outside; false: no split found
    double r0 = 0.0, r1 = 0.0, r11 = 0.0, r12 = 0.0;
};

struct FmReport {
    long long pairs_checked = 0, pairs_without_split = 0;
    long long triples_checked = 0, triples_outside = 0;
    std::optional<FmCounterexample> counterexample;
};

// Samples (a) rate pairs strictly inside the capacity region, asserting a
// split passing all five inequalities exists (analytic interval, midpoint
// verified, plus a grid fallback) and (b) split-region triples, asserting the
// projected pair lies inside the capacity region.
inline FmReport fm_equivalence_check(const MutualInfoProfile& prof, int trials, RngStream& rng,
                                     double slack = 1e-9) {
    FmReport rep;
    const double r0_box = std::min(prof.i_w_y2, prof.i_v_y3) * 1.05 + 1e-6;
    const double r1_box = prof.i_x_y1_given_w * 1.05 + 1e-6;
    for (int t = 0; t < trials; ++t) {
        RatePair p{rng.next_unit() * r0_box, rng.next_unit() * r1_box};
        if (!in_capacity_region(p, prof, slack)) continue;
        ++rep.pairs_checked;
        double lo = std::max(0.0, p.r1 - prof.i_x_y1_given_v);
        double hi = std::min(p.r1, prof.i_v_y3 - p.r0);
        bool found = lo < hi && in_split_region(p.r0, (lo + hi) / 2.0, p.r1 - (lo + hi) / 2.0, prof);
        if (!found) {  // grid fallback before declaring a counterexample
            for (int g = 0; g <= 1000 && !found; ++g) {
                double r11 = p.r1 * g / 1000.0;
                found = in_split_region(p.r0, r11, p.r1 - r11, prof);
            }
        }
        if (!found) {
            ++rep.pairs_without_split;
            if (!rep.counterexample) rep.counterexample = FmCounterexample{false, p.r0, p.r1, 0.0, 0.0};
        }
    }
    for (int t = 0; t < trials; ++t) {
        double r0 = rng.next_unit() * r0_box;
        double r11 = rng.next_unit() * r1_box;
        double r12 = rng.next_unit() * r1_box;
        if (!in_split_region(r0, r11, r12, prof)) continue;
        ++rep.triples_checked;
        if (!in_capacity_region(RatePair{r0, r11 + r12}, prof, 0.0)) {
            ++rep.triples_outside;
            if (!rep.counterexample) rep.counterexample = FmCounterexample{true, r0, r11 + r12, r11, r12};
        }
    }
    return rep;
}

struct InfeasibleError : Error {
    std::string violated;
    double max_backoff = 0.0;
    InfeasibleError(const std::string& what, std::string violated_ineq, double backoff)
        : Error(what), violated(std::move(violated_ineq)), max_backoff(backoff) {}
};

// Constructive rate split: returns (r11, r12) with r11 + r12 = R1 and
//   r11 < I(V;Y1|W),  r12 < I(X;Y1|V),  R0 + r11 < I(V;Y3),
// following the existence proof: pick a split meeting the first two strict
// bounds; if the third fails by delta, shift delta+ (midpoint of its valid
// open interval) from r11 to r12.
inline RateSplit split_private_rate(const RatePair& pair, const MutualInfoProfile& prof, double slack = 1e-9) {
    if (!in_capacity_region(pair, prof, slack))
        throw InfeasibleError("rate pair not strictly inside the capacity region", "capacity region", 0.0);
    if (pair.r1 == 0.0) return {0.0, 0.0};

    const double margin = 1e-9;
    double r11 = std::min(pair.r1, std::max(0.0, prof.i_v_y1_given_w - margin));
    double r12 = pair.r1 - r11;
    // An exactly-zero component carries no bits and needs no strict room;
    // this matters when one auxiliary link is deterministic and its mutual
    // information is exactly zero.
    auto r11_ok = [&](double a) { return a == 0.0 || a < prof.i_v_y1_given_w; };
    auto r12_ok = [&](double b) { return b == 0.0 || b < prof.i_x_y1_given_v; };
    if (!r12_ok(r12)) {
        // Shift to the midpoint of the open interval realizing the first two bounds.
        double lo = std::max(0.0, pair.r1 - prof.i_x_y1_given_v);
        double hi = std::min(pair.r1, prof.i_v_y1_given_w);
        if (!(lo < hi))
            throw InfeasibleError("no split meets r11 < I(V;Y1|W) and r12 < I(X;Y1|V)", "chain-rule split", 0.0);
        r11 = (lo + hi) / 2.0;
        r12 = pair.r1 - r11;
    }
    if (pair.r0 + r11 >= prof.i_v_y3) {
        const double delta = pair.r0 + r11 - prof.i_v_y3;
        const double delta1 = prof.i_x_y1_given_v - r12;
        const double cap = std::min(r11, delta1);
        if (!(delta < cap))
            throw InfeasibleError("empty adjustment interval for the third split bound (should not happen "
                                  "for strictly interior pairs)",
                                  "R0 + R11 < I(V;Y3)", 0.0);
        const double shift = (delta + cap) / 2.0;
        r11 -= shift;
        r12 += shift;
    }
    if (!(r11_ok(r11) && r12_ok(r12) && pair.r0 + r11 < prof.i_v_y3 && r11 >= 0.0 && r12 >= 0.0))
        throw InfeasibleError("split postcondition failed (bug signal)", "split identities", 0.0);
    return {r11, r12};
}

}  // namespace pbc
