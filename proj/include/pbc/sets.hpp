// Bit-channel index-set algebra: high/low-entropy sets per layer, per-receiver
// information and frozen sets, and the not-completely-polarized remainder.
//
// Two selection modes:
//   threshold - H = {Z >= 1-delta_n}, L = {Z <= delta_n}, delta_n = 2^(-N^beta).
//   rank      - H/L are the largest/smallest source-Z indices up to caller
//               target fractions (ties broken by lower index); receiver L sets
//               analogously on receiver Z values. At desk-scale N the
//               threshold classifies almost nothing, so rank is the practical
//               mode; threshold is the faithful definition.
#pragma once

#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <vector>

#include "pbc/indexset.hpp"
#include "pbc/rate_region.hpp"
#include "pbc/stats.hpp"

namespace pbc {

enum class SelectionMode { Threshold, Rank };

struct ReceiverSets {
    IndexSet h_rec;  // receiver-side high set
    IndexSet l_rec;  // receiver-side low set
    IndexSet info;   // I_j = l_rec ∩ H
    IndexSet frozen; // F_j = H \ I_j
};

struct LayerSets {
    IndexSet h, l, r;
    std::map<int, ReceiverSets> rec;  // receiver id -> sets

    const ReceiverSets& receiver(int j) const { return rec.at(j); }
};

struct BitChannelSets {
    int N = 0;
    double delta_n = 0.0;
    SelectionMode mode = SelectionMode::Rank;
    LayerSets w, v, x;
    std::vector<int> nesting_violations;  // W-layer indices where L_{W|Y2} ⊄ L_{W|Y1}

    const LayerSets& layer(LayerId id) const {
        switch (id) {
            case LayerId::W: return w;
            case LayerId::V: return v;
            default: return x;
        }
    }
};

// Rank-mode target fractions. rec_l/rec_h keyed by receiver id. When a
// receiver has an info_count entry, its information set is instead the given
// number of positions of H with the smallest receiver statistics (the
// receiver low set becomes that union with L); this sizes the sets to the
// rate actually carried instead of the asymptotic fraction.
struct LayerTargets {
    double h = 0.0, l = 0.0;
    std::map<int, double> rec_l, rec_h;
    std::map<int, int> info_count;
};

struct SelectParams {
    SelectionMode mode = SelectionMode::Rank;
    double beta = 0.3;
    LayerTargets w, v, x;
};

namespace detail {

inline IndexSet top_by(const std::vector<double>& z, std::size_t count, bool largest,
                       const IndexSet* excluded = nullptr) {
    std::vector<int> idx;
    for (int i = 0; i < static_cast<int>(z.size()); ++i)
        if (!excluded || !set_contains(*excluded, i)) idx.push_back(i);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        return largest ? z[static_cast<std::size_t>(a)] > z[static_cast<std::size_t>(b)]
                       : z[static_cast<std::size_t>(a)] < z[static_cast<std::size_t>(b)];
    });
    IndexSet out(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(count));
    std::sort(out.begin(), out.end());
    return out;
}

inline std::size_t target_count(double frac, int N) {
    double c = std::llround(frac * N);
    return static_cast<std::size_t>(std::min<double>(std::max(0.0, c), N));
}

inline LayerSets select_layer(const BitChannelStats& st, SelectionMode mode, double delta_n,
                              const LayerTargets& targets) {
    const int N = st.N;
    LayerSets out;
    if (mode == SelectionMode::Threshold) {
        for (int i = 0; i < N; ++i) {
            if (st.z_source[static_cast<std::size_t>(i)] >= 1.0 - delta_n) out.h.push_back(i);
            if (st.z_source[static_cast<std::size_t>(i)] <= delta_n) out.l.push_back(i);
        }
    } else {
        std::size_t hc = target_count(targets.h, N);
        std::size_t lc = target_count(targets.l, N);
        if (hc + lc > static_cast<std::size_t>(N))
            throw ValidationError("select_sets: rank targets overlap (H + L exceeds N)");
        out.h = top_by(st.z_source, hc, true);
        // L picks from the complement of H so that full-tie inputs cannot
        // produce a spurious overlap.
        out.l = top_by(st.z_source, lc, false, &out.h);
    }
    out.r = set_complement(set_union(out.h, out.l), N);

    for (const auto& [j, zr] : st.z_receiver) {
        ReceiverSets rs;
        if (mode == SelectionMode::Threshold) {
            for (int i = 0; i < N; ++i) {
                if (zr[static_cast<std::size_t>(i)] >= 1.0 - delta_n) rs.h_rec.push_back(i);
                if (zr[static_cast<std::size_t>(i)] <= delta_n) rs.l_rec.push_back(i);
            }
            rs.info = set_intersect(rs.l_rec, out.h);
        } else if (targets.info_count.count(j)) {
            // Size-targeted: the requested number of H positions with the
            // smallest receiver statistics.
            std::vector<std::pair<double, int>> in_h;
            for (int i : out.h) in_h.emplace_back(zr[static_cast<std::size_t>(i)], i);
            std::stable_sort(in_h.begin(), in_h.end());
            const std::size_t count =
                std::min<std::size_t>(in_h.size(), static_cast<std::size_t>(std::max(0, targets.info_count.at(j))));
            for (std::size_t c = 0; c < count; ++c) rs.info.push_back(in_h[c].second);
            std::sort(rs.info.begin(), rs.info.end());
            rs.l_rec = set_union(rs.info, out.l);
            rs.h_rec = set_diff(out.h, rs.info);
        } else {
            rs.l_rec = top_by(zr, target_count(targets.rec_l.count(j) ? targets.rec_l.at(j) : 0.0, N), false);
            rs.h_rec = top_by(zr, target_count(targets.rec_h.count(j) ? targets.rec_h.at(j) : 0.0, N), true);
            rs.info = set_intersect(rs.l_rec, out.h);
        }
        rs.frozen = set_diff(out.h, rs.info);
        out.rec.emplace(j, std::move(rs));
    }
    return out;
}

}  // namespace detail

inline BitChannelSets select_sets(const LayerStatsBundle& stats, const SelectParams& params) {
    BitChannelSets sets;
    sets.N = stats.w.N;
    sets.mode = params.mode;
    sets.delta_n = std::pow(2.0, -std::pow(static_cast<double>(stats.w.N), params.beta));
    sets.w = detail::select_layer(stats.w, params.mode, sets.delta_n, params.w);
    sets.v = detail::select_layer(stats.v, params.mode, sets.delta_n, params.v);
    sets.x = detail::select_layer(stats.x, params.mode, sets.delta_n, params.x);
    // Degradation nesting L_{W|Y2} ⊆ L_{W|Y1}: exact under exact stats; under
    // Monte Carlo, violations are recorded, not fatal.
    if (sets.w.rec.count(1) && sets.w.rec.count(2)) {
        for (int i : sets.w.rec.at(2).l_rec)
            if (!set_contains(sets.w.rec.at(1).l_rec, i)) sets.nesting_violations.push_back(i);
    }
    return sets;
}

// Entropy-derived rank targets: |H|/N -> H(source | context), receiver low
// fractions -> 1 - H(source | context, Y_j). `margin` shrinks both sides of
// the source split, leaving ~2*margin*N positions in R.
inline SelectParams rank_targets_from_model(const LayeredDistribution& d, const BroadcastChannel& ch,
                                            double margin = 0.0) {
    SelectParams p;
    p.mode = SelectionMode::Rank;
    auto joints = induced_output_joints(d, ch);

    double hw = entropy(d.pw);
    double hv_w = 0.0, hx_v = 0.0;
    for (int w = 0; w < 2; ++w) hv_w += d.pw[w] * entropy(d.pv_given_w.row(w));
    auto pv = d.pv();
    for (int v = 0; v < 2; ++v) hx_v += pv[v] * entropy(d.px_given_v.row(v));

    auto clamp01 = [](double z) { return std::min(1.0, std::max(0.0, z)); };
    auto fill = [&](LayerTargets& t, double h_cond) {
        t.h = clamp01(h_cond - margin);
        t.l = clamp01(1.0 - h_cond - margin);
    };
    fill(p.w, hw);
    fill(p.v, hv_w);
    fill(p.x, hx_v);

    // H(W|Yj) etc. from the exact induced joints.
    auto h_cond_of = [&](const JointWVXY& j, int var, int extra_cond) {
        // entropy of `var` given (Yj and optionally the chain parent).
        Joint2 flat(2, extra_cond >= 0 ? 2 * j.y_size : j.y_size);
        for (int w = 0; w < 2; ++w)
            for (int v = 0; v < 2; ++v)
                for (int x = 0; x < 2; ++x)
                    for (int y = 0; y < j.y_size; ++y) {
                        int s = var == 0 ? w : (var == 1 ? v : x);
                        int c = extra_cond == 0 ? w : (extra_cond == 1 ? v : 0);
                        flat.at(s, extra_cond >= 0 ? c * j.y_size + y : y) += j.at(w, v, x, y);
                    }
        return conditional_entropy(flat);
    };
    for (int j : {1, 2, 3}) {
        const auto& jt = j == 1 ? joints.j1 : (j == 2 ? joints.j2 : joints.j3);
        double h = h_cond_of(jt, 0, -1);
        p.w.rec_l[j] = clamp01(1.0 - h - margin);
        p.w.rec_h[j] = clamp01(h - margin);
    }
    for (int j : {1, 3}) {
        const auto& jt = j == 1 ? joints.j1 : joints.j3;
        double h = h_cond_of(jt, 1, 0);
        p.v.rec_l[j] = clamp01(1.0 - h - margin);
        p.v.rec_h[j] = clamp01(h - margin);
    }
    {
        double h = h_cond_of(joints.j1, 2, 1);
        p.x.rec_l[1] = clamp01(1.0 - h - margin);
        p.x.rec_h[1] = clamp01(h - margin);
    }
    return p;
}

// Informational report comparing realized set fractions with the
// entropy/mutual-information quantities they approach as N grows.
struct PolarizationReport {
    struct Line {
        std::string label;
        double fraction;  // realized |set|/N
        double target;    // information-theoretic limit
    };
    std::vector<Line> lines;
    double r_fraction_w = 0.0, r_fraction_v = 0.0, r_fraction_x = 0.0;

    std::string to_string() const {
        std::ostringstream os;
        for (const auto& l : lines)
            os << "  " << l.label << ": " << l.fraction << " (limit " << l.target << ")\n";
        os << "  unpolarized fraction: W " << r_fraction_w << ", V " << r_fraction_v << ", X " << r_fraction_x
           << "\n";
        return os.str();
    }
};

inline PolarizationReport polarization_diagnostics(const BitChannelSets& sets, const LayeredDistribution& d,
                                                   const BroadcastChannel& ch) {
    PolarizationReport rep;
    const double N = sets.N;
    auto prof = profile(d, ch);

    double hw = entropy(d.pw);
    double hv_w = 0.0, hx_v = 0.0;
    for (int w = 0; w < 2; ++w) hv_w += d.pw[w] * entropy(d.pv_given_w.row(w));
    auto pv = d.pv();
    for (int v = 0; v < 2; ++v) hx_v += pv[v] * entropy(d.px_given_v.row(v));

    rep.lines.push_back({"|H_W|/N vs H(W)", sets.w.h.size() / N, hw});
    rep.lines.push_back({"|H_V|/N vs H(V|W)", sets.v.h.size() / N, hv_w});
    rep.lines.push_back({"|H_X|/N vs H(X|V)", sets.x.h.size() / N, hx_v});
    for (int j : {1, 2, 3}) {
        double target = j == 1 ? prof.i_w_y1 : (j == 2 ? prof.i_w_y2 : prof.i_w_y3);
        rep.lines.push_back({"|I" + std::to_string(j) + "_w|/N vs I(W;Y" + std::to_string(j) + ")",
                             sets.w.receiver(j).info.size() / N, target});
    }
    auto joints = induced_output_joints(d, ch);
    double i_v_y3_w = conditional_mutual_information(joint_of_given(joints.j3, 1, 0));
    rep.lines.push_back({"|I1_v|/N vs I(V;Y1|W)", sets.v.receiver(1).info.size() / N, prof.i_v_y1_given_w});
    rep.lines.push_back({"|I3_v|/N vs I(V;Y3|W)", sets.v.receiver(3).info.size() / N, i_v_y3_w});
    rep.lines.push_back({"|I1_x|/N vs I(X;Y1|V)", sets.x.receiver(1).info.size() / N, prof.i_x_y1_given_v});
    rep.r_fraction_w = sets.w.r.size() / N;
    rep.r_fraction_v = sets.v.r.size() / N;
    rep.r_fraction_x = sets.x.r.size() / N;
    return rep;
}

}  // namespace pbc
