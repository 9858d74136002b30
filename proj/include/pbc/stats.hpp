// Bit-channel Bhattacharyya statistics for the three coding layers, computed
// either exactly (brute-force enumeration over all source/observation
// sequences; small n only) or by Monte Carlo (sample mean of 2*sqrt(p0*p1)
// with posteriors from an exact SC pass per sampled sequence).
#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "pbc/channel.hpp"
#include "pbc/polar.hpp"
#include "pbc/prob.hpp"
#include "pbc/rng.hpp"

namespace pbc {

struct BitChannelStats {
    LayerId layer = LayerId::W;
    int n = 0;
    int N = 0;
    std::vector<double> z_source;                      // length N
    std::map<int, std::vector<double>> z_receiver;     // receiver id -> length N
    std::map<int, std::vector<double>> z_receiver_se;  // Monte Carlo standard errors (empty rows if exact)
    std::vector<double> z_source_se;
    std::vector<double> h_source;                      // exact conditional entropies (exact mode only)
    std::map<int, std::vector<double>> h_receiver;
    bool exact = true;
    long long sample_count = 0;
};

struct LayerStatsBundle {
    BitChannelStats w, v, x;

    const BitChannelStats& layer(LayerId id) const {
        switch (id) {
            case LayerId::W: return w;
            case LayerId::V: return v;
            default: return x;
        }
    }
};

namespace detail {

struct ExactZH {
    std::vector<double> z, h;
};

// Exact Z values and conditional entropies for every bit-channel of one
// (layer, observation) model by enumerating all observation sequences; per
// observation sequence the joint over u-prefixes is folded down one level at
// a time.
inline ExactZH exact_zh_values(const SingleLetter& sl, int n) {
    const std::size_t N = std::size_t{1} << n;
    const std::size_t n_source_seqs = std::size_t{1} << N;

    double cost = std::pow(static_cast<double>(sl.obs_size), static_cast<double>(N)) *
                  static_cast<double>(n_source_seqs);
    if (cost > 4e9) throw ValidationError("exact_z_values: enumeration too large for this n/alphabet");

    // Map source sequence -> u index (u_1 is the most significant bit so that
    // prefixes are contiguous index ranges).
    std::vector<std::uint32_t> u_of_s(n_source_seqs);
    std::vector<std::uint8_t> buf(N);
    for (std::size_t s = 0; s < n_source_seqs; ++s) {
        for (std::size_t i = 0; i < N; ++i) buf[i] = static_cast<std::uint8_t>((s >> i) & 1u);
        polar_transform_inplace(buf);  // involution: u = s * G
        std::uint32_t u = 0;
        for (std::size_t i = 0; i < N; ++i) u |= static_cast<std::uint32_t>(buf[i]) << (N - 1 - i);
        u_of_s[s] = u;
    }

    ExactZH out;
    out.z.assign(N, 0.0);
    out.h.assign(N, 0.0);
    std::vector<int> obs(N, 0);
    std::vector<double> table(n_source_seqs);
    bool more = true;
    while (more) {
        std::fill(table.begin(), table.end(), 0.0);
        for (std::size_t s = 0; s < n_source_seqs; ++s) {
            double p = 1.0;
            for (std::size_t i = 0; i < N; ++i) p *= sl.tbl[static_cast<std::size_t>(obs[i])][(s >> i) & 1u];
            table[u_of_s[s]] += p;
        }
        // Fold: level i has 2^i prefix cells; the Z_i and H_i contributions
        // pair the two children of each length-(i-1) prefix.
        std::size_t cells = n_source_seqs;
        for (std::size_t i = N; i >= 1; --i) {
            double zacc = 0.0, hacc = 0.0;
            for (std::size_t p2 = 0; p2 < cells; p2 += 2) {
                const double a = table[p2], b = table[p2 + 1];
                zacc += std::sqrt(a * b);
                const double s = a + b;
                if (a > 0.0 && b > 0.0) hacc += a * std::log2(s / a) + b * std::log2(s / b);
            }
            out.z[i - 1] += 2.0 * zacc;
            out.h[i - 1] += hacc;
            cells /= 2;
            for (std::size_t c = 0; c < cells; ++c) table[c] = table[2 * c] + table[2 * c + 1];
        }
        // Odometer over observation sequences.
        more = false;
        for (std::size_t i = 0; i < N; ++i) {
            if (++obs[i] < sl.obs_size) {
                more = true;
                break;
            }
            obs[i] = 0;
        }
        if (sl.obs_size == 1) more = false;
    }
    for (auto& v : out.z) v = std::min(1.0, std::max(0.0, v));
    return out;
}

// One Monte Carlo pass: sample (s, o) i.i.d. per position, accumulate
// 2*sqrt(p0*p1) of the exact SC posterior at each index.
inline void mc_accumulate(const SingleLetter& sl, int n, long long samples, RngStream& rng,
                          std::vector<double>& sum, std::vector<double>& sumsq) {
    const std::size_t N = std::size_t{1} << n;
    std::vector<double> cell(static_cast<std::size_t>(sl.obs_size) * 2);
    for (int o = 0; o < sl.obs_size; ++o)
        for (int b = 0; b < 2; ++b) cell[static_cast<std::size_t>(o) * 2 + b] = sl.tbl[static_cast<std::size_t>(o)][b];

    ScProcess sc(n);
    std::vector<std::uint8_t> s(N);
    std::vector<MeasurePair> meas(N);
    for (long long t = 0; t < samples; ++t) {
        for (std::size_t i = 0; i < N; ++i) {
            int joint_idx = rng.next_index(std::span<const double>(cell));
            int o = joint_idx / 2;
            s[i] = static_cast<std::uint8_t>(joint_idx & 1);
            meas[i] = sl.tbl[static_cast<std::size_t>(o)];
        }
        auto u = polar_transform(s);
        sc.start(meas);
        for (std::size_t i = 0; i < N; ++i) {
            auto pr = sc.next();
            double zi = 2.0 * std::sqrt(pr[0] * pr[1]);
            sum[i] += zi;
            sumsq[i] += zi * zi;
            sc.fix(u[i]);
        }
    }
}

inline BitChannelStats exact_layer(LayerId layer, const LayeredDistribution& d, const BroadcastChannel& ch,
                                   int n, std::span<const int> receivers) {
    BitChannelStats st;
    st.layer = layer;
    st.n = n;
    st.N = 1 << n;
    st.exact = true;
    auto src = exact_zh_values(source_model(layer, d), n);
    st.z_source = std::move(src.z);
    st.h_source = std::move(src.h);
    for (int j : receivers) {
        auto rec = exact_zh_values(receiver_model(layer, d, ch, j), n);
        st.z_receiver[j] = std::move(rec.z);
        st.h_receiver[j] = std::move(rec.h);
    }
    return st;
}

inline BitChannelStats mc_layer(LayerId layer, const LayeredDistribution& d, const BroadcastChannel& ch,
                                int n, long long samples, RngStream& rng, std::span<const int> receivers) {
    BitChannelStats st;
    st.layer = layer;
    st.n = n;
    st.N = 1 << n;
    st.exact = false;
    st.sample_count = samples;
    const std::size_t N = std::size_t{1} << n;

    auto finish = [&](std::vector<double>& sum, std::vector<double>& sumsq, std::vector<double>& mean,
                      std::vector<double>& se) {
        mean.resize(N);
        se.resize(N);
        for (std::size_t i = 0; i < N; ++i) {
            double m = sum[i] / static_cast<double>(samples);
            double var = std::max(0.0, sumsq[i] / static_cast<double>(samples) - m * m);
            mean[i] = std::min(1.0, std::max(0.0, m));
            se[i] = std::sqrt(var / static_cast<double>(samples));
        }
    };

    {
        std::vector<double> sum(N, 0.0), sumsq(N, 0.0);
        auto sub = rng.derive(1000);
        mc_accumulate(source_model(layer, d), n, samples, sub, sum, sumsq);
        finish(sum, sumsq, st.z_source, st.z_source_se);
    }
    for (int j : receivers) {
        std::vector<double> sum(N, 0.0), sumsq(N, 0.0);
        auto sub = rng.derive(2000 + static_cast<std::uint64_t>(j));
        mc_accumulate(receiver_model(layer, d, ch, j), n, samples, sub, sum, sumsq);
        finish(sum, sumsq, st.z_receiver[j], st.z_receiver_se[j]);
    }
    return st;
}

}  // namespace detail

inline constexpr int kExactStatsMaxN = 3;

// Exact statistics by full enumeration; refuses n > 3 (the enumeration is the
// oracle, not the workhorse).
inline LayerStatsBundle exact_layer_stats(const LayeredDistribution& d, const BroadcastChannel& ch, int n) {
    if (n > kExactStatsMaxN) throw ValidationError("exact_layer_stats: only n <= 3 is enumerable");
    static constexpr int w_rec[] = {1, 2, 3};
    static constexpr int v_rec[] = {1, 3};
    static constexpr int x_rec[] = {1};
    LayerStatsBundle b;
    b.w = detail::exact_layer(LayerId::W, d, ch, n, w_rec);
    b.v = detail::exact_layer(LayerId::V, d, ch, n, v_rec);
    b.x = detail::exact_layer(LayerId::X, d, ch, n, x_rec);
    return b;
}

inline LayerStatsBundle monte_carlo_layer_stats(const LayeredDistribution& d, const BroadcastChannel& ch,
                                                int n, long long samples, RngStream& rng) {
    if (samples < 1000) throw ValidationError("monte_carlo_layer_stats: need at least 1000 samples");
    static constexpr int w_rec[] = {1, 2, 3};
    static constexpr int v_rec[] = {1, 3};
    static constexpr int x_rec[] = {1};
    LayerStatsBundle b;
    auto rw = rng.derive(static_cast<std::uint64_t>(LayerId::W));
    auto rv = rng.derive(static_cast<std::uint64_t>(LayerId::V));
    auto rx = rng.derive(static_cast<std::uint64_t>(LayerId::X));
    b.w = detail::mc_layer(LayerId::W, d, ch, n, samples, rw, w_rec);
    b.v = detail::mc_layer(LayerId::V, d, ch, n, samples, rv, v_rec);
    b.x = detail::mc_layer(LayerId::X, d, ch, n, samples, rx, x_rec);
    return b;
}

}  // namespace pbc
