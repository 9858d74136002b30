// Polar transform (natural order, G = F^{(x)n}, F = [[1,0],[1,1]]) and an
// exact successive-cancellation engine over per-position probability
// measures.
//
// The engine works on the factorization x = u * (F^{(x)(n-1)} (x) F): writing
// u in consecutive pairs (u_{2q}, u_{2q+1}), the vectors a_q = u_{2q} xor
// u_{2q+1} and b_q = u_{2q+1} feed two half-size transforms whose outputs
// land on the even / odd channel positions respectively. Each tree node
// therefore serves its bits in consecutive pairs: an f-combine for the first
// bit of a pair, a g-combine once it is fixed, and after both bits are fixed
// the pair (a_q, b_q) is pushed into the children. All produced pairs are
// normalized, so only conditional probabilities leave the engine and no
// underflow accumulates across levels.
#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "pbc/channel.hpp"
#include "pbc/prob.hpp"

namespace pbc {

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// x = u * G_N over GF(2), in place. Involution: applying it twice is the identity.
inline void polar_transform_inplace(std::vector<std::uint8_t>& u) {
    if (!is_power_of_two(u.size())) throw ValidationError("polar_transform: length not a power of two");
    const std::size_t n = u.size();
    for (std::size_t s = 1; s < n; s <<= 1)
        for (std::size_t i = 0; i < n; ++i)
            if (!(i & s)) u[i] ^= u[i + s];
}

inline std::vector<std::uint8_t> polar_transform(std::vector<std::uint8_t> u) {
    polar_transform_inplace(u);
    return u;
}

using MeasurePair = std::array<double, 2>;

// Deterministic argmax over a normalized pair; anything within the tolerance
// counts as a tie and resolves to bit 0, so independently computed posteriors
// that differ only by summation order make the same decision.
inline constexpr double kArgmaxTieTol = 1e-9;

inline int argmax_bit(const MeasurePair& p) { return p[1] > p[0] + kArgmaxTieTol ? 1 : 0; }

class ScProcess {
  public:
    explicit ScProcess(int n) : n_(n), N_(std::size_t{1} << n) {
        meas_.resize(static_cast<std::size_t>(n_) + 1);
        bits_.resize(static_cast<std::size_t>(n_) + 1);
        phase_.resize(static_cast<std::size_t>(n_) + 1);
        cache_a_.resize(static_cast<std::size_t>(n_) + 1);
        cache_b_.resize(static_cast<std::size_t>(n_) + 1);
        for (int d = 0; d <= n_; ++d) {
            meas_[static_cast<std::size_t>(d)].resize(N_);
            bits_[static_cast<std::size_t>(d)].resize(N_);
            phase_[static_cast<std::size_t>(d)].assign(std::size_t{1} << d, 0);
            cache_a_[static_cast<std::size_t>(d)].resize(std::size_t{1} << d);
            cache_b_[static_cast<std::size_t>(d)].resize(std::size_t{1} << d);
        }
    }

    int n() const { return n_; }
    std::size_t block_length() const { return N_; }
    std::size_t position() const { return pos_; }
    bool saw_zero_measure() const { return saw_zero_; }

    // Loads per-position joint measures (P(S=0,O=o_i), P(S=1,O=o_i)) and
    // resets the pass.
    void start(std::span<const MeasurePair> channel_measures) {
        if (channel_measures.size() != N_) throw ValidationError("ScProcess: measure count != N");
        std::copy(channel_measures.begin(), channel_measures.end(), meas_[0].begin());
        // Pre-split measures: child A takes even local positions, child B odd.
        for (int d = 0; d < n_; ++d) {
            const std::size_t len = N_ >> d;
            const auto& src = meas_[static_cast<std::size_t>(d)];
            auto& dst = meas_[static_cast<std::size_t>(d) + 1];
            for (std::size_t node = 0; node < (std::size_t{1} << d); ++node) {
                const std::size_t base = node * len;
                for (std::size_t q = 0; q < len / 2; ++q) {
                    dst[base + q] = src[base + 2 * q];
                    dst[base + len / 2 + q] = src[base + 2 * q + 1];
                }
            }
        }
        for (int d = 0; d <= n_; ++d)
            std::fill(phase_[static_cast<std::size_t>(d)].begin(), phase_[static_cast<std::size_t>(d)].end(), 0);
        pos_ = 0;
        saw_zero_ = false;
    }

    // Normalized conditional of the current bit given everything fixed so far.
    MeasurePair next() { return pair_for(0, 0); }

    void fix(int bit) {
        fix_in(0, 0, static_cast<std::uint8_t>(bit & 1));
        ++pos_;
    }

  private:
    MeasurePair normalize(MeasurePair m) {
        const double s = m[0] + m[1];
        if (!(s > 0.0)) {
            saw_zero_ = true;
            return {0.5, 0.5};
        }
        return {m[0] / s, m[1] / s};
    }

    MeasurePair pair_for(int d, std::size_t node) {
        const std::size_t len = N_ >> d;
        if (len == 1) return normalize(meas_[static_cast<std::size_t>(d)][node]);
        const int p = phase_[static_cast<std::size_t>(d)][node];
        auto& ca = cache_a_[static_cast<std::size_t>(d)][node];
        auto& cb = cache_b_[static_cast<std::size_t>(d)][node];
        if ((p & 1) == 0) {
            ca = pair_for(d + 1, 2 * node);
            cb = pair_for(d + 1, 2 * node + 1);
            return normalize({ca[0] * cb[0] + ca[1] * cb[1], ca[1] * cb[0] + ca[0] * cb[1]});
        }
        const std::uint8_t prev = bits_[static_cast<std::size_t>(d)][node * len + static_cast<std::size_t>(p) - 1];
        return normalize({ca[prev] * cb[0], ca[prev ^ 1] * cb[1]});
    }

    void fix_in(int d, std::size_t node, std::uint8_t bit) {
        const std::size_t len = N_ >> d;
        const int p = phase_[static_cast<std::size_t>(d)][node]++;
        bits_[static_cast<std::size_t>(d)][node * len + static_cast<std::size_t>(p)] = bit;
        if (len == 1) return;
        if (p & 1) {
            const std::uint8_t first = bits_[static_cast<std::size_t>(d)][node * len + static_cast<std::size_t>(p) - 1];
            fix_in(d + 1, 2 * node, first ^ bit);
            fix_in(d + 1, 2 * node + 1, bit);
        }
    }

    int n_;
    std::size_t N_;
    std::vector<std::vector<MeasurePair>> meas_;
    std::vector<std::vector<std::uint8_t>> bits_;
    std::vector<std::vector<int>> phase_;
    std::vector<std::vector<MeasurePair>> cache_a_, cache_b_;
    std::size_t pos_ = 0;
    bool saw_zero_ = false;
};

// Single-letter joint of one coding layer: tbl[obs] = (P(S=0,O=obs), P(S=1,O=obs)).
// The observation folds together everything the corresponding encoder/decoder
// pass conditions on per position (context symbol and/or channel output).
struct SingleLetter {
    int obs_size = 1;
    std::vector<MeasurePair> tbl;

    MeasurePair measure(int obs) const { return tbl[static_cast<std::size_t>(obs)]; }
};

enum class LayerId : int { W = 0, V = 1, X = 2 };

// Source-side models: W has no observation, V conditions on w, X on v.
inline SingleLetter source_model(LayerId layer, const LayeredDistribution& d) {
    SingleLetter sl;
    switch (layer) {
        case LayerId::W:
            sl.obs_size = 1;
            sl.tbl = {{d.pw[0], d.pw[1]}};
            break;
        case LayerId::V: {
            sl.obs_size = 2;
            sl.tbl.resize(2);
            for (int w = 0; w < 2; ++w) sl.tbl[w] = {d.pw[w] * d.pv_given_w.at(w, 0), d.pw[w] * d.pv_given_w.at(w, 1)};
            break;
        }
        case LayerId::X: {
            sl.obs_size = 2;
            sl.tbl.resize(2);
            auto pv = d.pv();
            for (int v = 0; v < 2; ++v) sl.tbl[v] = {pv[v] * d.px_given_v.at(v, 0), pv[v] * d.px_given_v.at(v, 1)};
            break;
        }
    }
    return sl;
}

// Receiver-side models: the observation additionally includes Y_j. Index
// convention: W layer obs = y; V layer obs = w*|Y|+y; X layer obs = v*|Y|+y.
inline SingleLetter receiver_model(LayerId layer, const LayeredDistribution& d, const BroadcastChannel& ch,
                                   int receiver) {
    auto ky = ch.receiver_kernel(receiver);
    const int ys = ky.output_size();
    SingleLetter sl;
    switch (layer) {
        case LayerId::W: {
            sl.obs_size = ys;
            sl.tbl.assign(static_cast<std::size_t>(ys), {0.0, 0.0});
            for (int w = 0; w < 2; ++w)
                for (int v = 0; v < 2; ++v)
                    for (int x = 0; x < 2; ++x)
                        for (int y = 0; y < ys; ++y)
                            sl.tbl[static_cast<std::size_t>(y)][w] +=
                                d.pw[w] * d.pv_given_w.at(w, v) * d.px_given_v.at(v, x) * ky.at(x, y);
            break;
        }
        case LayerId::V: {
            sl.obs_size = 2 * ys;
            sl.tbl.assign(static_cast<std::size_t>(2 * ys), {0.0, 0.0});
            for (int w = 0; w < 2; ++w)
                for (int v = 0; v < 2; ++v)
                    for (int x = 0; x < 2; ++x)
                        for (int y = 0; y < ys; ++y)
                            sl.tbl[static_cast<std::size_t>(w * ys + y)][v] +=
                                d.pw[w] * d.pv_given_w.at(w, v) * d.px_given_v.at(v, x) * ky.at(x, y);
            break;
        }
        case LayerId::X: {
            sl.obs_size = 2 * ys;
            sl.tbl.assign(static_cast<std::size_t>(2 * ys), {0.0, 0.0});
            auto pv = d.pv();
            for (int v = 0; v < 2; ++v)
                for (int x = 0; x < 2; ++x)
                    for (int y = 0; y < ys; ++y)
                        sl.tbl[static_cast<std::size_t>(v * ys + y)][x] += pv[v] * d.px_given_v.at(v, x) * ky.at(x, y);
            break;
        }
    }
    return sl;
}

// Per-position observation indices for one block.
inline std::vector<int> source_observations(LayerId layer, std::span<const std::uint8_t> context, std::size_t N) {
    std::vector<int> obs(N, 0);
    if (layer != LayerId::W)
        for (std::size_t i = 0; i < N; ++i) obs[i] = context[i];
    return obs;
}

inline std::vector<int> receiver_observations(LayerId layer, std::span<const std::uint8_t> context,
                                              std::span<const int> y, int y_size) {
    std::vector<int> obs(y.size());
    for (std::size_t i = 0; i < y.size(); ++i)
        obs[i] = layer == LayerId::W ? y[i] : context[i] * y_size + y[i];
    return obs;
}

inline std::vector<MeasurePair> build_measures(const SingleLetter& sl, std::span<const int> obs) {
    std::vector<MeasurePair> m(obs.size());
    for (std::size_t i = 0; i < obs.size(); ++i) m[i] = sl.measure(obs[i]);
    return m;
}

}  // namespace pbc
