// Monte Carlo campaigns: per-receiver block error rates vs block length,
// total-variation trend of the encoder's induced law, and rate-region sweeps.
// Everything is driven by explicit seeds; identical config + seeds give
// bit-identical records.
#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pbc/chaining.hpp"
#include "pbc/channel.hpp"
#include "pbc/rate_region.hpp"
#include "pbc/sets.hpp"
#include "pbc/stats.hpp"

namespace pbc {

struct Seeds {
    std::uint64_t stats = 1, frozen = 2, common = 3, experiment = 4;
};

struct ExperimentConfig {
    LayeredDistribution layered;
    BroadcastChannel channel;
    std::optional<RatePair> rates;      // explicit rates, or
    double corner_fraction = 0.0;       // fraction of the region corner (used when rates is empty)
    int k = 2;
    std::vector<int> n_list;
    long long trials = 10000;
    long long mc_samples = 100000;      // bit-channel estimation samples (n > 3)
    long long tv_samples = 100000;
    SelectionMode selection = SelectionMode::Rank;
    double beta = 0.3;
    double rank_margin = 0.0;
    double info_scale = 0.0;  // > 0: size receiver info sets to info_scale * (rate * N)
    Seeds seeds;
    bool auto_backoff = false;
};

inline RatePair resolve_rates(const ExperimentConfig& cfg, const MutualInfoProfile& prof) {
    if (cfg.rates) return *cfg.rates;
    const double r0_corner = std::min(prof.i_w_y2, prof.i_v_y3);
    const double r1_corner = std::min(prof.i_x_y1_given_w, prof.i_v_y3 + prof.i_x_y1_given_v - r0_corner);
    return {cfg.corner_fraction * r0_corner, cfg.corner_fraction * std::max(0.0, r1_corner)};
}

// Builds stats, sets, split and the code instance for one block length.
inline CodeInstance build_instance(const ExperimentConfig& cfg, int n) {
    LayerStatsBundle stats;
    if (n <= kExactStatsMaxN) {
        stats = exact_layer_stats(cfg.layered, cfg.channel, n);
    } else {
        RngStream rs(derive_seed(cfg.seeds.stats, static_cast<std::uint64_t>(n)));
        stats = monte_carlo_layer_stats(cfg.layered, cfg.channel, n, cfg.mc_samples, rs);
    }
    SelectParams params = rank_targets_from_model(cfg.layered, cfg.channel, cfg.rank_margin);
    params.mode = cfg.selection;
    params.beta = cfg.beta;

    auto prof = profile(cfg.layered, cfg.channel);
    RatePair pair0 = resolve_rates(cfg, prof);
    if (cfg.info_scale > 0.0 && cfg.selection == SelectionMode::Rank) {
        // Size the information sets to the carried rates so every selected
        // position sits in the well-polarized head rather than at the
        // asymptotic-fraction boundary.
        const int N = 1 << n;
        RateSplit s0 = pair0.r1 == 0.0 ? RateSplit{0.0, 0.0} : split_private_rate(pair0, prof);
        auto sized = [&](double rate) {
            return std::min(N, static_cast<int>(std::ceil(cfg.info_scale * rate * N)) + 2);
        };
        for (int j : {1, 2, 3}) params.w.info_count[j] = sized(pair0.r0);
        for (int j : {1, 3}) params.v.info_count[j] = sized(s0.r11);
        params.x.info_count[1] = sized(s0.r12);
    }
    auto sets = select_sets(stats, params);

    RatePair pair = pair0;
    // Strict membership, except that an exactly-zero rate component is always
    // admissible (its constraint would otherwise exclude rate pairs on a
    // degenerate axis, e.g. R1 = 0 when the private capacity is zero).
    const double slack = 1e-9;
    const bool ok = pair.r0 >= 0.0 && pair.r1 >= 0.0 &&
                    (pair.r0 == 0.0 || pair.r0 < std::min(prof.i_w_y2, prof.i_v_y3) - slack) &&
                    (pair.r1 == 0.0 || pair.r1 < prof.i_x_y1_given_w - slack) &&
                    (pair.r0 + pair.r1 == 0.0 ||
                     pair.r0 + pair.r1 < prof.i_v_y3 + prof.i_x_y1_given_v - slack);
    if (!ok)
        throw InfeasibleError("rate pair outside the capacity region (R0 < min(I(W;Y2),I(V;Y3)), "
                              "R1 < I(X;Y1|W), R0+R1 < I(V;Y3)+I(X;Y1|V))",
                              "capacity region", 0.0);
    RateSplit split = pair.r1 == 0.0 ? RateSplit{0.0, 0.0} : split_private_rate(pair, prof);

    double r0 = pair.r0;
    if (cfg.auto_backoff) {
        double s = max_feasible_backoff(sets, r0, split, 1 << n, cfg.k);
        if (s < 1.0) {
            r0 *= s;
            split.r11 *= s;
            split.r12 *= s;
        }
    }
    return make_code_instance(n, cfg.k, cfg.layered, cfg.channel, sets, split, r0,
                              derive_seed(cfg.seeds.frozen, static_cast<std::uint64_t>(n)),
                              derive_seed(cfg.seeds.common, static_cast<std::uint64_t>(n)));
}

struct WilsonInterval {
    double lo = 0.0, hi = 0.0;
};

inline WilsonInterval wilson_interval(long long errors, long long trials, double z = 1.96) {
    if (trials <= 0) return {0.0, 0.0};
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(errors) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

struct ReceiverResult {
    long long trials = 0, errors = 0;
    double error_rate = 0.0;
    WilsonInterval wilson;
};

struct ResultRecord {
    int n = 0, N = 0, k = 0;
    std::string case_tag;
    long long public_total = 0, private_total = 0;
    double realized_r0 = 0.0, realized_r1 = 0.0;
    ReceiverResult r1, r2, r3, joint;
    double wall_seconds = 0.0;
};

inline std::vector<std::uint8_t> random_bits(RngStream& rng, long long count) {
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(count));
    for (auto& b : bits) b = static_cast<std::uint8_t>(rng.next_bit());
    return bits;
}

// Per trial: draw messages, encode, transmit each block, run all three
// decoders, score per-receiver and joint errors.
inline ResultRecord run_error_rate_single(const ExperimentConfig& cfg, const CodeInstance& ci) {
    ResultRecord rec;
    rec.n = ci.n;
    rec.N = ci.N;
    rec.k = ci.k;
    rec.case_tag = to_string(ci.layout.tag);
    rec.public_total = ci.public_total;
    rec.private_total = ci.private_total;
    rec.realized_r0 = static_cast<double>(ci.public_total) / (static_cast<double>(ci.k) * ci.N);
    rec.realized_r1 = static_cast<double>(ci.private_total) / (static_cast<double>(ci.k) * ci.N);

    const auto t0 = std::chrono::steady_clock::now();
    for (long long trial = 0; trial < cfg.trials; ++trial) {
        RngStream rng(derive_seed(cfg.seeds.experiment, static_cast<std::uint64_t>(ci.n),
                                  static_cast<std::uint64_t>(trial)));
        auto pub = random_bits(rng, ci.public_total);
        auto priv = random_bits(rng, ci.private_total);
        auto enc = encode_chain(ci, pub, priv);

        std::vector<std::vector<int>> y1(static_cast<std::size_t>(ci.k)), y2(static_cast<std::size_t>(ci.k)),
            y3(static_cast<std::size_t>(ci.k));
        for (int t = 0; t < ci.k; ++t) {
            auto s = transmit(ci.channel, enc.codewords[static_cast<std::size_t>(t)], rng);
            y1[static_cast<std::size_t>(t)] = std::move(s.y1);
            y2[static_cast<std::size_t>(t)] = std::move(s.y2);
            y3[static_cast<std::size_t>(t)] = std::move(s.y3);
        }

        auto [pub1, priv1] = decode_receiver1(ci, y1);
        auto pub2 = decode_receiver2(ci, y2);
        auto pub3 = decode_receiver3(ci, y3);

        const bool e1 = pub1 != pub || priv1 != priv;
        const bool e2 = pub2 != pub;
        const bool e3 = pub3 != pub;
        rec.r1.errors += e1;
        rec.r2.errors += e2;
        rec.r3.errors += e3;
        rec.joint.errors += (e1 || e2 || e3);
    }
    const auto t1 = std::chrono::steady_clock::now();
    rec.wall_seconds = std::chrono::duration<double>(t1 - t0).count();

    for (ReceiverResult* r : {&rec.r1, &rec.r2, &rec.r3, &rec.joint}) {
        r->trials = cfg.trials;
        r->error_rate = static_cast<double>(r->errors) / static_cast<double>(cfg.trials);
        r->wilson = wilson_interval(r->errors, cfg.trials);
    }
    return rec;
}

inline std::vector<ResultRecord> run_error_rate(const ExperimentConfig& cfg) {
    std::vector<ResultRecord> out;
    for (int n : cfg.n_list) out.push_back(run_error_rate_single(cfg, build_instance(cfg, n)));
    return out;
}

// ---------------------------------------------------------------------------
// Total-variation trend

// Draws one ensemble block (all high-entropy positions uniform, unpolarized
// positions through fresh randomness) and returns (w, v, x).
inline BlockVectors sample_ensemble_block(const BitChannelSets& sets, const LayeredDistribution& layered,
                                          std::uint64_t seed, ScProcess& sc) {
    RngStream rng(seed);
    const int N = sets.N;
    CommonRandomness cr{rng.next_u64()};
    BlockVectors blk;
    auto assign_for = [&](const LayerSets& ls) {
        std::vector<std::int8_t> a(static_cast<std::size_t>(N), -1);
        for (int i : ls.h) a[static_cast<std::size_t>(i)] = static_cast<std::int8_t>(rng.next_bit());
        return a;
    };
    blk.u_w = sc_encode_layer(LayerId::W, {}, assign_for(sets.w), sets, layered, cr, 0, &sc);
    blk.w = polar_transform(blk.u_w);
    blk.u_v = sc_encode_layer(LayerId::V, blk.w, assign_for(sets.v), sets, layered, cr, 0, &sc);
    blk.v = polar_transform(blk.u_v);
    blk.u_x = sc_encode_layer(LayerId::X, blk.v, assign_for(sets.x), sets, layered, cr, 0, &sc);
    blk.x = polar_transform(blk.u_x);
    return blk;
}

struct TvPoint {
    int n = 0;
    double tv_estimate = 0.0;   // single-letter (W,V,X) empirical law vs p(w)p(v|w)p(x|v)
    double tv_std_error = 0.0;
    double exact_block_tv = -1.0;  // block-level TV by enumeration; -1 when n > 3
};

// Exact block-level TV between the ensemble-average encoder law Q and the
// i.i.d. law P, by enumerating all (u_w, u_v, u_x) triples (n <= 3).
inline double exact_block_tv(const BitChannelSets& sets, const LayeredDistribution& layered, int n) {
    if (n > kExactStatsMaxN) throw ValidationError("exact_block_tv: n too large for enumeration");
    const std::size_t N = std::size_t{1} << n;
    const std::size_t M = std::size_t{1} << N;

    // Per-layer tables over (context sequence, u sequence): Q uses the
    // encoder rules (uniform on H, argmax on L, true conditional on R); P is
    // the i.i.d. push-forward.
    auto layer_tables = [&](LayerId layer, std::vector<double>& q, std::vector<double>& p, std::size_t ctx_count) {
        SingleLetter model = source_model(layer, layered);
        const LayerSets& ls = sets.layer(layer);
        std::vector<std::uint8_t> cls(N, 2);
        for (int i : ls.h) cls[static_cast<std::size_t>(i)] = 0;
        for (int i : ls.l) cls[static_cast<std::size_t>(i)] = 1;
        q.assign(ctx_count * M, 0.0);
        p.assign(ctx_count * M, 0.0);
        ScProcess sc(n);
        std::vector<std::uint8_t> ctx(N, 0), s(N);
        for (std::size_t c = 0; c < ctx_count; ++c) {
            for (std::size_t i = 0; i < N; ++i) ctx[i] = static_cast<std::uint8_t>((c >> i) & 1u);
            auto obs = source_observations(layer, ctx, N);
            auto meas = build_measures(model, obs);
            for (std::size_t ui = 0; ui < M; ++ui) {
                sc.start(meas);
                double qp = 1.0, pp = 1.0;
                for (std::size_t i = 0; i < N; ++i) {
                    const int bit = static_cast<int>((ui >> i) & 1u);
                    auto pr = sc.next();
                    pp *= pr[static_cast<std::size_t>(bit)];
                    if (cls[i] == 0) {
                        qp *= 0.5;
                    } else if (cls[i] == 1) {
                        qp *= (pr[1] > pr[0] ? 1 : 0) == bit ? 1.0 : 0.0;
                    } else {
                        qp *= pr[static_cast<std::size_t>(bit)];
                    }
                    sc.fix(bit);
                }
                q[c * M + ui] = qp;
                p[c * M + ui] = pp;
            }
        }
    };

    std::vector<double> qw, pw, qv, pv, qx, px;
    layer_tables(LayerId::W, qw, pw, 1);
    layer_tables(LayerId::V, qv, pv, M);
    layer_tables(LayerId::X, qx, px, M);

    // Context of the V layer is w = u_w * G; of the X layer, v = u_v * G.
    std::vector<std::size_t> transform_of(M);
    std::vector<std::uint8_t> buf(N);
    for (std::size_t ui = 0; ui < M; ++ui) {
        for (std::size_t i = 0; i < N; ++i) buf[i] = static_cast<std::uint8_t>((ui >> i) & 1u);
        polar_transform_inplace(buf);
        std::size_t t = 0;
        for (std::size_t i = 0; i < N; ++i) t |= static_cast<std::size_t>(buf[i]) << i;
        transform_of[ui] = t;
    }

    double tv = 0.0;
    for (std::size_t uw = 0; uw < M; ++uw) {
        const std::size_t wseq = transform_of[uw];
        for (std::size_t uv = 0; uv < M; ++uv) {
            const std::size_t vseq = transform_of[uv];
            const double qwv = qw[uw] * qv[wseq * M + uv];
            const double pwv = pw[uw] * pv[wseq * M + uv];
            if (qwv == 0.0 && pwv == 0.0) continue;
            for (std::size_t ux = 0; ux < M; ++ux)
                tv += std::abs(qwv * qx[vseq * M + ux] - pwv * px[vseq * M + ux]);
        }
    }
    return 0.5 * tv;
}

inline std::vector<TvPoint> run_tv_trend(const ExperimentConfig& cfg) {
    std::vector<TvPoint> out;
    for (int n : cfg.n_list) {
        LayerStatsBundle stats;
        if (n <= kExactStatsMaxN) {
            stats = exact_layer_stats(cfg.layered, cfg.channel, n);
        } else {
            RngStream rs(derive_seed(cfg.seeds.stats, static_cast<std::uint64_t>(n)));
            stats = monte_carlo_layer_stats(cfg.layered, cfg.channel, n, cfg.mc_samples, rs);
        }
        SelectParams params = rank_targets_from_model(cfg.layered, cfg.channel, cfg.rank_margin);
        params.mode = cfg.selection;
        params.beta = cfg.beta;
        auto sets = select_sets(stats, params);

        const std::size_t N = std::size_t{1} << n;
        std::array<double, 8> target{};
        for (int w = 0; w < 2; ++w)
            for (int v = 0; v < 2; ++v)
                for (int x = 0; x < 2; ++x)
                    target[static_cast<std::size_t>(w * 4 + v * 2 + x)] = cfg.layered.joint(w, v, x);

        std::array<double, 8> counts{};
        ScProcess sc(n);
        for (long long s = 0; s < cfg.tv_samples; ++s) {
            auto blk = sample_ensemble_block(
                sets, cfg.layered,
                derive_seed(cfg.seeds.experiment, 0x7e0000ull + static_cast<std::uint64_t>(n),
                            static_cast<std::uint64_t>(s)),
                sc);
            for (std::size_t i = 0; i < N; ++i)
                counts[static_cast<std::size_t>(blk.w[i] * 4 + blk.v[i] * 2 + blk.x[i])] += 1.0;
        }
        const double total = static_cast<double>(cfg.tv_samples) * static_cast<double>(N);
        TvPoint pt;
        pt.n = n;
        double var = 0.0;
        for (std::size_t c = 0; c < 8; ++c) {
            const double ph = counts[c] / total;
            pt.tv_estimate += 0.5 * std::abs(ph - target[c]);
            var += 0.25 * ph * (1.0 - ph) / total;
        }
        pt.tv_std_error = std::sqrt(var);
        if (n <= kExactStatsMaxN) pt.exact_block_tv = exact_block_tv(sets, cfg.layered, n);
        out.push_back(pt);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Rate-region sweep

struct RegionPoint {
    double r0 = 0.0, r1 = 0.0;
    bool inside = true;
};

// Grids the binary auxiliary parameters, traces each distribution's frontier,
// and returns the Pareto envelope of the union.
inline std::vector<RegionPoint> sweep_region(const BroadcastChannel& ch, int resolution) {
    if (resolution < 2) throw ValidationError("sweep_region: resolution must be >= 2");
    std::vector<double> grid(static_cast<std::size_t>(resolution));
    for (int i = 0; i < resolution; ++i) grid[static_cast<std::size_t>(i)] = static_cast<double>(i) / (resolution - 1);

    std::vector<RegionPoint> cloud;
    for (double pw1 : grid)
        for (double pv0 : grid)
            for (double pv1 : grid)
                for (double px0 : grid)
                    for (double px1 : grid) {
                        LayeredDistribution d(Pmf({1.0 - pw1, pw1}), binary_kernel(pv0, pv1),
                                              binary_kernel(px0, px1));
                        auto prof = profile(d, ch);
                        const double r0max = std::min(prof.i_w_y2, prof.i_v_y3);
                        for (int gi = 0; gi < resolution; ++gi) {
                            const double r0 = r0max * grid[static_cast<std::size_t>(gi)];
                            const double r1 =
                                std::min(prof.i_x_y1_given_w, prof.i_v_y3 + prof.i_x_y1_given_v - r0);
                            if (r1 < 0.0) continue;
                            cloud.push_back({r0, r1, true});
                        }
                    }

    // Pareto envelope: keep points not dominated by any other.
    std::sort(cloud.begin(), cloud.end(), [](const RegionPoint& a, const RegionPoint& b) {
        return a.r0 != b.r0 ? a.r0 > b.r0 : a.r1 > b.r1;
    });
    std::vector<RegionPoint> frontier;
    double best_r1 = -1.0;
    for (const auto& p : cloud) {
        if (p.r1 > best_r1 + 1e-12) {
            frontier.push_back(p);
            best_r1 = p.r1;
        }
    }
    std::reverse(frontier.begin(), frontier.end());
    return frontier;
}

}  // namespace pbc
