// Property-verification suites shared by the CLI `verify` subcommand and the
// acceptance tests: distribution/channel identities, the entropy-Bhattacharyya
// sandwich on exactly computed bit-channels, rate-region projection
// equivalence, the constructive rate split against a grid-search oracle, and
// exact-vs-Monte-Carlo agreement of the bit-channel statistics.
#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "pbc/chaining.hpp"
#include "pbc/harness.hpp"
#include "pbc/rate_region.hpp"
#include "pbc/sets.hpp"
#include "pbc/stats.hpp"

namespace pbc {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

// Nondegenerate random models for property runs.
inline LayeredDistribution random_layered(RngStream& rng) {
    auto u = [&] { return 0.05 + 0.9 * rng.next_unit(); };
    double a = u();
    return LayeredDistribution(Pmf({1.0 - a, a}), binary_kernel(u(), u()), binary_kernel(u(), u()));
}

inline BroadcastChannel random_channel(RngStream& rng) {
    auto u = [&] { return 0.05 + 0.9 * rng.next_unit(); };
    auto c1 = binary_kernel(u(), u());
    auto c3 = binary_kernel(u(), u());
    auto c2 = bsc_kernel(0.02 + 0.3 * rng.next_unit());
    return make_product_channel(c1, c3, c2);
}

// Fixed oracle configurations: exactly enumerable, covering symmetric and
// asymmetric kernels, an erasure output alphabet, and degenerate layers.
struct OracleCombo {
    std::string name;
    LayeredDistribution layered;
    BroadcastChannel channel;
    int n;
};

inline std::vector<OracleCombo> oracle_combos() {
    std::vector<OracleCombo> out;
    out.push_back({"bsc-triple",
                   LayeredDistribution(Pmf({0.5, 0.5}), bsc_kernel(0.11), bsc_kernel(0.05)),
                   make_product_channel(bsc_kernel(0.1), bsc_kernel(0.15), bsc_kernel(0.05)), 3});
    out.push_back({"bec-y1",
                   LayeredDistribution(Pmf({0.6, 0.4}), bsc_kernel(0.25), bsc_kernel(0.1)),
                   make_product_channel(bec_kernel(0.3), bsc_kernel(0.2), symmetric_kernel(3, 0.1)), 2});
    out.push_back({"identity-channel",
                   LayeredDistribution(Pmf({0.5, 0.5}), bsc_kernel(0.011), identity_kernel(2)),
                   make_product_channel(identity_kernel(2), identity_kernel(2), identity_kernel(2)), 3});
    out.push_back({"asymmetric",
                   LayeredDistribution(Pmf({0.7, 0.3}), binary_kernel(0.2, 0.85), binary_kernel(0.05, 0.8)),
                   make_product_channel(binary_kernel(0.1, 0.3), bsc_kernel(0.25), bsc_kernel(0.1)), 3});
    out.push_back({"deterministic-layers",
                   LayeredDistribution(Pmf({0.5, 0.5}), identity_kernel(2), identity_kernel(2)),
                   make_product_channel(bsc_kernel(0.05), bsc_kernel(0.05), bsc_kernel(0.05)), 3});
    return out;
}

// TV is unchanged by extending both laws through a shared kernel.
inline CheckResult check_tv_extension(int trials, std::uint64_t seed) {
    RngStream rng(seed);
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        auto draw_pmf = [&](int size) {
            std::vector<double> m(static_cast<std::size_t>(size));
            double s = 0.0;
            for (auto& v : m) s += (v = 0.01 + rng.next_unit());
            for (auto& v : m) v /= s;
            // exact renormalization so construction validation passes
            double s2 = 0.0;
            for (double v : m) s2 += v;
            m.back() += 1.0 - s2;
            return Pmf(m);
        };
        auto p = draw_pmf(2);
        auto q = draw_pmf(2);
        std::vector<double> rows;
        for (int r = 0; r < 2; ++r) {
            std::vector<double> row(4);
            double s = 0.0;
            for (auto& v : row) s += (v = 0.01 + rng.next_unit());
            for (auto& v : row) v /= s;
            double s2 = 0.0;
            for (double v : row) s2 += v;
            row.back() += 1.0 - s2;
            rows.insert(rows.end(), row.begin(), row.end());
        }
        ConditionalPmf k(2, 4, rows);
        auto [lhs, rhs] = tv_channel_extension_identity(p, q, k);
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    std::ostringstream os;
    os << "max |joint TV - input TV| = " << worst << " over " << trials << " triples";
    return {"tv-extension-identity", worst <= 1e-12, os.str()};
}

// Z^2 <= H <= Z for every exactly computed bit-channel across the oracle
// configurations.
inline CheckResult check_entropy_bhattacharyya(double tol = 1e-9) {
    double worst = 0.0;
    long long count = 0;
    for (const auto& combo : oracle_combos()) {
        auto stats = exact_layer_stats(combo.layered, combo.channel, combo.n);
        auto scan = [&](const BitChannelStats& st) {
            auto scan_pair = [&](const std::vector<double>& z, const std::vector<double>& h) {
                for (std::size_t i = 0; i < z.size(); ++i) {
                    worst = std::max(worst, z[i] * z[i] - h[i]);
                    worst = std::max(worst, h[i] - z[i]);
                    ++count;
                }
            };
            scan_pair(st.z_source, st.h_source);
            for (const auto& [j, zr] : st.z_receiver) scan_pair(zr, st.h_receiver.at(j));
        };
        scan(stats.w);
        scan(stats.v);
        scan(stats.x);
    }
    std::ostringstream os;
    os << "max sandwich violation " << worst << " over " << count << " bit-channels";
    return {"entropy-bhattacharyya-sandwich", worst <= tol, os.str()};
}

inline CheckResult check_fm_equivalence(int profiles, int samples_per_profile, std::uint64_t seed) {
    RngStream rng(seed);
    long long sampled = 0, checked = 0, failures = 0;
    for (int p = 0; p < profiles; ++p) {
        auto layered = random_layered(rng);
        auto channel = random_channel(rng);
        auto prof = profile(layered, channel);
        auto sub = rng.derive(static_cast<std::uint64_t>(p) + 17);
        auto rep = fm_equivalence_check(prof, samples_per_profile, sub);
        sampled += 2LL * samples_per_profile;
        checked += rep.pairs_checked + rep.triples_checked;
        failures += rep.pairs_without_split + rep.triples_outside;
    }
    std::ostringstream os;
    os << failures << " counterexamples; " << sampled << " sampled points, " << checked
       << " inside a region (" << profiles << " profiles)";
    return {"region-projection-equivalence", failures == 0, os.str()};
}

// Uniform draw from the capacity region with a floor on the analytic split
// window so the fixed-step grid oracle is a valid referee.
inline std::optional<RatePair> sample_interior_pair(const MutualInfoProfile& prof, RngStream& rng,
                                                    double slack, double window_floor) {
    const double r0_box = std::min(prof.i_w_y2, prof.i_v_y3);
    const double r1_box = prof.i_x_y1_given_w;
    for (int attempt = 0; attempt < 200; ++attempt) {
        RatePair pair{rng.next_unit() * r0_box, rng.next_unit() * r1_box};
        if (!in_capacity_region(pair, prof, slack)) continue;
        const double lo = std::max(0.0, pair.r1 - prof.i_x_y1_given_v);
        const double hi = std::min({pair.r1, prof.i_v_y3 - pair.r0, prof.i_v_y1_given_w});
        if (hi - lo < window_floor) continue;
        return pair;
    }
    return std::nullopt;
}

inline CheckResult check_rate_split(int draws, std::uint64_t seed, double grid_step = 1e-3) {
    RngStream rng(seed);
    long long done = 0, bad = 0;
    std::string first_bad;
    while (done < draws) {
        auto layered = random_layered(rng);
        auto channel = random_channel(rng);
        auto prof = profile(layered, channel);
        auto pair = sample_interior_pair(prof, rng, 1e-9, 10.0 * grid_step);
        if (!pair) continue;
        ++done;

        bool ok = true;
        std::string why;
        try {
            auto split = split_private_rate(*pair, prof);
            if (std::abs(split.r11 + split.r12 - pair->r1) > 1e-12) {
                ok = false;
                why = "split does not sum to R1";
            }
            if (!(split.r11 < prof.i_v_y1_given_w && split.r12 < prof.i_x_y1_given_v &&
                  pair->r0 + split.r11 < prof.i_v_y3)) {
                ok = false;
                why = "split identities violated";
            }
            if (!in_split_region(pair->r0, split.r11, split.r12, prof)) {
                ok = false;
                why = "split outside the five-inequality region";
            }
        } catch (const Error& e) {
            ok = false;
            why = e.what();
        }
        // Grid-search oracle over r11 for the three identities.
        bool grid_found = false;
        for (double r11 = 0.0; r11 <= pair->r1 + 1e-15 && !grid_found; r11 += grid_step) {
            double r12 = pair->r1 - r11;
            if (r12 < 0.0) break;
            grid_found = r11 < prof.i_v_y1_given_w && r12 < prof.i_x_y1_given_v &&
                         pair->r0 + r11 < prof.i_v_y3;
        }
        if (!grid_found) {
            ok = false;
            why = "grid oracle found no split where the construction claims one";
        }
        if (!ok) {
            ++bad;
            if (first_bad.empty()) first_bad = why;
        }
    }
    std::ostringstream os;
    os << bad << " failures over " << done << " interior draws";
    if (!first_bad.empty()) os << " (first: " << first_bad << ")";
    return {"constructive-rate-split", bad == 0, os.str()};
}

// Monte Carlo Z estimates agree with the exact enumeration at the 3-standard-
// error level per index. With hundreds of simultaneous indices an occasional
// 3-sigma fluctuation is expected, so the familywise pass requires every
// index within 4 SE and at least 99% within 3 SE. Positions with a
// deterministic posterior have zero sampling variance; a 1e-6 absolute floor
// covers the floating-point accumulation difference between the enumeration
// and the engine there.
inline CheckResult check_exact_vs_mc(long long samples, std::uint64_t seed) {
    double worst_se_ratio = 0.0;
    long long indices = 0, beyond3 = 0;
    for (const auto& combo : oracle_combos()) {
        auto exact = exact_layer_stats(combo.layered, combo.channel, combo.n);
        RngStream rng(derive_seed(seed, std::hash<std::string>{}(combo.name)));
        auto mc = monte_carlo_layer_stats(combo.layered, combo.channel, combo.n, samples, rng);
        auto compare = [&](const BitChannelStats& ex, const BitChannelStats& est) {
            auto cmp = [&](const std::vector<double>& ze, const std::vector<double>& zm,
                           const std::vector<double>& se) {
                for (std::size_t i = 0; i < ze.size(); ++i) {
                    const double sigmas = std::abs(ze[i] - zm[i]) / (se[i] + 1e-6 / 3.0);
                    worst_se_ratio = std::max(worst_se_ratio, sigmas);
                    beyond3 += sigmas > 3.0;
                    ++indices;
                }
            };
            cmp(ex.z_source, est.z_source, est.z_source_se);
            for (const auto& [j, zr] : ex.z_receiver) cmp(zr, est.z_receiver.at(j), est.z_receiver_se.at(j));
        };
        compare(exact.w, mc.w);
        compare(exact.v, mc.v);
        compare(exact.x, mc.x);
    }
    const long long allowed3 = std::max<long long>(1, indices / 100);
    std::ostringstream os;
    os << "worst deviation " << worst_se_ratio << " SE, " << beyond3 << "/" << indices
       << " indices beyond 3 SE (allowed " << allowed3 << ", hard cap 4 SE)";
    return {"exact-vs-monte-carlo", worst_se_ratio <= 4.0 && beyond3 <= allowed3, os.str()};
}

inline std::vector<CheckResult> run_verification(int tv_trials, int fm_profiles, int fm_samples,
                                                 int split_draws, long long mc_samples, std::uint64_t seed) {
    std::vector<CheckResult> out;
    out.push_back(check_tv_extension(tv_trials, derive_seed(seed, 1)));
    out.push_back(check_entropy_bhattacharyya());
    out.push_back(check_fm_equivalence(fm_profiles, fm_samples, derive_seed(seed, 2)));
    out.push_back(check_rate_split(split_draws, derive_seed(seed, 3)));
    out.push_back(check_exact_vs_mc(mc_samples, derive_seed(seed, 4)));
    return out;
}

}  // namespace pbc
