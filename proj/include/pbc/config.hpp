// Experiment configuration document: versioned JSON with channel,
// distribution, rates, code and experiment sections. Unknown keys are
// rejected so typos fail fast instead of silently running defaults.
#pragma once

#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "pbc/harness.hpp"
#include "pbc/serialize.hpp"

namespace pbc {

namespace detail {

inline void reject_unknown(const json& j, std::initializer_list<const char*> allowed,
                           const std::string& section) {
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) ok = true;
        if (!ok) throw ValidationError("config: unknown key \"" + key + "\" in " + section);
    }
}

// Kernel spec: "bsc 0.05" | "bec 0.1" | "identity" | explicit row matrix.
inline ConditionalPmf parse_kernel(const json& j, const std::string& where) {
    if (j.is_string()) {
        std::istringstream is(j.get<std::string>());
        std::string kind;
        is >> kind;
        if (kind == "identity") return identity_kernel(2);
        double eps = 0.0;
        if (!(is >> eps)) throw ValidationError("config: missing parameter in " + where);
        if (kind == "bsc") return bsc_kernel(eps);
        if (kind == "bec") return bec_kernel(eps);
        throw ValidationError("config: unknown kernel shorthand \"" + kind + "\" in " + where);
    }
    return conditional_from_json(j);
}

}  // namespace detail

struct ConfigDocument {
    ExperimentConfig experiment;
    int region_resolution = 5;
};

inline ConfigDocument parse_config(const json& j) {
    detail::reject_unknown(j, {"version", "channel", "distribution", "rates", "code", "experiment"}, "root");
    if (!j.contains("version")) throw ValidationError("config: missing version");
    if (j.at("version").get<int>() != kFormatVersion) throw ValidationError("config: unsupported version");

    const auto& jc = j.at("channel");
    detail::reject_unknown(jc, {"y1", "y3", "y2_given_y1"}, "channel");
    auto c1 = detail::parse_kernel(jc.at("y1"), "channel.y1");
    auto c3 = detail::parse_kernel(jc.at("y3"), "channel.y3");
    auto c2 = detail::parse_kernel(jc.at("y2_given_y1"), "channel.y2_given_y1");
    if (c2.input_size() != c1.output_size())
        throw ValidationError("config: y2_given_y1 input alphabet must match y1 alphabet");
    BroadcastChannel channel = make_product_channel(c1, c3, c2);

    const auto& jd = j.at("distribution");
    detail::reject_unknown(jd, {"p_w1", "p_v1_given_w", "p_x1_given_v"}, "distribution");
    double pw1 = jd.at("p_w1").get<double>();
    auto pv = jd.at("p_v1_given_w").get<std::vector<double>>();
    auto px = jd.at("p_x1_given_v").get<std::vector<double>>();
    if (pv.size() != 2 || px.size() != 2)
        throw ValidationError("config: p_v1_given_w / p_x1_given_v must have two entries");
    LayeredDistribution layered(Pmf({1.0 - pw1, pw1}), binary_kernel(pv[0], pv[1]), binary_kernel(px[0], px[1]));

    ExperimentConfig cfg{.layered = layered, .channel = channel};

    const auto& jr = j.at("rates");
    detail::reject_unknown(jr, {"r0", "r1", "corner_fraction"}, "rates");
    if (jr.contains("corner_fraction")) {
        cfg.corner_fraction = jr.at("corner_fraction").get<double>();
    } else {
        cfg.rates = RatePair{jr.at("r0").get<double>(), jr.at("r1").get<double>()};
    }

    const auto& jcode = j.at("code");
    detail::reject_unknown(jcode, {"n", "n_list", "k", "beta", "selection", "rank_margin", "info_scale", "backoff"},
                           "code");
    if (jcode.contains("n_list")) {
        cfg.n_list = jcode.at("n_list").get<std::vector<int>>();
    } else {
        cfg.n_list = {jcode.at("n").get<int>()};
    }
    cfg.k = jcode.at("k").get<int>();
    if (jcode.contains("beta")) cfg.beta = jcode.at("beta").get<double>();
    if (jcode.contains("selection")) {
        auto s = jcode.at("selection").get<std::string>();
        if (s == "rank")
            cfg.selection = SelectionMode::Rank;
        else if (s == "threshold")
            cfg.selection = SelectionMode::Threshold;
        else
            throw ValidationError("config: selection must be rank or threshold");
    }
    if (jcode.contains("rank_margin")) cfg.rank_margin = jcode.at("rank_margin").get<double>();
    if (jcode.contains("info_scale")) cfg.info_scale = jcode.at("info_scale").get<double>();
    if (jcode.contains("backoff")) cfg.auto_backoff = jcode.at("backoff").get<std::string>() == "auto";

    int region_resolution = 5;
    const auto& je = j.at("experiment");
    detail::reject_unknown(je, {"trials", "mc_samples", "tv_samples", "seeds", "region_resolution"},
                           "experiment");
    if (je.contains("trials")) cfg.trials = je.at("trials").get<long long>();
    if (cfg.trials < 1) throw ValidationError("config: trials must be >= 1");
    if (je.contains("mc_samples")) cfg.mc_samples = je.at("mc_samples").get<long long>();
    if (je.contains("tv_samples")) cfg.tv_samples = je.at("tv_samples").get<long long>();
    if (je.contains("region_resolution")) region_resolution = je.at("region_resolution").get<int>();
    if (!je.contains("seeds")) throw ValidationError("config: seeds must be explicit");
    const auto& js = je.at("seeds");
    detail::reject_unknown(js, {"stats", "frozen", "common", "experiment"}, "experiment.seeds");
    cfg.seeds.stats = js.at("stats").get<std::uint64_t>();
    cfg.seeds.frozen = js.at("frozen").get<std::uint64_t>();
    cfg.seeds.common = js.at("common").get<std::uint64_t>();
    cfg.seeds.experiment = js.at("experiment").get<std::uint64_t>();

    return ConfigDocument{.experiment = std::move(cfg), .region_resolution = region_resolution};
}

inline ConfigDocument load_config(const std::string& path) {
    json j = json::parse(read_text(path));
    return parse_config(j);
}

}  // namespace pbc
