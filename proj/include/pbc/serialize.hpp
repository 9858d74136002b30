// Versioned JSON documents for every artifact plus the packed bit-array file
// format: 8-byte little-endian symbol count, then symbols packed LSB-first
// within each byte (bits_per_symbol consecutive bits per symbol).
#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pbc/chaining.hpp"
#include "pbc/harness.hpp"
#include "pbc/stats.hpp"

namespace pbc {

using nlohmann::json;

inline constexpr int kFormatVersion = 1;

// --------------------------------------------------------------------------
// Packed symbol arrays

inline void write_packed(const std::string& path, std::span<const int> symbols, int bits_per_symbol) {
    if (bits_per_symbol < 1 || bits_per_symbol > 8)
        throw ValidationError("write_packed: bits_per_symbol out of range");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("write_packed: cannot open " + path);
    std::uint64_t count = symbols.size();
    for (int b = 0; b < 8; ++b) os.put(static_cast<char>((count >> (8 * b)) & 0xff));
    std::uint8_t cur = 0;
    int fill = 0;
    for (int s : symbols) {
        for (int b = 0; b < bits_per_symbol; ++b) {
            cur |= static_cast<std::uint8_t>(((s >> b) & 1) << fill);
            if (++fill == 8) {
                os.put(static_cast<char>(cur));
                cur = 0;
                fill = 0;
            }
        }
    }
    if (fill > 0) os.put(static_cast<char>(cur));
}

inline std::vector<int> read_packed(const std::string& path, int bits_per_symbol) {
    if (bits_per_symbol < 1 || bits_per_symbol > 8)
        throw ValidationError("read_packed: bits_per_symbol out of range");
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("read_packed: cannot open " + path);
    std::uint64_t count = 0;
    for (int b = 0; b < 8; ++b) {
        int c = is.get();
        if (c == EOF) throw ValidationError("read_packed: truncated header in " + path);
        count |= static_cast<std::uint64_t>(c & 0xff) << (8 * b);
    }
    std::vector<int> symbols(count, 0);
    int cur = 0, fill = 0;
    for (std::uint64_t i = 0; i < count; ++i) {
        int v = 0;
        for (int b = 0; b < bits_per_symbol; ++b) {
            if (fill == 0) {
                cur = is.get();
                if (cur == EOF) throw ValidationError("read_packed: truncated payload in " + path);
                fill = 8;
            }
            v |= (cur & 1) << b;
            cur >>= 1;
            --fill;
        }
        symbols[i] = v;
    }
    return symbols;
}

inline std::vector<std::uint8_t> read_packed_bits(const std::string& path) {
    auto sym = read_packed(path, 1);
    return {sym.begin(), sym.end()};
}

inline void write_packed_bits(const std::string& path, std::span<const std::uint8_t> bits) {
    std::vector<int> sym(bits.begin(), bits.end());
    write_packed(path, sym, 1);
}

// --------------------------------------------------------------------------
// JSON (de)serialization

inline json to_json(const Pmf& p) { return json(p.mass()); }

inline Pmf pmf_from_json(const json& j) { return Pmf(j.get<std::vector<double>>()); }

inline json to_json(const ConditionalPmf& c) {
    json rows = json::array();
    for (int r = 0; r < c.input_size(); ++r) {
        auto row = c.row(r);
        rows.push_back(std::vector<double>(row.begin(), row.end()));
    }
    return rows;
}

inline ConditionalPmf conditional_from_json(const json& j) {
    auto rows = j.get<std::vector<std::vector<double>>>();
    if (rows.empty()) throw ValidationError("ConditionalPmf: empty rows");
    std::vector<double> flat;
    for (const auto& r : rows) {
        if (r.size() != rows[0].size()) throw ValidationError("ConditionalPmf: ragged rows");
        flat.insert(flat.end(), r.begin(), r.end());
    }
    return ConditionalPmf(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()), std::move(flat));
}

inline json to_json(const LayeredDistribution& d) {
    return json{{"pw", to_json(d.pw)}, {"pv_given_w", to_json(d.pv_given_w)}, {"px_given_v", to_json(d.px_given_v)}};
}

inline LayeredDistribution layered_from_json(const json& j) {
    return LayeredDistribution(pmf_from_json(j.at("pw")), conditional_from_json(j.at("pv_given_w")),
                               conditional_from_json(j.at("px_given_v")));
}

inline json to_json(const BroadcastChannel& ch) {
    return json{{"y1_size", ch.y1_size},
                {"y3_size", ch.y3_size},
                {"k13", to_json(ch.k13)},
                {"k2", to_json(ch.k2)}};
}

inline BroadcastChannel channel_from_json(const json& j) {
    return BroadcastChannel(j.at("y1_size").get<int>(), j.at("y3_size").get<int>(),
                            conditional_from_json(j.at("k13")), conditional_from_json(j.at("k2")));
}

inline json to_json(const ReceiverSets& r) {
    return json{{"h_rec", r.h_rec}, {"l_rec", r.l_rec}, {"info", r.info}, {"frozen", r.frozen}};
}

inline ReceiverSets receiver_sets_from_json(const json& j) {
    ReceiverSets r;
    r.h_rec = j.at("h_rec").get<IndexSet>();
    r.l_rec = j.at("l_rec").get<IndexSet>();
    r.info = j.at("info").get<IndexSet>();
    r.frozen = j.at("frozen").get<IndexSet>();
    return r;
}

inline json to_json(const LayerSets& l) {
    json rec = json::object();
    for (const auto& [id, rs] : l.rec) rec[std::to_string(id)] = to_json(rs);
    return json{{"h", l.h}, {"l", l.l}, {"r", l.r}, {"receivers", rec}};
}

inline LayerSets layer_sets_from_json(const json& j) {
    LayerSets l;
    l.h = j.at("h").get<IndexSet>();
    l.l = j.at("l").get<IndexSet>();
    l.r = j.at("r").get<IndexSet>();
    for (const auto& [key, val] : j.at("receivers").items()) l.rec.emplace(std::stoi(key), receiver_sets_from_json(val));
    return l;
}

inline json to_json(const BitChannelSets& s) {
    return json{{"format", "pbc-sets"},
                {"version", kFormatVersion},
                {"N", s.N},
                {"delta_n", s.delta_n},
                {"mode", s.mode == SelectionMode::Rank ? "rank" : "threshold"},
                {"w", to_json(s.w)},
                {"v", to_json(s.v)},
                {"x", to_json(s.x)},
                {"nesting_violations", s.nesting_violations}};
}

inline BitChannelSets sets_from_json(const json& j) {
    BitChannelSets s;
    s.N = j.at("N").get<int>();
    s.delta_n = j.at("delta_n").get<double>();
    s.mode = j.at("mode").get<std::string>() == "rank" ? SelectionMode::Rank : SelectionMode::Threshold;
    s.w = layer_sets_from_json(j.at("w"));
    s.v = layer_sets_from_json(j.at("v"));
    s.x = layer_sets_from_json(j.at("x"));
    s.nesting_violations = j.at("nesting_violations").get<std::vector<int>>();
    return s;
}

inline json to_json(const BitChannelStats& st) {
    json zr = json::object(), zse = json::object();
    for (const auto& [id, z] : st.z_receiver) zr[std::to_string(id)] = z;
    for (const auto& [id, z] : st.z_receiver_se) zse[std::to_string(id)] = z;
    return json{{"layer", static_cast<int>(st.layer)},
                {"n", st.n},
                {"exact", st.exact},
                {"sample_count", st.sample_count},
                {"z_source", st.z_source},
                {"z_receiver", zr},
                {"z_receiver_se", zse}};
}

inline json to_json(const LayerStatsBundle& b) {
    return json{{"format", "pbc-stats"},
                {"version", kFormatVersion},
                {"w", to_json(b.w)},
                {"v", to_json(b.v)},
                {"x", to_json(b.x)}};
}

inline const char* layer_name(LayerId id) {
    switch (id) {
        case LayerId::W: return "w";
        case LayerId::V: return "v";
        default: return "x";
    }
}

inline json to_json(const ChainingLayout& L) {
    json links = json::array();
    for (const auto& link : L.copy_links)
        links.push_back(json{{"src_layer", layer_name(link.src_layer)},
                             {"src", link.src},
                             {"dst_layer", layer_name(link.dst_layer)},
                             {"dst", link.dst}});
    return json{{"case", to_string(L.tag)}, {"k", L.k},
                {"nr0", L.nr0},           {"nr11", L.nr11},
                {"nr12", L.nr12},         {"w_common", L.w_common},
                {"w_chained", L.w_chained}, {"bw1", L.bw1},
                {"bw2", L.bw2},           {"i31v", L.i31v},
                {"i32v", L.i32v},         {"v_private", L.v_private},
                {"i321v", L.i321v},       {"i322v", L.i322v},
                {"i11v", L.i11v},         {"i12v", L.i12v},
                {"x_private", L.x_private}, {"copy_links", links}};
}

inline LayerId layer_from_name(const std::string& s) {
    if (s == "w") return LayerId::W;
    if (s == "v") return LayerId::V;
    if (s == "x") return LayerId::X;
    throw ValidationError("unknown layer name: " + s);
}

inline CaseTag case_from_string(const std::string& s) {
    if (s == "A1") return CaseTag::A1;
    if (s == "A2") return CaseTag::A2;
    if (s == "B1") return CaseTag::B1;
    if (s == "B2") return CaseTag::B2;
    throw ValidationError("unknown case tag: " + s);
}

inline ChainingLayout layout_from_json(const json& j) {
    ChainingLayout L;
    L.tag = case_from_string(j.at("case").get<std::string>());
    L.k = j.at("k").get<int>();
    L.nr0 = j.at("nr0").get<int>();
    L.nr11 = j.at("nr11").get<int>();
    L.nr12 = j.at("nr12").get<int>();
    L.w_common = j.at("w_common").get<IndexSet>();
    L.w_chained = j.at("w_chained").get<IndexSet>();
    L.bw1 = j.at("bw1").get<IndexSet>();
    L.bw2 = j.at("bw2").get<IndexSet>();
    L.i31v = j.at("i31v").get<IndexSet>();
    L.i32v = j.at("i32v").get<IndexSet>();
    L.v_private = j.at("v_private").get<IndexSet>();
    L.i321v = j.at("i321v").get<IndexSet>();
    L.i322v = j.at("i322v").get<IndexSet>();
    L.i11v = j.at("i11v").get<IndexSet>();
    L.i12v = j.at("i12v").get<IndexSet>();
    L.x_private = j.at("x_private").get<IndexSet>();
    for (const auto& link : j.at("copy_links")) {
        L.copy_links.push_back({layer_from_name(link.at("src_layer").get<std::string>()),
                                link.at("src").get<IndexSet>(),
                                layer_from_name(link.at("dst_layer").get<std::string>()),
                                link.at("dst").get<IndexSet>()});
    }
    return L;
}

inline json to_json(const CodeInstance& ci) {
    return json{{"format", "pbc-instance"},
                {"version", kFormatVersion},
                {"n", ci.n},
                {"k", ci.k},
                {"layered", to_json(ci.layered)},
                {"channel", to_json(ci.channel)},
                {"sets", to_json(ci.sets)},
                {"layout", to_json(ci.layout)},
                {"public_total", ci.public_total},
                {"private_total", ci.private_total},
                {"frozen_seed", ci.frozen_seed},
                {"common_seed", ci.common_seed}};
}

inline CodeInstance instance_from_json(const json& j) {
    if (j.at("format").get<std::string>() != "pbc-instance")
        throw ValidationError("instance_from_json: wrong format tag");
    if (j.at("version").get<int>() != kFormatVersion)
        throw ValidationError("instance_from_json: unsupported version");
    CodeInstance ci{.n = j.at("n").get<int>(),
                    .N = 1 << j.at("n").get<int>(),
                    .k = j.at("k").get<int>(),
                    .layered = layered_from_json(j.at("layered")),
                    .channel = channel_from_json(j.at("channel")),
                    .sets = sets_from_json(j.at("sets")),
                    .layout = layout_from_json(j.at("layout")),
                    .public_total = j.at("public_total").get<long long>(),
                    .private_total = j.at("private_total").get<long long>(),
                    .frozen_seed = j.at("frozen_seed").get<std::uint64_t>(),
                    .common_seed = j.at("common_seed").get<std::uint64_t>(),
                    .frozen = {}};
    rebuild_frozen_table(ci);
    return ci;
}

inline json to_json(const ReceiverResult& r) {
    return json{{"trials", r.trials},
                {"errors", r.errors},
                {"error_rate", r.error_rate},
                {"wilson_lo", r.wilson.lo},
                {"wilson_hi", r.wilson.hi}};
}

inline json to_json(const ResultRecord& r) {
    return json{{"format", "pbc-result"},
                {"version", kFormatVersion},
                {"n", r.n},
                {"N", r.N},
                {"k", r.k},
                {"case", r.case_tag},
                {"public_total", r.public_total},
                {"private_total", r.private_total},
                {"realized_r0", r.realized_r0},
                {"realized_r1", r.realized_r1},
                {"receiver1", to_json(r.r1)},
                {"receiver2", to_json(r.r2)},
                {"receiver3", to_json(r.r3)},
                {"joint", to_json(r.joint)},
                {"wall_seconds", r.wall_seconds}};
}

inline ReceiverResult receiver_result_from_json(const json& j) {
    ReceiverResult r;
    r.trials = j.at("trials").get<long long>();
    r.errors = j.at("errors").get<long long>();
    r.error_rate = j.at("error_rate").get<double>();
    r.wilson.lo = j.at("wilson_lo").get<double>();
    r.wilson.hi = j.at("wilson_hi").get<double>();
    return r;
}

inline ResultRecord record_from_json(const json& j) {
    if (j.at("format").get<std::string>() != "pbc-result")
        throw ValidationError("record_from_json: wrong format tag");
    if (j.at("version").get<int>() != kFormatVersion)
        throw ValidationError("record_from_json: unsupported version");
    ResultRecord r;
    r.n = j.at("n").get<int>();
    r.N = j.at("N").get<int>();
    r.k = j.at("k").get<int>();
    r.case_tag = j.at("case").get<std::string>();
    r.public_total = j.at("public_total").get<long long>();
    r.private_total = j.at("private_total").get<long long>();
    r.realized_r0 = j.at("realized_r0").get<double>();
    r.realized_r1 = j.at("realized_r1").get<double>();
    r.r1 = receiver_result_from_json(j.at("receiver1"));
    r.r2 = receiver_result_from_json(j.at("receiver2"));
    r.r3 = receiver_result_from_json(j.at("receiver3"));
    r.joint = receiver_result_from_json(j.at("joint"));
    r.wall_seconds = j.at("wall_seconds").get<double>();
    return r;
}

// Stable record comparison for determinism checks strips wall-clock time.
inline json record_fingerprint(const ResultRecord& r) {
    json j = to_json(r);
    j.erase("wall_seconds");
    return j;
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open for writing: " + path);
    os << text;
}

inline std::string read_text(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open for reading: " + path);
    return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

inline std::string region_csv(const std::vector<RegionPoint>& pts) {
    std::ostringstream os;
    os << "r0,r1,inside\n";
    os.precision(12);
    for (const auto& p : pts) os << p.r0 << "," << p.r1 << "," << (p.inside ? 1 : 0) << "\n";
    return os.str();
}

inline std::string results_csv(const std::vector<ResultRecord>& recs) {
    std::ostringstream os;
    os << "n,N,k,case,realized_r0,realized_r1,r1_errors,r2_errors,r3_errors,joint_errors,trials\n";
    os.precision(12);
    for (const auto& r : recs)
        os << r.n << "," << r.N << "," << r.k << "," << r.case_tag << "," << r.realized_r0 << ","
           << r.realized_r1 << "," << r.r1.errors << "," << r.r2.errors << "," << r.r3.errors << ","
           << r.joint.errors << "," << r.r1.trials << "\n";
    return os.str();
}

}  // namespace pbc
