// Command-line surface: construct code instances, encode/decode messages,
// run error-rate simulations, sweep the rate region, and run the
// verification suites.
//
// Exit codes: 0 success, 1 internal error or verification failure,
// 2 invalid input / infeasible configuration.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "pbc/config.hpp"
#include "pbc/harness.hpp"
#include "pbc/serialize.hpp"
#include "pbc/sets.hpp"
#include "pbc/verify.hpp"

namespace {

using namespace pbc;

int bits_per_symbol(int alphabet) {
    int b = 1;
    while ((1 << b) < alphabet) ++b;
    return b;
}

int cmd_construct(const std::string& config_path, const std::string& out,
                  const std::string& stats_out, std::optional<std::uint64_t> seed, bool backoff) {
    auto doc = load_config(config_path);
    auto cfg = doc.experiment;
    if (seed) cfg.seeds.frozen = *seed;
    cfg.auto_backoff = cfg.auto_backoff || backoff;
    if (cfg.n_list.size() != 1)
        throw ValidationError("construct: the code section must name a single n");
    const int n = cfg.n_list[0];
    auto ci = build_instance(cfg, n);

    write_text(out, to_json(ci).dump(2) + "\n");
    if (!stats_out.empty()) {
        LayerStatsBundle stats;
        if (n <= kExactStatsMaxN) {
            stats = exact_layer_stats(cfg.layered, cfg.channel, n);
        } else {
            RngStream rs(derive_seed(cfg.seeds.stats, static_cast<std::uint64_t>(n)));
            stats = monte_carlo_layer_stats(cfg.layered, cfg.channel, n, cfg.mc_samples, rs);
        }
        write_text(stats_out, to_json(stats).dump(2) + "\n");
    }
    std::cout << "instance written to " << out << "\n"
              << "case " << to_string(ci.layout.tag) << ", N = " << ci.N << ", k = " << ci.k << "\n"
              << "public bits " << ci.public_total << " (rate "
              << static_cast<double>(ci.public_total) / (static_cast<double>(ci.k) * ci.N) << ")\n"
              << "private bits " << ci.private_total << " (rate "
              << static_cast<double>(ci.private_total) / (static_cast<double>(ci.k) * ci.N) << ")\n"
              << polarization_diagnostics(ci.sets, ci.layered, ci.channel).to_string();
    return 0;
}

int cmd_encode(const std::string& instance_path, const std::string& public_path,
               const std::string& private_path, const std::string& out) {
    auto ci = instance_from_json(json::parse(read_text(instance_path)));
    auto pub = read_packed_bits(public_path);
    std::vector<std::uint8_t> priv;
    if (!private_path.empty()) priv = read_packed_bits(private_path);
    if (static_cast<long long>(pub.size()) != ci.public_total ||
        static_cast<long long>(priv.size()) != ci.private_total)
        throw ValidationError("encode: message lengths do not match the instance budgets");
    auto enc = encode_chain(ci, pub, priv);
    std::vector<std::uint8_t> flat;
    for (const auto& cw : enc.codewords) flat.insert(flat.end(), cw.begin(), cw.end());
    write_packed_bits(out, flat);
    std::cout << "wrote " << flat.size() << " codeword bits (" << ci.k << " blocks) to " << out << "\n";
    return 0;
}

int cmd_decode(const std::string& instance_path, const std::string& samples_path, int receiver,
               const std::string& out_prefix) {
    auto ci = instance_from_json(json::parse(read_text(instance_path)));
    if (receiver < 1 || receiver > 3) throw ValidationError("decode: receiver must be 1, 2 or 3");
    const int alphabet =
        receiver == 1 ? ci.channel.y1_size : (receiver == 2 ? ci.channel.y2_size : ci.channel.y3_size);
    auto symbols = read_packed(samples_path, bits_per_symbol(alphabet));
    if (static_cast<long long>(symbols.size()) != static_cast<long long>(ci.k) * ci.N)
        throw ValidationError("decode: sample count != k*N");
    std::vector<std::vector<int>> y(static_cast<std::size_t>(ci.k));
    for (int t = 0; t < ci.k; ++t)
        y[static_cast<std::size_t>(t)] = std::vector<int>(symbols.begin() + static_cast<long>(t) * ci.N,
                                                          symbols.begin() + static_cast<long>(t + 1) * ci.N);

    if (receiver == 1) {
        auto [pub, priv] = decode_receiver1(ci, y);
        write_packed_bits(out_prefix + ".public.bits", pub);
        write_packed_bits(out_prefix + ".private.bits", priv);
        std::cout << "wrote " << out_prefix << ".public.bits and " << out_prefix << ".private.bits\n";
    } else {
        auto pub = receiver == 2 ? decode_receiver2(ci, y) : decode_receiver3(ci, y);
        write_packed_bits(out_prefix + ".public.bits", pub);
        std::cout << "wrote " << out_prefix << ".public.bits\n";
    }
    return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& out, const std::string& csv,
                 std::optional<std::uint64_t> seed, bool backoff) {
    auto doc = load_config(config_path);
    auto cfg = doc.experiment;
    if (seed) cfg.seeds.experiment = *seed;
    cfg.auto_backoff = cfg.auto_backoff || backoff;
    auto recs = run_error_rate(cfg);
    json j = json::array();
    for (const auto& r : recs) j.push_back(to_json(r));
    write_text(out, j.dump(2) + "\n");
    if (!csv.empty()) write_text(csv, results_csv(recs));
    for (const auto& r : recs)
        std::cout << "n=" << r.n << " case=" << r.case_tag << " r1=" << r.r1.error_rate
                  << " r2=" << r.r2.error_rate << " r3=" << r.r3.error_rate
                  << " joint=" << r.joint.error_rate << "\n";
    std::cout << "results written to " << out << "\n";
    return 0;
}

int cmd_region(const std::string& config_path, const std::string& out) {
    auto doc = load_config(config_path);
    auto pts = sweep_region(doc.experiment.channel, doc.region_resolution);
    write_text(out, region_csv(pts));
    std::cout << pts.size() << " frontier points written to " << out << "\n";
    return 0;
}

int cmd_verify(const std::string& config_path, std::optional<std::uint64_t> seed) {
    // The config is optional; defaults exercise the full property set.
    long long mc_samples = 100000;
    std::uint64_t s = seed.value_or(0xF00D);
    if (!config_path.empty()) {
        auto doc = load_config(config_path);
        mc_samples = doc.experiment.mc_samples;
        if (!seed) s = doc.experiment.seeds.experiment;
    }
    auto checks = run_verification(100, 20, 500, 1000, mc_samples, s);
    bool all = true;
    for (const auto& c : checks) {
        std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << ": " << c.detail << "\n";
        all = all && c.pass;
    }
    return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"polar coding for the multi-level three-receiver broadcast channel"};
    app.require_subcommand(1);

    std::string config_path, instance_path, out, csv, samples, public_path, private_path, out_prefix, stats_out;
    std::optional<std::uint64_t> seed;
    bool backoff = false;
    int receiver = 1;

    auto* construct = app.add_subcommand("construct", "build a code instance from a config");
    construct->add_option("--config", config_path)->required();
    construct->add_option("--out", out)->required();
    construct->add_option("--stats-out", stats_out, "also write the bit-channel statistics");
    construct->add_option("--seed", seed, "override the frozen-bit seed");
    construct->add_flag("--backoff", backoff, "scale infeasible rates down automatically");

    auto* encode = app.add_subcommand("encode", "encode message files through an instance");
    encode->add_option("--instance", instance_path)->required();
    encode->add_option("--public", public_path)->required();
    encode->add_option("--private", private_path);
    encode->add_option("--out", out)->required();

    auto* decode = app.add_subcommand("decode", "decode a receiver's samples");
    decode->add_option("--instance", instance_path)->required();
    decode->add_option("--samples", samples)->required();
    decode->add_option("--receiver", receiver)->required();
    decode->add_option("--out", out_prefix, "output path prefix")->required();

    auto* simulate = app.add_subcommand("simulate", "run the error-rate campaign");
    simulate->add_option("--config", config_path)->required();
    simulate->add_option("--out", out)->required();
    simulate->add_option("--csv", csv);
    simulate->add_option("--seed", seed, "override the experiment seed");
    simulate->add_flag("--backoff", backoff);

    auto* region = app.add_subcommand("region", "sweep the achievable-rate frontier");
    region->add_option("--config", config_path)->required();
    region->add_option("--out", out)->required();

    auto* verify = app.add_subcommand("verify", "run the property-verification suites");
    verify->add_option("--config", config_path);
    verify->add_option("--seed", seed);

    CLI11_PARSE(app, argc, argv);

    try {
        if (construct->parsed()) return cmd_construct(config_path, out, stats_out, seed, backoff);
        if (encode->parsed()) return cmd_encode(instance_path, public_path, private_path, out);
        if (decode->parsed()) return cmd_decode(instance_path, samples, receiver, out_prefix);
        if (simulate->parsed()) return cmd_simulate(config_path, out, csv, seed, backoff);
        if (region->parsed()) return cmd_region(config_path, out);
        if (verify->parsed()) return cmd_verify(config_path, seed);
    } catch (const pbc::InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return 2;
    } catch (const pbc::ValidationError& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
