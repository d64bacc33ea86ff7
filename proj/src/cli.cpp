#include "w3sim/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "w3sim/atam.hpp"
#include "w3sim/error.hpp"

namespace w3sim {

namespace {

struct Usage : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Common {
    int type = 0;
    std::string tuple;
    std::string scenario;
    std::string faults;
    std::uint64_t seed = 42;
    bool seed_given = false;
    std::uint32_t nodes = 7;
    std::string out;
    std::string format = "json";
    unsigned jobs = 1;
};

std::uint64_t resolve_seed(const Common& c) {
    if (c.seed_given) return c.seed;
    const char* env = std::getenv("W3SIM_SEED");
    if (!env || !*env) return c.seed;
    std::uint64_t v = 0;
    std::istringstream in(env);
    if (!(in >> v) || !in.eof()) throw Usage(std::string("W3SIM_SEED is not an unsigned integer: ") + env);
    return v;
}

ArchitectureType resolve_arch(const Common& c) {
    if (c.type && !c.tuple.empty()) throw Usage("--type and --tuple are mutually exclusive");
    if (!c.tuple.empty()) return parse_tuple(c.tuple);
    return type_from_id(c.type ? c.type : 1);
}

struct Inputs {
    ScenarioScript script = default_scenario();
    FaultPlan faults;
    SimConfig sim;
};

Inputs load_inputs(const Common& c) {
    Inputs in;
    if (!c.scenario.empty()) in.script = load_scenario(c.scenario);
    if (!c.faults.empty()) {
        auto cfg = load_config(c.faults);
        in.faults = fault_plan_from(cfg);
        apply_config(cfg, in.sim);
    }
    in.sim.consensus.n_nodes = c.nodes;
    in.sim.consensus.validate();
    return in;
}

void emit(const Common& c, const std::string& text, std::ostream& out) {
    if (c.out.empty()) {
        out << text;
        return;
    }
    std::ofstream f(c.out, std::ios::binary);
    if (!f) throw Usage("cannot write " + c.out);
    f << text;
}

std::string report_markdown(const MetricReport& r) {
    std::ostringstream s;
    s << "# " << r.arch.name() << " " << r.arch.tuple_string() << "\n\n| Metric | Value |\n|---|---|\n";
    const auto j = to_json(r);
    for (const auto& [k, v] : j.items()) {
        if (k == "config") continue;
        if (!v.is_object()) {
            s << "| " << k << " | " << v.dump() << " |\n";
            continue;
        }
        for (const auto& [k2, v2] : v.items()) s << "| " << k << "." << k2 << " | " << v2.dump() << " |\n";
    }
    return s.str();
}

nlohmann::ordered_json matrix_json(const SweepResult& res) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& r : res.measured.rows) {
        nlohmann::ordered_json row;
        row["type"] = r.label;
        for (std::size_t i = 0; i < kColumns; ++i) {
            const auto name = std::string(to_string(static_cast<Column>(i)));
            row[name] = r.cells[i];
            if (r.trend[i]) row[name + "_trend"] = *r.trend[i];
        }
        rows.push_back(row);
    }
    nlohmann::ordered_json ms = nlohmann::ordered_json::array();
    for (const auto& m : res.mismatches)
        ms.push_back({{"type", m.type_id},
                      {"column", std::string(to_string(m.column))},
                      {"kind", m.kind},
                      {"expected", m.expected},
                      {"measured", m.measured}});
    return {{"rows", rows}, {"mismatches", ms}};
}

void add_common(CLI::App* cmd, Common& c, bool arch, bool sweep) {
    if (arch) {
        cmd->add_option("--type", c.type, "architecture type 1..12")->check(CLI::Range(1, 12));
        cmd->add_option("--tuple", c.tuple, "architecture tuple, e.g. A2,B1,C3");
    }
    cmd->add_option("--scenario", c.scenario, "scenario script")->check(CLI::ExistingFile);
    cmd->add_option("--faults", c.faults, "fault and config file")->check(CLI::ExistingFile);
    cmd->add_option_function<std::uint64_t>(
        "--seed", [&c](const std::uint64_t& v) { c.seed = v, c.seed_given = true; }, "RNG seed (default 42)");
    cmd->add_option("--nodes", c.nodes, "maintainer count (default 7)")->check(CLI::Range(1u, 1000u));
    cmd->add_option("--out", c.out, "write the report here instead of stdout");
    cmd->add_option("--format", c.format, "json or markdown")->check(CLI::IsMember({"json", "markdown"}));
    if (sweep) cmd->add_option("--jobs", c.jobs, "parallel runs (default 1)")->check(CLI::Range(1u, 256u));
}

int cmd_simulate(const Common& c, std::ostream& out) {
    const auto arch = resolve_arch(c);
    const auto in = load_inputs(c);
    auto r = run_scenario(arch, in.script, in.faults, resolve_seed(c), in.sim);
    emit(c, c.format == "json" ? to_json(r).dump(2) + "\n" : report_markdown(r), out);
    return 0;
}

SweepResult sweep_of(const Common& c) {
    const auto in = load_inputs(c);
    SweepOptions o;
    o.seed = resolve_seed(c);
    o.nodes = c.nodes;
    o.jobs = c.jobs;
    o.script = in.script;
    o.run_faults = in.faults;
    o.sim = in.sim;
    return run_sweep(o);
}

int cmd_sweep(const Common& c, std::ostream& out, bool matrix_only) {
    const auto res = sweep_of(c);
    std::string text;
    if (c.format == "markdown") {
        text = render_markdown(res.measured, res.mismatches);
    } else {
        nlohmann::ordered_json j;
        j["seed"] = resolve_seed(c);
        j["nodes"] = c.nodes;
        if (!matrix_only) {
            j["reports"] = nlohmann::ordered_json::array();
            for (const auto& r : res.reports) j["reports"].push_back(to_json(r));
        }
        j["matrix"] = matrix_json(res);
        text = j.dump(2) + "\n";
    }
    emit(c, text, out);
    return res.mismatches.empty() ? 0 : 1;
}

int cmd_encode(const std::string& to, const std::string& from, const std::string& value, std::ostream& out) {
    if (to.empty() == from.empty()) throw Usage("encode needs exactly one of --to or --from");
    if (!to.empty()) {
        std::string_view hexed = value;
        if (hexed.starts_with("0x")) hexed.remove_prefix(2);
        const auto bytes = unhex(hexed);
        out << (to == "base58" ? encode_base58(bytes) : encode_base16(bytes)) << "\n";
    } else {
        const auto bytes = from == "base58" ? decode_base58(value) : decode_base16(value);
        out << encode_base16(bytes) << "\n";
    }
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"w3sim: web architecture simulator and trade-off matrix", "w3sim"};
    app.require_subcommand(1);

    Common sim_c, sweep_c, matrix_c, demo_c;
    auto* simulate = app.add_subcommand("simulate", "run one scenario and print its metric report");
    add_common(simulate, sim_c, true, false);
    auto* sweep = app.add_subcommand("sweep", "run all 12 types and compare against the reference matrix");
    add_common(sweep, sweep_c, false, true);
    auto* matrix = app.add_subcommand("matrix", "reproduce the ordinal matrix; exit 1 on any mismatch");
    add_common(matrix, matrix_c, false, true);
    matrix_c.format = "markdown";
    auto* demo = app.add_subcommand("demo", "narrated NFT sale through the five protocol phases");
    demo->add_option_function<std::uint64_t>(
        "--seed", [&demo_c](const std::uint64_t& v) { demo_c.seed = v, demo_c.seed_given = true; }, "RNG seed");

    std::string to, from, value;
    auto* encode = app.add_subcommand("encode", "address encodings: hex to base58/base16 and back");
    encode->add_option("--to", to, "encode hex input as base58 or base16")->check(CLI::IsMember({"base58", "base16"}));
    encode->add_option("--from", from, "decode base58 or base16 text to hex")->check(CLI::IsMember({"base58", "base16"}));
    encode->add_option("value", value, "input text (empty string allowed)")->required();

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n" << app.help();
        return 2;
    }

    try {
        if (*simulate) return cmd_simulate(sim_c, out);
        if (*sweep) return cmd_sweep(sweep_c, out, false);
        if (*matrix) return cmd_sweep(matrix_c, out, true);
        if (*demo) return run_demo(out, resolve_seed(demo_c)).ok() ? 0 : 1;
        if (*encode) return cmd_encode(to, from, value, out);
    } catch (const Usage& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}

}  // namespace w3sim
