// evmscan: defect analysis for EVM runtime bytecode
// Copyright 2026 The evmscan Authors.
// Licensed under the Apache License, Version 2.0.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "evmscan/evmscan.hpp"

namespace fs = std::filesystem;
using namespace evmscan;

namespace {

constexpr int kClean = 0;
constexpr int kFindings = 1;
constexpr int kError = 2;

struct CommonFlags {
    std::string config_path;
    std::optional<double> timeout_s;
    bool json = false;
    bool timestamp = false;
};

ToolConfig resolve_config(const CommonFlags& f) {
    ToolConfig cfg;
    if (!f.config_path.empty()) load_config(f.config_path, cfg);
    if (f.timeout_s) set_timeout_seconds(cfg, *f.timeout_s);
    if (f.json) cfg.output = OutputFormat::json;
    if (f.timestamp) cfg.analysis.include_timestamp_in_bid = true;
    return cfg;
}

// A path if one exists, otherwise the argument itself as hex.
Bytes load_input(const std::string& arg) {
    std::error_code ec;
    if (fs::exists(arg, ec)) return load_code_file(arg);
    const bool hexish = arg.starts_with("0x") || arg.starts_with("0X") ||
                        (!arg.empty() && arg.find_first_not_of("0123456789abcdefABCDEF") == std::string::npos);
    if (!hexish) throw InputError("no such file: " + arg);
    try {
        return parse_hex(arg);
    } catch (const HexError& e) {
        throw InputError(std::string("malformed hex: ") + e.what());
    }
}

std::string hex_offset(std::uint32_t off) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "0x%04x", off);
    return buf;
}

void print_text(const DefectReport& r) {
    if (r.address) std::cout << "address      " << *r.address << "\n";
    std::cout << "code hash    " << r.code_hash << "\n";
    std::printf("instructions %zu, coverage %.1f%%, cyclomatic %ld, %.1f ms%s\n", r.instructions_total,
                r.coverage * 100.0, r.cyclomatic_complexity, r.duration_ms, r.timed_out ? " (timed out)" : "");
    if (r.findings.empty()) {
        std::cout << "no defects found\n";
        return;
    }
    for (const auto& f : r.findings) {
        std::cout << "  [IP" << impact_level(f.kind) << "] " << to_string(f.kind) << " at " << hex_offset(f.primary_site());
        if (!f.note.empty()) std::cout << ": " << f.note;
        std::cout << "\n";
    }
}

int report_and_exit(DefectReport& r, const ToolConfig& cfg, const Analysis* a, bool features, const std::string& dot) {
    if (!dot.empty() && a) {
        std::ofstream out(dot);
        if (!out) throw InputError("cannot write " + dot);
        out << to_dot(a->exec.cfg);
    }
    if (cfg.output == OutputFormat::json) {
        auto j = to_json(r);
        if (features && a) j["features"] = to_json(a->features, a->exec);
        std::cout << j.dump(2) << "\n";
    } else {
        print_text(r);
        if (features && a) std::cout << to_json(a->features, a->exec).dump(2) << "\n";
    }
    return r.findings.empty() ? kClean : kFindings;
}

int analyze_code(Bytes code, std::optional<std::string> address, const ToolConfig& cfg, bool features,
                 const std::string& dot) {
    const auto start = std::chrono::steady_clock::now();
    const Analysis a = run_analysis(std::move(code), cfg.analysis);
    DefectReport r = make_report(a);
    r.duration_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    r.address = std::move(address);
    return report_and_exit(r, cfg, &a, features, dot);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"evmscan: defect analysis for EVM runtime bytecode"};
    app.require_subcommand(1);

    CommonFlags common;
    auto add_common = [&common](CLI::App* sub) {
        sub->add_option("--config", common.config_path, "key = value configuration file")->check(CLI::ExistingFile);
        sub->add_option("--timeout", common.timeout_s, "per-contract timeout in seconds");
        sub->add_flag("--json", common.json, "JSON output");
        sub->add_flag("--timestamp", common.timestamp, "treat TIMESTAMP as block-info for BID");
    };

    std::string input, dot;
    bool features = false;
    auto* analyze_cmd = app.add_subcommand("analyze", "analyze one contract (file or hex string)");
    analyze_cmd->add_option("input", input, "file with hex or binary runtime code, or a hex string")->required();
    analyze_cmd->add_option("--dot", dot, "write the recovered CFG as Graphviz");
    analyze_cmd->add_flag("--features", features, "include the detected features");
    add_common(analyze_cmd);

    std::string dir, out_dir;
    std::optional<unsigned> jobs;
    auto* batch_cmd = app.add_subcommand("batch", "analyze every *.hex / *.bin file in a directory");
    batch_cmd->add_option("dir", dir)->required();
    batch_cmd->add_option("--jobs", jobs, "worker threads");
    batch_cmd->add_option("--out", out_dir, "write <code_hash>.json per contract and stats.json here");
    add_common(batch_cmd);

    std::string address, rpc_url;
    unsigned retries = 2;
    bool fetch_only = false;
    auto* fetch_cmd = app.add_subcommand("fetch", "fetch deployed code over JSON-RPC and analyze it");
    fetch_cmd->add_option("address", address)->required();
    fetch_cmd->add_option("--rpc", rpc_url, "node HTTP endpoint")->required();
    fetch_cmd->add_option("--retries", retries, "transport retries");
    fetch_cmd->add_flag("--code-only", fetch_only, "print the code instead of analyzing it");
    fetch_cmd->add_option("--dot", dot, "write the recovered CFG as Graphviz");
    add_common(fetch_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kClean : kError;
    }

    try {
        ToolConfig cfg = resolve_config(common);
        if (*analyze_cmd) {
            return analyze_code(load_input(input), std::nullopt, cfg, features, dot);
        }
        if (*batch_cmd) {
            if (!fs::is_directory(dir)) throw InputError("not a directory: " + dir);
            BatchOptions opt;
            opt.jobs = jobs.value_or(cfg.jobs);
            opt.config = cfg.analysis;
            if (!out_dir.empty()) opt.out_dir = out_dir;
            const auto result = run_batch(fs::path(dir), opt);
            for (const auto& [p, why] : result.skipped) std::cerr << "skipped " << p.string() << ": " << why << "\n";
            if (cfg.output == OutputFormat::json) {
                std::cout << to_json(result.stats).dump(2) << "\n";
            } else {
                const auto& s = result.stats;
                std::cout << "contracts " << s.contracts_total << " (" << s.duplicates << " duplicates, " << s.skipped
                          << " skipped), with defects " << s.contracts_with_any << "\n";
                for (const auto& [k, n] : s.per_defect_counts) std::cout << "  " << to_string(k) << " " << n << "\n";
                std::printf("mean instructions %.1f, mean cyclomatic %.2f, timed out %zu\n", s.mean_instructions,
                            s.mean_cyclomatic, s.timed_out);
            }
            return kClean;
        }
        if (*fetch_cmd) {
            RpcEndpoint ep;
            ep.url = rpc_url;
            ep.retries = retries;
            ep.timeout = cfg.analysis.exec.timeout;
            FetchResult fetched = fetch_code(ep, address);
            if (!fetched.is_contract()) {
                std::cout << address << ": not a contract (no code)\n";
                return kClean;
            }
            if (fetch_only) {
                std::cout << to_hex(fetched.code) << "\n";
                return kClean;
            }
            return analyze_code(std::move(fetched.code), address, cfg, false, dot);
        }
    } catch (const std::exception& e) {
        std::cerr << "evmscan: " << e.what() << "\n";
        return kError;
    }
    return kError;
}
