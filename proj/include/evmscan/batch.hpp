// evmscan: defect analysis for EVM runtime bytecode
// Copyright 2026 The evmscan Authors.
// Licensed under the Apache License, Version 2.0.
#pragma once

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "evmscan/defects.hpp"
#include "evmscan/disassembler.hpp"

namespace evmscan {

class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Reads runtime code from a file. `.hex` files hold hex text; other files
/// are taken as hex text when they parse as such, raw bytes otherwise.
inline Bytes load_code_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string data = ss.str();
    if (path.extension() == ".hex") {
        try {
            return parse_hex(data);
        } catch (const HexError& e) {
            throw InputError(path.string() + ": " + e.what());
        }
    }
    try {
        return parse_hex(data);
    } catch (const HexError&) {
        return Bytes(data.begin(), data.end());
    }
}

/// `*.hex` and `*.bin` files directly inside `dir`, sorted by name.
inline std::vector<std::filesystem::path> collect_inputs(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> out;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        const auto ext = e.path().extension();
        if (ext == ".hex" || ext == ".bin") out.push_back(e.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

struct CorpusStats {
    std::size_t contracts_total = 0;
    std::map<DefectKind, std::size_t> per_defect_counts;
    std::size_t contracts_with_any = 0;
    std::map<std::size_t, std::size_t> multi_defect_histogram;  // distinct kinds -> contracts
    double mean_instructions = 0;
    double mean_cyclomatic = 0;
    std::size_t timed_out = 0;
    std::size_t skipped = 0;     // unreadable or undecodable inputs
    std::size_t duplicates = 0;  // inputs whose code hash was already seen

    friend bool operator==(const CorpusStats&, const CorpusStats&) = default;
};

/// Aggregates reports; the result does not depend on report order.
inline CorpusStats aggregate(std::span<const DefectReport> reports) {
    CorpusStats s;
    for (DefectKind k : kAllDefectKinds) s.per_defect_counts[k] = 0;
    long double instr = 0, cc = 0;
    std::vector<const DefectReport*> sorted;
    for (const auto& r : reports) sorted.push_back(&r);
    std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->code_hash < b->code_hash; });
    for (const auto* r : sorted) {
        ++s.contracts_total;
        const auto kinds = r->kinds();
        for (DefectKind k : kinds) ++s.per_defect_counts[k];
        if (!kinds.empty()) ++s.contracts_with_any;
        ++s.multi_defect_histogram[kinds.size()];
        instr += static_cast<long double>(r->instructions_total);
        cc += static_cast<long double>(r->cyclomatic_complexity);
        if (r->timed_out) ++s.timed_out;
    }
    if (s.contracts_total) {
        s.mean_instructions = static_cast<double>(instr / s.contracts_total);
        s.mean_cyclomatic = static_cast<double>(cc / s.contracts_total);
    }
    return s;
}

inline nlohmann::json to_json(const CorpusStats& s) {
    nlohmann::json per = nlohmann::json::object();
    for (const auto& [k, n] : s.per_defect_counts) per[std::string(to_string(k))] = n;
    nlohmann::json hist = nlohmann::json::object();
    for (const auto& [k, n] : s.multi_defect_histogram) hist[std::to_string(k)] = n;
    return {{"contracts_total", s.contracts_total},
            {"per_defect_counts", std::move(per)},
            {"contracts_with_any", s.contracts_with_any},
            {"multi_defect_histogram", std::move(hist)},
            {"mean_instructions", s.mean_instructions},
            {"mean_cyclomatic", s.mean_cyclomatic},
            {"timed_out", s.timed_out},
            {"skipped", s.skipped},
            {"duplicates", s.duplicates}};
}

struct BatchOptions {
    unsigned jobs = 1;
    AnalysisConfig config;
    std::optional<std::filesystem::path> out_dir;  // per-contract reports + stats.json
    bool with_timing = true;                       // duration_ms in per-contract files
};

struct BatchEntry {
    std::vector<std::filesystem::path> sources;  // every input with this code
    DefectReport report;
};

struct BatchResult {
    std::vector<BatchEntry> entries;  // sorted by code hash
    std::vector<std::pair<std::filesystem::path, std::string>> skipped;
    CorpusStats stats;
};

/// Analyzes every distinct code among `inputs` on `jobs` worker threads.
inline BatchResult run_batch(std::span<const std::filesystem::path> inputs, const BatchOptions& opt = {}) {
    BatchResult out;
    std::map<std::string, std::pair<Bytes, std::vector<std::filesystem::path>>> distinct;
    std::size_t duplicates = 0;
    for (const auto& p : inputs) {
        try {
            Bytes code = load_code_file(p);
            std::string h = code_hash_hex(code);
            auto [it, inserted] = distinct.try_emplace(std::move(h));
            if (inserted) it->second.first = std::move(code);
            else ++duplicates;
            it->second.second.push_back(p);
        } catch (const std::exception& e) {
            out.skipped.emplace_back(p, e.what());
        }
    }

    std::vector<const Bytes*> codes;
    for (auto& [h, v] : distinct) {
        BatchEntry e;
        e.sources = v.second;
        out.entries.push_back(std::move(e));
        codes.push_back(&v.first);
    }

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < codes.size(); i = next.fetch_add(1)) {
            out.entries[i].report = analyze(*codes[i], opt.config);
        }
    };
    const unsigned jobs = std::max(1u, std::min<unsigned>(opt.jobs, static_cast<unsigned>(std::max<std::size_t>(codes.size(), 1))));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
    }

    std::vector<DefectReport> reports;
    for (const auto& e : out.entries) reports.push_back(e.report);
    out.stats = aggregate(reports);
    out.stats.skipped = out.skipped.size();
    out.stats.duplicates = duplicates;

    if (opt.out_dir) {
        std::filesystem::create_directories(*opt.out_dir);
        for (const auto& e : out.entries) {
            std::ofstream f(*opt.out_dir / (e.report.code_hash.substr(2) + ".json"));
            f << to_json(e.report, opt.with_timing).dump(2) << "\n";
        }
        std::ofstream f(*opt.out_dir / "stats.json");
        f << to_json(out.stats).dump(2) << "\n";
    }
    return out;
}

inline BatchResult run_batch(const std::filesystem::path& dir, const BatchOptions& opt = {}) {
    const auto inputs = collect_inputs(dir);
    return run_batch(std::span<const std::filesystem::path>(inputs), opt);
}

}  // namespace evmscan
