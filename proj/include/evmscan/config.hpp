// evmscan: defect analysis for EVM runtime bytecode
// Copyright 2026 The evmscan Authors.
// Licensed under the Apache License, Version 2.0.
#pragma once

#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

#include "evmscan/defects.hpp"

namespace evmscan {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class OutputFormat : std::uint8_t { text, json };

struct ToolConfig {
    AnalysisConfig analysis;
    OutputFormat output = OutputFormat::text;
    unsigned jobs = 1;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::string_view unquote(std::string_view s) {
    if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) return s.substr(1, s.size() - 2);
    return s;
}

template <class T>
T parse_number(std::string_view key, std::string_view v) {
    T out{};
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size()) throw ConfigError("bad value for " + std::string(key) + ": " + std::string(v));
    return out;
}

inline bool parse_bool(std::string_view key, std::string_view v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("bad value for " + std::string(key) + ": " + std::string(v));
}

}  // namespace detail

inline void set_timeout_seconds(ToolConfig& cfg, double seconds) {
    if (!(seconds > 0) || !std::isfinite(seconds)) throw ConfigError("timeout must be positive");
    cfg.analysis.exec.timeout = std::chrono::milliseconds(static_cast<long long>(std::llround(seconds * 1000.0)));
}

/// Applies one key. Unknown keys are errors.
inline void apply_setting(ToolConfig& cfg, std::string_view key, std::string_view value) {
    using detail::parse_number;
    if (key == "timeout_s") {
        set_timeout_seconds(cfg, parse_number<double>(key, value));
    } else if (key == "visit_limit") {
        cfg.analysis.exec.visit_limit = parse_number<unsigned>(key, value);
        if (cfg.analysis.exec.visit_limit == 0) throw ConfigError("visit_limit must be at least 1");
    } else if (key == "step_budget") {
        cfg.analysis.exec.step_budget = parse_number<std::uint64_t>(key, value);
    } else if (key == "include_timestamp_in_bid") {
        cfg.analysis.include_timestamp_in_bid = detail::parse_bool(key, value);
    } else if (key == "output") {
        if (value == "text") cfg.output = OutputFormat::text;
        else if (value == "json") cfg.output = OutputFormat::json;
        else throw ConfigError("output must be text or json");
    } else if (key == "jobs") {
        cfg.jobs = parse_number<unsigned>(key, value);
        if (cfg.jobs == 0) throw ConfigError("jobs must be at least 1");
    } else {
        throw ConfigError("unknown key: " + std::string(key));
    }
}

/// key = value lines; '#' starts a comment; blank lines ignored.
inline void parse_config(std::string_view text, ToolConfig& cfg) {
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        const auto key = detail::trim(line.substr(0, eq));
        const auto value = detail::unquote(detail::trim(line.substr(eq + 1)));
        try {
            apply_setting(cfg, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
}

inline ToolConfig parse_config(std::string_view text) {
    ToolConfig cfg;
    parse_config(text, cfg);
    return cfg;
}

inline void load_config(const std::filesystem::path& path, ToolConfig& cfg) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    parse_config(ss.str(), cfg);
}

}  // namespace evmscan
