// evmscan: defect analysis for EVM runtime bytecode
// Copyright 2026 The evmscan Authors.
// Licensed under the Apache License, Version 2.0.
#pragma once

#include <cctype>
#include <chrono>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>

#include <httplib.h>
#include <json.hpp>

// <arpa/nameser_compat.h>, pulled in by httplib, defines ADD.
#ifdef ADD
#undef ADD
#endif

#include "evmscan/disassembler.hpp"

namespace evmscan {

/// Transport failure: unreachable endpoint, timeout, HTTP error.
class IngestionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The endpoint answered but not with a usable JSON-RPC response.
class ProtocolError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RpcEndpoint {
    std::string url;
    std::chrono::milliseconds timeout{10'000};
    unsigned retries = 2;
    std::chrono::milliseconds backoff{200};
};

struct FetchResult {
    std::string address;
    Bytes code;

    /// An externally owned account (or a destroyed contract) has no code.
    bool is_contract() const { return !code.empty(); }
};

inline bool is_address(std::string_view a) {
    if (a.size() != 42 || a[0] != '0' || (a[1] != 'x' && a[1] != 'X')) return false;
    for (char c : a.substr(2)) {
        if (!std::isxdigit(static_cast<unsigned char>(c))) return false;
    }
    return true;
}

namespace detail {

// "http://host:port/path" -> {"http://host:port", "/path"}
inline std::pair<std::string, std::string> split_url(std::string_view url) {
    const auto scheme = url.find("://");
    const auto path = url.find('/', scheme == std::string_view::npos ? 0 : scheme + 3);
    if (path == std::string_view::npos) return {std::string(url), "/"};
    return {std::string(url.substr(0, path)), std::string(url.substr(path))};
}

}  // namespace detail

/// eth_getCode(address, "latest"). Transport errors are retried.
inline FetchResult fetch_code(const RpcEndpoint& ep, std::string_view address) {
    if (!is_address(address)) throw std::invalid_argument("not a 20-byte hex address: " + std::string(address));
    if (ep.url.starts_with("https://")) throw std::invalid_argument("https endpoints are not supported: " + ep.url);
    const auto [host, path] = detail::split_url(ep.url);
    const nlohmann::json request = {{"jsonrpc", "2.0"},
                                    {"id", 1},
                                    {"method", "eth_getCode"},
                                    {"params", {std::string(address), "latest"}}};
    const std::string body = request.dump();

    std::string last_error;
    for (unsigned attempt = 0; attempt <= ep.retries; ++attempt) {
        if (attempt) std::this_thread::sleep_for(ep.backoff * attempt);
        httplib::Client cli(host);
        cli.set_connection_timeout(ep.timeout);
        cli.set_read_timeout(ep.timeout);
        cli.set_write_timeout(ep.timeout);
        auto res = cli.Post(path, body, "application/json");
        if (!res) {
            last_error = httplib::to_string(res.error());
            continue;
        }
        if (res->status != 200) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        nlohmann::json reply;
        try {
            reply = nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::exception& e) {
            throw ProtocolError(std::string("malformed JSON-RPC response: ") + e.what());
        }
        if (!reply.is_object()) throw ProtocolError("JSON-RPC response is not an object");
        if (auto err = reply.find("error"); err != reply.end() && !err->is_null()) {
            throw ProtocolError("JSON-RPC error: " + err->dump());
        }
        auto result = reply.find("result");
        if (result == reply.end() || !result->is_string()) throw ProtocolError("JSON-RPC response has no string result");
        const auto& hex = result->get_ref<const std::string&>();
        if (!hex.starts_with("0x")) throw ProtocolError("result is not 0x-prefixed");
        try {
            return {std::string(address), parse_hex(hex)};
        } catch (const HexError& e) {
            throw ProtocolError(std::string("result is not hex: ") + e.what());
        }
    }
    throw IngestionError("eth_getCode failed after " + std::to_string(ep.retries + 1) + " attempts: " + last_error);
}

}  // namespace evmscan
