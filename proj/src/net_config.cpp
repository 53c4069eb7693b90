/*
   Copyright 2026 The huffrev Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#include "huffrev/net/config.hpp"

#include <fstream>

#include "huffrev/net/transport.hpp"

namespace huffrev::net {

namespace {

using nlohmann::json;

DuplexMac::Key parse_key(const json& j, const std::string& field) {
    if (!j.is_string()) throw ConfigError(field + ": expected a hex string");
    Bytes raw;
    try {
        raw = from_hex(j.get<std::string>());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(field + ": " + e.what());
    }
    if (raw.size() != 32) throw ConfigError(field + ": key must be 32 bytes");
    DuplexMac::Key key{};
    std::copy(raw.begin(), raw.end(), key.begin());
    return key;
}

std::string parse_address_field(const json& j, const std::string& field) {
    if (!j.is_string()) throw ConfigError(field + ": expected host:port");
    auto address = j.get<std::string>();
    try {
        (void)parse_address(address);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(field + ": " + e.what());
    }
    return address;
}

std::filesystem::path resolve(const json& obj, const char* key, const std::filesystem::path& base) {
    if (!obj.contains(key)) return {};
    std::filesystem::path p = obj.at(key).get<std::string>();
    return p.is_absolute() || base.empty() ? p : base / p;
}

}  // namespace

std::vector<std::string> NetConfig::roster() const {
    std::vector<std::string> out;
    for (const auto& r : rsus) out.push_back(r.address);
    return out;
}

const RsuConfig* NetConfig::find_rsu(const std::string& address) const {
    for (const auto& r : rsus) {
        if (r.address == address) return &r;
    }
    return nullptr;
}

NetConfig NetConfig::from_json(const json& j, const std::filesystem::path& base) {
    NetConfig cfg;
    try {
        const auto& t = j.at("ttp");
        cfg.ttp.address = parse_address_field(t.at("address"), "ttp.address");
        cfg.ttp.key = parse_key(t.at("key"), "ttp.key");
        cfg.ttp.admin_key = t.contains("admin_key") ? parse_key(t.at("admin_key"), "ttp.admin_key") : cfg.ttp.key;
        cfg.ttp.plan = resolve(t, "plan", base);
        cfg.ttp.snapshot = resolve(t, "snapshot", base);

        const auto& rsus = j.value("rsus", json::array());
        for (std::size_t i = 0; i < rsus.size(); ++i) {
            const auto prefix = "rsus[" + std::to_string(i) + "]";
            RsuConfig r;
            r.address = parse_address_field(rsus[i].at("address"), prefix + ".address");
            r.key = parse_key(rsus[i].at("key"), prefix + ".key");
            r.snapshot = resolve(rsus[i], "snapshot", base);
            if (cfg.find_rsu(r.address) != nullptr) throw ConfigError(prefix + ": duplicate address " + r.address);
            cfg.rsus.push_back(std::move(r));
        }
        cfg.freshness_window = j.value("freshness_window", std::uint64_t{1});
        cfg.timeout = std::chrono::milliseconds(j.value("timeout_ms", 2000));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return cfg;
}

NetConfig NetConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return from_json(j, path.parent_path());
}

json NetConfig::to_json() const {
    json rs = json::array();
    for (const auto& r : rsus) {
        json e = {{"address", r.address}, {"key", to_hex(r.key)}};
        if (!r.snapshot.empty()) e["snapshot"] = r.snapshot.string();
        rs.push_back(std::move(e));
    }
    json t = {{"address", ttp.address}, {"key", to_hex(ttp.key)}, {"admin_key", to_hex(ttp.admin_key)}};
    if (!ttp.plan.empty()) t["plan"] = ttp.plan.string();
    if (!ttp.snapshot.empty()) t["snapshot"] = ttp.snapshot.string();
    return {{"ttp", t}, {"rsus", rs}, {"freshness_window", freshness_window}, {"timeout_ms", timeout.count()}};
}

}  // namespace huffrev::net
