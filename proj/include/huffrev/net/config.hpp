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

#pragma once

// Network configuration file:
//
//   {
//     "ttp":  {"address": "127.0.0.1:7400", "key": "<64 hex>", "admin_key": "<64 hex>",
//              "plan": "plan.json", "snapshot": "ttp.tree"},
//     "rsus": [{"address": "127.0.0.1:7401", "key": "<64 hex>", "snapshot": "rsu1.tree"}],
//     "freshness_window": 1,
//     "timeout_ms": 2000
//   }
//
// admin_key defaults to the TTP key; plan and snapshot paths are relative to
// the config file.

#include <chrono>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "huffrev/signature.hpp"

namespace huffrev::net {

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct TtpConfig {
    std::string address;
    DuplexMac::Key key{};
    DuplexMac::Key admin_key{};
    std::filesystem::path plan;
    std::filesystem::path snapshot;
};

struct RsuConfig {
    std::string address;
    DuplexMac::Key key{};
    std::filesystem::path snapshot;
};

struct NetConfig {
    TtpConfig ttp;
    std::vector<RsuConfig> rsus;
    std::uint64_t freshness_window = 1;
    std::chrono::milliseconds timeout{2000};

    [[nodiscard]] std::vector<std::string> roster() const;
    [[nodiscard]] const RsuConfig* find_rsu(const std::string& address) const;

    //! Throws ConfigError naming the offending field.
    static NetConfig from_json(const nlohmann::json& j, const std::filesystem::path& base = {});
    static NetConfig load(const std::filesystem::path& path);
    [[nodiscard]] nlohmann::json to_json() const;
};

}  // namespace huffrev::net
