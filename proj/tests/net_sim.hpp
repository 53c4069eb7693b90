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

// In-process network of one TTP, several RSUs and many vehicles, checked
// against a ground-truth revocation log that knows nothing about trees.

#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "huffrev/net/nodes.hpp"
#include "test_support.hpp"

namespace huffrev::test {

//! Revocation history: id -> epoch at which it was revoked.
class GroundTruth {
  public:
    void revoke(const CertId& id, std::uint64_t epoch) { revoked_at_.emplace(id, epoch); }
    [[nodiscard]] bool revoked_at(const CertId& id, std::uint64_t epoch) const {
        auto it = revoked_at_.find(id);
        return it != revoked_at_.end() && it->second <= epoch;
    }
    [[nodiscard]] const std::map<CertId, std::uint64_t>& all() const { return revoked_at_; }

  private:
    std::map<CertId, std::uint64_t> revoked_at_;
};

inline planner::HuffmanPlan sim_plan() {
    return planner::plan_tree(
        std::vector<planner::VehicleClass>{{1, "taxi", 0.5, 5000}, {2, "truck", 0.3, 15000}, {3, "private", 0.2, 80000}}, 2);
}

struct Network {
    static constexpr const char* kTtp = "ttp:7400";

    net::InProcessNetwork wire;
    net::ManualClock clock{1'700'000'000};
    DuplexMac ttp_key = test_key(0x10);
    std::vector<std::string> rsu_addresses;
    std::vector<std::unique_ptr<DuplexMac>> rsu_keys;
    std::vector<std::unique_ptr<net::RsuNode>> rsus;
    std::unique_ptr<net::TtpNode> ttp;
    std::vector<std::unique_ptr<net::VehicleClient>> vehicles;

    Network(const planner::HuffmanPlan& plan, int n_rsus, int n_vehicles, std::uint64_t window = 1) {
        std::map<std::string, const SignatureVerifier*> trusted;
        for (int i = 0; i < n_rsus; ++i) {
            rsu_addresses.push_back("rsu" + std::to_string(i) + ":7401");
            rsu_keys.push_back(std::make_unique<DuplexMac>(test_key(static_cast<std::uint8_t>(0x40 + i))));
            rsus.push_back(std::make_unique<net::RsuNode>(ttp_key, *rsu_keys.back(), clock, &wire,
                                                          net::RsuOptions{.ttp_address = kTtp}));
            wire.attach(rsu_addresses.back(), rsus.back().get());
            trusted[rsu_addresses.back()] = rsu_keys.back().get();
        }
        ttp = std::make_unique<net::TtpNode>(RevocationTree(plan), ttp_key, ttp_key, wire, rsu_addresses);
        wire.attach(kTtp, ttp.get());
        for (int v = 0; v < n_vehicles; ++v) {
            vehicles.push_back(std::make_unique<net::VehicleClient>(ttp_key, trusted, wire, clock,
                                                                    net::VehicleOptions{.window = window}));
        }
    }

    [[nodiscard]] bool converged() const {
        for (const auto& r : rsus) {
            if (r->root_digest() != ttp->root_digest() || r->epoch() != ttp->epoch()) return false;
        }
        return true;
    }
};

struct EndToEndResult {
    int revocations = 0;
    int queries = 0;
    int wrong_status = 0;       // accepted answer disagreeing with ground truth
    int honest_distrust = 0;    // distrust of an untampered answer
    int stale_answers = 0;      // answers served by a lagging replica and still accepted
    int delivery_failures = 0;
    bool converged = false;
    bool duplicate_delivery_stable = false;
    int tamper_trials = 0;
    int tamper_wrong = 0;
    int tamper_rejected = 0;
};

/// Random revocations with interleaved vehicle queries. One RSU is offline
/// during one broadcast; afterwards frames are tampered in flight.
inline EndToEndResult run_end_to_end(std::uint64_t seed, int n_rsus = 3, int n_vehicles = 20, int revocations = 200,
                                     int tamper_trials = 1000) {
    std::mt19937_64 rng(seed);
    auto plan = sim_plan();
    Network net(plan, n_rsus, n_vehicles);
    GroundTruth truth;
    EndToEndResult res;
    net.ttp->bootstrap_all();

    std::vector<CertId> probes;  // ids vehicles ask about: revoked ones plus never-revoked ones
    for (int i = 0; i < 50; ++i) probes.push_back(random_cert_id(rng));
    std::map<int, std::uint64_t> room;
    for (const auto& cp : plan.classes) room[cp.class_id] = cp.capacity;

    std::vector<TreeDelta> recent;
    const int offline_at = revocations / 3;
    const std::string offline_rsu = net.rsu_addresses[1 % n_rsus];

    auto check = [&](int vehicle, const std::string& rsu, const CertId& id, bool tampered) {
        auto outcome = net.vehicles[vehicle]->query(rsu, id);
        if (outcome.outcome == net::Outcome::Distrust) {
            if (tampered) ++res.tamper_rejected;
            else ++res.honest_distrust;
            return;
        }
        const bool revoked = outcome.outcome == net::Outcome::Revoked;
        if (revoked != truth.revoked_at(id, outcome.epoch)) {
            if (tampered) ++res.tamper_wrong;
            else ++res.wrong_status;
        }
        if (!tampered && outcome.epoch < net.ttp->epoch()) ++res.stale_answers;
    };

    for (int r = 0; r < revocations; ++r) {
        int cls;
        do {
            cls = plan.classes[rng() % plan.classes.size()].class_id;
        } while (room[cls] == 0);
        --room[cls];
        const auto id = random_cert_id(rng);
        probes.push_back(id);

        if (r == offline_at) net.wire.set_offline(offline_rsu, true);
        auto report = net.ttp->revoke({id, cls});
        net.wire.set_offline(offline_rsu, false);
        res.delivery_failures += static_cast<int>(report.failures.size());
        recent.push_back(report.delta);
        if (recent.size() > 5) recent.erase(recent.begin());
        truth.revoke(id, report.delta.epoch);
        ++res.revocations;
        net.clock.advance(1);

        for (int v = 0; v < n_vehicles; ++v) {
            const auto& rsu = net.rsu_addresses[rng() % net.rsu_addresses.size()];
            const auto& probe = probes[rng() % probes.size()];
            check(v, rsu, probe, false);
            ++res.queries;
        }
    }
    res.converged = net.converged();

    // at-least-once delivery: replay recent deltas, newest last
    {
        const auto before = net.rsus[0]->root_digest();
        bool stable = true;
        for (const auto& d : recent) {
            auto report = net.ttp->broadcast(d);
            stable = stable && report.failures.empty() && report.resynced.empty();
        }
        res.duplicate_delivery_stable = stable && net.converged() && net.rsus[0]->root_digest() == before;
    }

    // single-byte corruption of one frame per trial; frames include queries, responses, deltas and snapshots
    for (int t = 0; t < tamper_trials; ++t) {
        int remaining = 1;
        const auto target_reply = rng() % 2 == 0;
        const auto pick = rng();
        net.wire.set_tamper([&, target_reply, pick](const std::string&, bool reply, Bytes& frame) {
            if (reply != target_reply || remaining == 0 || frame.empty()) return;
            --remaining;
            frame[pick % frame.size()] ^= static_cast<std::uint8_t>(1 + (pick >> 32) % 255);
        });
        ++res.tamper_trials;
        if (t % 10 == 9 && room[3] > 0) {
            // a tampered broadcast: replicas must reject or resync, never diverge silently
            --room[3];
            const auto id = random_cert_id(rng);
            probes.push_back(id);
            std::vector<std::pair<std::uint64_t, std::optional<Digest>>> before;
            for (const auto& rsu : net.rsus) before.emplace_back(rsu->epoch(), rsu->root_digest());
            auto report = net.ttp->revoke({id, 3});
            truth.revoke(id, report.delta.epoch);
            net.wire.set_tamper(nullptr);
            bool silent_divergence = false;
            for (std::size_t i = 0; i < net.rsus.size(); ++i) {
                const auto e = net.rsus[i]->epoch();
                const auto root = net.rsus[i]->root_digest();
                const bool unchanged = e == before[i].first && root == before[i].second;
                const bool current = e == net.ttp->epoch() && root == net.ttp->root_digest();
                silent_divergence = silent_divergence || !(unchanged || current);
            }
            if (silent_divergence) ++res.tamper_wrong;
            else ++res.tamper_rejected;
            net.ttp->bootstrap_all();
            continue;
        }
        const auto v = static_cast<int>(rng() % n_vehicles);
        const auto& rsu = net.rsu_addresses[rng() % net.rsu_addresses.size()];
        check(v, rsu, probes[rng() % probes.size()], true);
        net.wire.set_tamper(nullptr);
    }
    res.converged = res.converged && net.converged();
    return res;
}

}  // namespace huffrev::test
