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

#include "huffrev/bench.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "huffrev/proof.hpp"
#include "huffrev/revocation_tree.hpp"

namespace huffrev {

// ---------------------------------------------------------------- CRL

CrlBaseline::CrlBaseline(std::vector<CertId> ids, std::uint64_t epoch, const Signer& signer)
    : entries_(std::move(ids)), epoch_(epoch) {
    std::sort(entries_.begin(), entries_.end());
    if (std::adjacent_find(entries_.begin(), entries_.end()) != entries_.end()) {
        throw std::invalid_argument("duplicate certificate in CRL");
    }
    signature_ = signer.sign(signed_part());
}

bool CrlBaseline::contains(const CertId& id) const {
    return std::binary_search(entries_.begin(), entries_.end(), id);
}

Bytes CrlBaseline::signed_part() const {
    ByteWriter w;
    w.u64(epoch_);
    w.u32(static_cast<std::uint32_t>(entries_.size()));
    for (const auto& id : entries_) w.raw(id.bytes());
    return std::move(w).take();
}

Bytes CrlBaseline::serialize() const {
    auto out = signed_part();
    out.insert(out.end(), signature_.begin(), signature_.end());
    return out;
}

bool CrlBaseline::verify(const SignatureVerifier& verifier) const {
    return verifier.verify(signed_part(), signature_);
}

// ---------------------------------------------------------------- bench

std::vector<planner::VehicleClass> synthetic_registry(std::uint64_t fleet) {
    const auto taxi = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(0.05 * static_cast<double>(fleet))));
    const auto truck = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(0.15 * static_cast<double>(fleet))));
    const auto rest = fleet > taxi + truck ? fleet - taxi - truck : 1;
    return {
        {1, "taxi", 0.5, taxi},
        {2, "truck", 0.3, truck},
        {3, "private", 0.2, rest},
    };
}

BenchReport run_bench(const BenchConfig& config) {
    if (config.fleet == 0) throw std::invalid_argument("fleet must be at least 1");
    BenchReport rep;
    rep.config = config;

    const auto registry = synthetic_registry(config.fleet);
    auto choice = planner::optimal_k(registry, config.k_min, config.k_max, wire_proof_model(), config.revoked_fraction);
    const auto& plan = choice.plan;
    rep.k = choice.k;
    rep.sweep = choice.sweep;
    rep.expected_proof_bytes = planner::expected_proof_size(plan, wire_proof_model());

    rep.revoked = std::min<std::uint64_t>(
        static_cast<std::uint64_t>(std::llround(config.revoked_fraction * static_cast<double>(config.fleet))),
        plan.total_capacity());

    std::mt19937_64 rng(config.seed);
    auto random_id = [&rng] {
        Bytes raw(kCertIdBytes);
        for (auto& b : raw) b = static_cast<std::uint8_t>(rng());
        raw[0] &= 0x0F;
        return CertId::from_bytes(raw);
    };

    // draw revoked vehicles uniformly from the fleet, skipping strata that are already full
    std::map<int, std::uint64_t> revoked_in;
    std::vector<CertificateId> revoked;
    std::set<CertId> used;
    while (revoked.size() < rep.revoked) {
        std::uint64_t open_population = 0;
        for (const auto& cp : plan.classes) {
            if (revoked_in[cp.class_id] < cp.capacity) open_population += cp.population;
        }
        auto pick = rng() % open_population;
        for (const auto& cp : plan.classes) {
            if (revoked_in[cp.class_id] >= cp.capacity) continue;
            if (pick < cp.population) {
                auto id = random_id();
                if (!used.insert(id).second) break;
                revoked.push_back({id, cp.class_id});
                ++revoked_in[cp.class_id];
                break;
            }
            pick -= cp.population;
        }
    }

    RevocationTree tree(plan);
    for (const auto& c : revoked) {
        tree.insert(c);
        const auto calls = tree.last_op_duplex_calls();
        rep.incremental_calls_total += calls;
        rep.incremental_calls_max = std::max(rep.incremental_calls_max, calls);
        const auto& cp = *plan.find(c.class_id);
        if (calls > static_cast<std::uint64_t>(cp.leaf_depth) * static_cast<std::uint64_t>(plan.k)) {
            rep.incremental_within_bound = false;
        }
    }
    (void)tree.recompute_root(&rep.rebuild_calls);
    if (!revoked.empty()) {
        rep.incremental_calls_mean = static_cast<double>(rep.incremental_calls_total) / static_cast<double>(revoked.size());
        rep.rebuild_ratio = static_cast<double>(rep.rebuild_calls) / rep.incremental_calls_mean;
    }

    DuplexMac ttp(DuplexMac::Key{});
    tree.sign_root(ttp);
    std::vector<CertId> ids;
    for (const auto& c : revoked) ids.push_back(c.id);
    const CrlBaseline crl(ids, tree.epoch(), ttp);
    rep.crl_bytes = crl.size_bytes();
    rep.crl_payload_bytes = crl.payload_bytes();

    for (const auto& cp : plan.classes) {
        ClassBench cb;
        cb.class_id = cp.class_id;
        cb.label = cp.label;
        cb.query_weight = cp.query_weight;
        cb.population = cp.population;
        cb.capacity = cp.capacity;
        cb.revoked = revoked_in[cp.class_id];
        cb.leaf_depth = cp.leaf_depth;
        cb.model_proof_bytes = proof_wire_size(cp.leaf_depth, plan.k);
        std::size_t total = 0;
        for (const auto& rec : tree.stratum_records(cp.class_id)) {
            const auto size = tree.prove_membership(rec.id).serialize().size();
            total += size;
            cb.max_proof_bytes = std::max(cb.max_proof_bytes, size);
        }
        if (cb.revoked > 0) cb.mean_proof_bytes = static_cast<double>(total) / static_cast<double>(cb.revoked);
        else cb.max_proof_bytes = cb.model_proof_bytes;
        rep.max_proof_bytes = std::max(rep.max_proof_bytes, cb.max_proof_bytes);

        const double threshold = static_cast<double>(cp.leaf_depth) * (plan.k - 1) * 32.0 / 29.0;
        if (static_cast<double>(rep.revoked) > threshold && cb.max_proof_bytes >= rep.crl_bytes) rep.proof_beats_crl = false;
        rep.classes.push_back(std::move(cb));
    }
    if (rep.max_proof_bytes > 0) {
        rep.transfer_reduction = static_cast<double>(rep.crl_bytes) / static_cast<double>(rep.max_proof_bytes);
    }
    return rep;
}

nlohmann::json BenchReport::to_json() const {
    nlohmann::json cls = nlohmann::json::array();
    for (const auto& c : classes) {
        cls.push_back({{"id", c.class_id},
                       {"label", c.label},
                       {"query_weight", c.query_weight},
                       {"population", c.population},
                       {"capacity", c.capacity},
                       {"revoked", c.revoked},
                       {"leaf_depth", c.leaf_depth},
                       {"model_proof_bytes", c.model_proof_bytes},
                       {"mean_proof_bytes", c.mean_proof_bytes},
                       {"max_proof_bytes", c.max_proof_bytes}});
    }
    nlohmann::json sw = nlohmann::json::array();
    for (const auto& [k, bytes] : sweep) sw.push_back({{"k", k}, {"expected_proof_bytes", bytes}});
    return {
        {"fleet", config.fleet},
        {"revoked_fraction", config.revoked_fraction},
        {"seed", config.seed},
        {"k_range", {config.k_min, config.k_max}},
        {"k", k},
        {"sweep", sw},
        {"revoked", revoked},
        {"expected_proof_bytes", expected_proof_bytes},
        {"classes", cls},
        {"crl_bytes", crl_bytes},
        {"crl_payload_bytes", crl_payload_bytes},
        {"incremental_calls", {{"total", incremental_calls_total}, {"mean", incremental_calls_mean}, {"max", incremental_calls_max}}},
        {"incremental_within_bound", incremental_within_bound},
        {"rebuild_calls", rebuild_calls},
        {"rebuild_ratio", rebuild_ratio},
        {"max_proof_bytes", max_proof_bytes},
        {"transfer_reduction", transfer_reduction},
        {"proof_beats_crl", proof_beats_crl},
    };
}

std::string BenchReport::table() const {
    std::ostringstream out;
    out << "fleet " << config.fleet << ", revoked " << revoked << ", k " << k << " (range " << config.k_min << ".."
        << config.k_max << "), seed " << config.seed << "\n\n";
    out << std::left << std::setw(10) << "class" << std::right << std::setw(10) << "revoked" << std::setw(10) << "capacity"
        << std::setw(8) << "depth" << std::setw(12) << "proof_mean" << std::setw(11) << "proof_max" << std::setw(8) << "model"
        << "\n";
    out << std::fixed << std::setprecision(1);
    for (const auto& c : classes) {
        out << std::left << std::setw(10) << c.label << std::right << std::setw(10) << c.revoked << std::setw(10) << c.capacity
            << std::setw(8) << c.leaf_depth << std::setw(12) << c.mean_proof_bytes << std::setw(11) << c.max_proof_bytes
            << std::setw(8) << c.model_proof_bytes << "\n";
    }
    out << "\nCRL bytes            " << crl_bytes << " (payload " << crl_payload_bytes << ")\n";
    out << "expected proof bytes " << expected_proof_bytes << "\n";
    out << "transfer reduction   " << transfer_reduction << "x\n";
    out << "incremental calls    mean " << incremental_calls_mean << ", max " << incremental_calls_max << "\n";
    out << "rebuild calls        " << rebuild_calls << " (" << rebuild_ratio << "x)\n";
    return out.str();
}

}  // namespace huffrev
