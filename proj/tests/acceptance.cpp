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

// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include <boost/rational.hpp>

#include "huffrev/bench.hpp"
#include "huffrev/keccak.hpp"
#include "huffrev/planner.hpp"
#include "huffrev/revocation_tree.hpp"
#include "net_sim.hpp"
#include "oracles/huffman_oracle.hpp"
#include "oracles/tree_oracle.hpp"
#include "test_support.hpp"

using namespace huffrev;
using Rational = boost::rational<std::int64_t>;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

planner::HuffmanPlan three_class_plan(int k) {
    std::vector<planner::VehicleClass> classes = {
        {1, "taxi", 0.6, 1000},
        {2, "truck", 0.3, 2000},
        {3, "private", 0.1, 97000},
    };
    return planner::plan_tree(classes, k);
}

//! Fills every stratum of the plan to capacity in random order.
std::vector<CertificateId> fill(RevocationTree& tree, const planner::HuffmanPlan& plan, std::mt19937_64& rng) {
    std::vector<CertificateId> certs;
    for (const auto& cp : plan.classes) {
        for (std::uint64_t i = 0; i < cp.capacity; ++i) certs.push_back({test::random_cert_id(rng), cp.class_id});
    }
    std::shuffle(certs.begin(), certs.end(), rng);
    for (const auto& c : certs) tree.insert(c);
    return certs;
}

Outcome keccak_kat() {
    const auto out = keccak::keccak_f800(keccak::KeccakState{});
    const bool ok = out.lanes == test::kF800ZeroState;
    std::ostringstream d;
    d << "lane[0]=0x" << std::hex << out.lanes[0];
    return {ok, d.str()};
}

Outcome duplexing_lemma() {
    std::mt19937_64 rng(101);
    int calls = 0;
    int mismatches = 0;
    for (int trial = 0; trial < 500; ++trial) {
        auto ctx = keccak::duplex_init();
        keccak::BitString prefix;
        const int blocks = 1 + static_cast<int>(rng() % 8);
        for (int i = 0; i < blocks; ++i) {
            auto sigma = test::random_bytes(rng, rng() % 68);
            const std::size_t out_bits = rng() % 545;
            auto out = ctx.duplexing(sigma, out_bits);
            auto message = prefix;
            message.append(keccak::BitString::from_bytes(sigma));
            if (out != keccak::sponge(message, keccak::SpongeParams{}, out_bits)) ++mismatches;
            for (const auto& b : keccak::pad10star1(keccak::BitString::from_bytes(sigma), 544)) prefix.append(b);
            ++calls;
        }
    }
    return {mismatches == 0, std::to_string(calls) + " duplex calls, " + std::to_string(mismatches) + " mismatches"};
}

Outcome huffman_optimality() {
    std::mt19937_64 rng(103);
    int mismatches = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const int k = 2 + static_cast<int>(rng() % 3);
        const std::size_t n = 1 + rng() % 6;
        std::vector<std::int64_t> w(n);
        for (auto& x : w) x = static_cast<std::int64_t>(rng() % 50);
        w[rng() % n] += 1;
        std::int64_t total = 0;
        for (auto x : w) total += x;

        std::vector<Rational> probs;
        for (auto x : w) probs.emplace_back(x, total);
        const auto depths = planner::build_kary_code(std::span<const Rational>(probs), k);
        Rational expected(0);
        for (std::size_t i = 0; i < n; ++i) expected += probs[i] * depths[i];
        if (expected != Rational(oracle::min_expected_depth(w, k), total)) ++mismatches;
    }
    return {mismatches == 0, "200 vectors, " + std::to_string(mismatches) + " mismatches"};
}

Outcome incremental_equivalence() {
    std::mt19937_64 rng(104);
    int ops_checked = 0;
    int mismatches = 0;
    for (int seq = 0; seq < 100; ++seq) {
        const int n = 1 + static_cast<int>(rng() % 4);
        std::vector<planner::VehicleClass> classes;
        double total = 0;
        for (int i = 0; i < n; ++i) {
            classes.push_back({i, "c" + std::to_string(i), static_cast<double>(1 + rng() % 10), 1 + rng() % 300});
            total += classes.back().query_weight;
        }
        for (auto& c : classes) c.query_weight /= total;
        auto plan = planner::plan_tree(classes, 2 + static_cast<int>(rng() % 4), 1.0);
        RevocationTree tree(plan);
        oracle::TreeModel model(plan);
        std::vector<CertId> live;
        const int ops = 1 + static_cast<int>(rng() % 500);
        for (int op = 0; op < ops; ++op) {
            if (!live.empty() && rng() % 3 == 0) {
                const auto idx = rng() % live.size();
                tree.remove(live[idx]);
                model.remove(live[idx]);
                live.erase(live.begin() + static_cast<std::ptrdiff_t>(idx));
            } else {
                const auto& cp = plan.classes[rng() % plan.classes.size()];
                if (tree.stratum_size(cp.class_id) >= cp.capacity) continue;
                auto id = test::random_cert_id(rng);
                tree.insert({id, cp.class_id});
                model.insert(id, cp.class_id);
                live.push_back(id);
            }
            ++ops_checked;
            if (tree.root_digest() != model.root()) ++mismatches;
        }
    }
    return {mismatches == 0, std::to_string(ops_checked) + " operations, " + std::to_string(mismatches) + " mismatches"};
}

Outcome proof_soundness() {
    auto plan = three_class_plan(2);
    RevocationTree tree(plan);
    std::mt19937_64 rng(105);
    const auto certs = fill(tree, plan, rng);
    auto key = test::test_key(0x21);
    tree.sign_root(key);
    const TrustAnchor anchor{&key, tree.epoch(), 1};

    int verified = 0;
    for (const auto& c : certs) {
        if (verify_membership(tree.prove_membership(c.id), c.id, anchor).accepted()) ++verified;
    }
    int rejected = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto& c = certs[rng() % certs.size()];
        auto wire = tree.prove_membership(c.id).serialize();
        const auto bit = rng() % (wire.size() * 8);
        wire[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
        try {
            if (!verify_membership(MembershipProof::deserialize(wire), c.id, anchor).accepted()) ++rejected;
        } catch (const DecodeError&) {
            ++rejected;
        }
    }
    const bool ok = certs.size() == 1000 && verified == 1000 && rejected == 1000;
    return {ok, std::to_string(verified) + "/" + std::to_string(certs.size()) + " verify, " + std::to_string(rejected) +
                    "/1000 mutations rejected"};
}

Outcome insertion_cost() {
    auto plan = three_class_plan(2);
    RevocationTree tree(plan);
    std::mt19937_64 rng(106);
    std::vector<CertificateId> certs;
    for (const auto& cp : plan.classes) {
        for (std::uint64_t i = 0; i < cp.capacity; ++i) certs.push_back({test::random_cert_id(rng), cp.class_id});
    }
    std::shuffle(certs.begin(), certs.end(), rng);
    std::uint64_t total = 0;
    std::uint64_t worst = 0;
    bool within = true;
    for (const auto& c : certs) {
        tree.insert(c);
        const auto calls = tree.last_op_duplex_calls();
        total += calls;
        worst = std::max(worst, calls);
        const auto& cp = *plan.find(c.class_id);
        if (calls > static_cast<std::uint64_t>(cp.leaf_depth) * static_cast<std::uint64_t>(plan.k)) within = false;
    }
    std::uint64_t rebuild = 0;
    const bool same_root = tree.recompute_root(&rebuild) == tree.root_digest();
    const double mean = static_cast<double>(total) / static_cast<double>(certs.size());
    const double ratio = static_cast<double>(rebuild) / mean;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%zu leaves, append mean %.1f max %llu calls, rebuild %llu calls, ratio %.1fx",
                  certs.size(), mean, static_cast<unsigned long long>(worst), static_cast<unsigned long long>(rebuild), ratio);
    return {certs.size() == 1000 && within && same_root && ratio >= 50.0, buf};
}

Outcome sizing() {
    BenchConfig cfg;
    cfg.fleet = 100000;
    cfg.revoked_fraction = 0.01;
    const auto rep = run_bench(cfg);
    bool every_class = true;
    for (const auto& c : rep.classes) {
        if (c.max_proof_bytes > 1500) every_class = false;
    }
    const bool ok = rep.revoked == 1000 && rep.crl_payload_bytes == 29000 &&
                    rep.crl_bytes == 29000 + CrlBaseline::kFramingBytes && every_class && rep.transfer_reduction >= 19.0;
    char buf[200];
    std::snprintf(buf, sizeof(buf), "revoked %llu, k %d, CRL %zu bytes (payload %zu), max proof %zu bytes, reduction %.1fx",
                  static_cast<unsigned long long>(rep.revoked), rep.k, rep.crl_bytes, rep.crl_payload_bytes, rep.max_proof_bytes,
                  rep.transfer_reduction);
    return {ok, buf};
}

Outcome end_to_end() {
    const auto r = test::run_end_to_end(108, 3, 20, 200, 1000);
    const bool ok = r.revocations == 200 && r.wrong_status == 0 && r.honest_distrust == 0 && r.converged &&
                    r.delivery_failures >= 1 && r.tamper_wrong == 0 && r.duplicate_delivery_stable;
    std::ostringstream d;
    d << r.queries << " queries, " << r.wrong_status << " wrong, " << r.honest_distrust << " honest distrust, "
      << r.delivery_failures << " failed deliveries, converged " << (r.converged ? "yes" : "no") << ", tamper "
      << r.tamper_rejected << " rejected / " << r.tamper_wrong << " wrongly accepted of " << r.tamper_trials;
    return {ok, d.str()};
}

Outcome optimal_k_single_class() {
    std::vector<planner::VehicleClass> one = {{0, "all", 1.0, 4096}};
    const auto choice = planner::optimal_k(one, 2, 16, {}, 1.0);
    bool brute_ok = true;
    int brute_best = 0;
    double brute_cost = 0;
    for (int k = 2; k <= 16; ++k) {
        int depth = 0;
        std::uint64_t leaves = 1;
        while (leaves < 4096) {
            leaves *= static_cast<std::uint64_t>(k);
            ++depth;
        }
        const double siblings = static_cast<double>(depth * (k - 1));
        if (brute_best == 0 || siblings < brute_cost) {
            brute_best = k;
            brute_cost = siblings;
        }
        if (choice.sweep.size() != 15 || choice.sweep[k - 2].second != siblings * 32) brute_ok = false;
    }
    const bool table_ok = choice.sweep.size() >= 3 && choice.sweep[0].second == 12 * 32 &&
                          choice.sweep[1].second == 16 * 32 && choice.sweep[2].second == 18 * 32;
    std::ostringstream d;
    d << "k=" << choice.k << ", siblings k2/k3/k4 = ";
    for (int i = 0; i < 3 && i < static_cast<int>(choice.sweep.size()); ++i) {
        d << (i ? "/" : "") << choice.sweep[i].second / 32;
    }
    d << ", brute force k=" << brute_best;
    return {choice.k == 2 && brute_best == 2 && table_ok && brute_ok, d.str()};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"keccak-f[800] known answer", keccak_kat},
        {"duplexing lemma, 500 sequences", duplexing_lemma},
        {"k-ary Huffman optimality, 200 vectors", huffman_optimality},
        {"incremental root equals rebuild, 100 sequences", incremental_equivalence},
        {"proof soundness and completeness, 1000 leaves", proof_soundness},
        {"insertion cost at 1000 leaves", insertion_cost},
        {"bench sizing at fleet 100000", sizing},
        {"end-to-end protocol, 1 TTP / 3 RSUs / 20 vehicles", end_to_end},
        {"optimal_k for one 4096-leaf class", optimal_k_single_class},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (!v.pass) ++failures;
        std::printf("%s %zu: %s (%s; %.2f s)\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), v.detail.c_str(),
                    secs);
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
