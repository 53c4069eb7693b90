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

#include <doctest.h>

#include <random>
#include <set>

#include "huffrev/node_hash.hpp"
#include "huffrev/revocation_tree.hpp"
#include "oracles/tree_oracle.hpp"
#include "test_support.hpp"

using namespace huffrev;
using planner::HuffmanPlan;
using planner::VehicleClass;

namespace {

HuffmanPlan three_class_plan(int k = 2) {
    std::vector<VehicleClass> classes = {
        {1, "taxi", 0.6, 1000},
        {2, "truck", 0.3, 2000},
        {3, "private", 0.1, 97000},
    };
    return planner::plan_tree(classes, k);
}

HuffmanPlan single_class_plan(std::uint64_t capacity, int k) {
    return planner::plan_tree(std::vector<VehicleClass>{{0, "all", 1.0, capacity}}, k, 1.0);
}

HuffmanPlan random_plan(std::mt19937_64& rng, int max_classes = 4) {
    const int n = 1 + static_cast<int>(rng() % max_classes);
    std::vector<VehicleClass> classes;
    double total = 0;
    for (int i = 0; i < n; ++i) {
        classes.push_back({i, "c" + std::to_string(i), static_cast<double>(1 + rng() % 10), 1 + rng() % 200});
        total += classes.back().query_weight;
    }
    for (auto& c : classes) c.query_weight /= total;
    return planner::plan_tree(classes, 2 + static_cast<int>(rng() % 4), 1.0);
}

TrustAnchor anchor_for(const SignatureVerifier& key, std::uint64_t newest, std::uint64_t window = 1) {
    return {&key, newest, window};
}

}  // namespace

TEST_CASE("new trees are deterministic and empty") {
    auto plan = three_class_plan();
    RevocationTree a(plan), b(plan);
    CHECK(a.root_digest() == b.root_digest());
    CHECK(a.epoch() == 0);
    CHECK(a.root_digest() == oracle::TreeModel(plan).root());

    auto key = test::test_key(1);
    a.sign_root(key);
    std::mt19937_64 rng(1);
    for (int i = 0; i < 20; ++i) {
        try {
            (void)a.prove_membership(test::random_cert_id(rng));
            FAIL("empty tree produced a proof");
        } catch (const TreeError& e) {
            CHECK(e.code() == TreeErrc::NotFound);
        }
    }
}

TEST_CASE("empty root differs from every single-leaf root") {
    auto plan = three_class_plan();
    RevocationTree empty(plan);
    std::mt19937_64 rng(2);
    for (int cls = 1; cls <= 3; ++cls) {
        RevocationTree one(plan);
        one.insert({test::random_cert_id(rng), cls});
        CHECK(one.root_digest() != empty.root_digest());
    }
}

TEST_CASE("first insert matches the sponge rebuild oracle") {
    for (int k = 2; k <= 5; ++k) {
        auto plan = single_class_plan(20, k);
        RevocationTree tree(plan);
        oracle::TreeModel model(plan);
        const auto id = CertId::from_u64(42);
        tree.insert({id, 0});
        model.insert(id, 0);
        CHECK(tree.root_digest() == model.root());
        CHECK(tree.recompute_root() == model.root());
    }
}

TEST_CASE("sequential inserts match rebuild for up to 1000 leaves") {
    auto plan = three_class_plan();
    RevocationTree tree(plan);
    oracle::TreeModel model(plan);
    std::mt19937_64 rng(3);
    std::map<int, std::uint64_t> room = {{1, 10}, {2, 20}, {3, 970}};
    for (int n = 1; n <= 1000; ++n) {
        int cls;
        do {
            cls = 1 + static_cast<int>(rng() % 3);
        } while (room[cls] == 0);
        --room[cls];
        const auto id = CertId::from_u64(static_cast<std::uint64_t>(n));
        tree.insert({id, cls});
        model.insert(id, cls);
        if (n % 97 == 0 || n <= 20 || n == 1000) {
            REQUIRE(tree.root_digest() == model.root());
        }
    }
    CHECK(tree.root_digest() == tree.recompute_root());
    CHECK(tree.epoch() == 1000);
}

TEST_CASE("insert errors") {
    auto plan = three_class_plan();
    RevocationTree tree(plan);
    const auto id = CertId::from_u64(7);
    tree.insert({id, 1});
    const auto root = tree.root_digest();

    try {
        tree.insert({id, 2});
        FAIL("duplicate accepted");
    } catch (const TreeError& e) {
        CHECK(e.code() == TreeErrc::DuplicateCertificate);
    }
    try {
        tree.insert({CertId::from_u64(8), 9});
        FAIL("unknown class accepted");
    } catch (const TreeError& e) {
        CHECK(e.code() == TreeErrc::UnknownClass);
    }
    for (std::uint64_t i = 100; i < 109; ++i) tree.insert({CertId::from_u64(i), 1});
    try {
        tree.insert({CertId::from_u64(200), 1});
        FAIL("over-capacity insert accepted");
    } catch (const TreeError& e) {
        CHECK(e.code() == TreeErrc::StratumFull);
    }
    CHECK(tree.stratum_size(1) == 10);
    CHECK(root != tree.root_digest());
}

TEST_CASE("remove tombstones and matches rebuild") {
    auto plan = three_class_plan();
    RevocationTree tree(plan);
    oracle::TreeModel model(plan);
    auto key = test::test_key(2);
    for (std::uint64_t i = 1; i <= 30; ++i) {
        tree.insert({CertId::from_u64(i), 3});
        model.insert(CertId::from_u64(i), 3);
    }
    tree.remove(CertId::from_u64(5));
    model.remove(CertId::from_u64(5));
    CHECK(tree.root_digest() == model.root());
    CHECK_FALSE(tree.contains(CertId::from_u64(5)));
    CHECK(tree.stratum_size(3) == 30);

    tree.sign_root(key);
    CHECK_THROWS_AS((void)tree.prove_membership(CertId::from_u64(5)), TreeError);
    try {
        tree.remove(CertId::from_u64(5));
        FAIL("double remove accepted");
    } catch (const TreeError& e) {
        CHECK(e.code() == TreeErrc::NotFound);
    }

    // a removed id may be revoked again; it takes a fresh slot
    tree.insert({CertId::from_u64(5), 3});
    model.insert(CertId::from_u64(5), 3);
    CHECK(tree.root_digest() == model.root());
}

TEST_CASE("root signing") {
    auto plan = three_class_plan();
    RevocationTree tree(plan);
    tree.insert({CertId::from_u64(1), 1});
    auto key = test::test_key(3);
    auto other = test::test_key(4);
    const auto sr = tree.sign_root(key);
    CHECK(sr == tree.sign_root(key));
    CHECK(verify_signed_root(sr, key));
    CHECK_FALSE(verify_signed_root(sr, other));

    auto flipped = sr;
    flipped.root_digest[0] ^= 1;
    CHECK_FALSE(verify_signed_root(flipped, key));
    auto reepoch = sr;
    reepoch.epoch += 1;
    CHECK_FALSE(verify_signed_root(reepoch, key));

    auto proof = tree.prove_membership(CertId::from_u64(1));
    CHECK(verify_membership(proof, CertId::from_u64(1), anchor_for(key, sr.epoch, 0)).accepted());
    CHECK(verify_membership(proof, CertId::from_u64(1), anchor_for(key, sr.epoch + 1, 0)).reason == RejectReason::StaleRoot);
    CHECK(verify_membership(proof, CertId::from_u64(1), anchor_for(key, sr.epoch + 1, 1)).accepted());

    tree.insert({CertId::from_u64(2), 1});
    try {
        (void)tree.prove_membership(CertId::from_u64(1));
        FAIL("proof from an unsigned epoch");
    } catch (const TreeError& e) {
        CHECK(e.code() == TreeErrc::Unsigned);
    }
}

TEST_CASE("smallest stratum proof has one sentinel sibling") {
    auto plan = single_class_plan(2, 2);
    REQUIRE(plan.classes[0].leaf_depth == 1);
    RevocationTree tree(plan);
    tree.insert({CertId::from_u64(9), 0});
    auto key = test::test_key(5);
    tree.sign_root(key);
    auto proof = tree.prove_membership(CertId::from_u64(9));
    REQUIRE(proof.path.size() == 1);
    REQUIRE(proof.path[0].siblings.size() == 1);
    CHECK(proof.path[0].child_index == 0);
    CHECK(proof.path[0].siblings[0] == oracle::TreeModel::empty(1));
    CHECK(verify_membership(proof, CertId::from_u64(9), anchor_for(key, tree.epoch())).accepted());
}

TEST_CASE("proofs verify for every leaf and match the wire size model") {
    auto plan = three_class_plan();
    RevocationTree tree(plan);
    auto key = test::test_key(6);
    std::mt19937_64 rng(4);
    std::vector<CertificateId> certs;
    for (int cls = 1; cls <= 3; ++cls) {
        for (std::uint64_t i = 0; i < plan.find(cls)->capacity; ++i) {
            certs.push_back({test::random_cert_id(rng), cls});
        }
    }
    std::shuffle(certs.begin(), certs.end(), rng);
    for (const auto& c : certs) tree.insert(c);
    REQUIRE(tree.live_count() == 1000);
    tree.sign_root(key);

    std::map<int, std::size_t> size_by_class;
    for (const auto& c : certs) {
        auto proof = tree.prove_membership(c.id);
        const auto& cp = *plan.find(c.class_id);
        CHECK(proof.path.size() == static_cast<std::size_t>(cp.leaf_depth));
        auto wire = proof.serialize();
        CHECK(wire.size() == proof_wire_size(cp.leaf_depth, plan.k));
        size_by_class[c.class_id] = wire.size();
        auto back = MembershipProof::deserialize(wire);
        CHECK(back == proof);
        CHECK(verify_membership(back, c.id, anchor_for(key, tree.epoch())).accepted());
    }

    // cross-module: the planner's model predicts the query-weighted mean proof size
    double weighted = 0;
    for (const auto& cp : plan.classes) weighted += cp.query_weight * static_cast<double>(size_by_class[cp.class_id]);
    CHECK(planner::expected_proof_size(plan, wire_proof_model()) == doctest::Approx(weighted).epsilon(1e-12));
}

TEST_CASE("proofs reject a different certificate and single-bit mutations") {
    auto plan = three_class_plan(3);
    RevocationTree tree(plan);
    auto key = test::test_key(7);
    std::mt19937_64 rng(5);
    std::vector<CertificateId> certs;
    for (int i = 0; i < 200; ++i) {
        certs.push_back({test::random_cert_id(rng), i < 10 ? 1 : 3});
        tree.insert(certs.back());
    }
    tree.sign_root(key);
    const auto anchor = anchor_for(key, tree.epoch());

    auto proof_a = tree.prove_membership(certs[0].id);
    CHECK(verify_membership(proof_a, certs[1].id, anchor).reason == RejectReason::Leaf);

    for (int trial = 0; trial < 300; ++trial) {
        const auto& c = certs[rng() % certs.size()];
        auto wire = tree.prove_membership(c.id).serialize();
        const auto bit = rng() % (wire.size() * 8);
        wire[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
        try {
            auto mutated = MembershipProof::deserialize(wire);
            CHECK_FALSE(verify_membership(mutated, c.id, anchor).accepted());
        } catch (const DecodeError&) {
        }
    }

    auto tampered = tree.prove_membership(certs[3].id);
    tampered.path[0].siblings[0][5] ^= 0x10;
    CHECK(verify_membership(tampered, certs[3].id, anchor).reason == RejectReason::Path);
    auto other_key = test::test_key(8);
    CHECK(verify_membership(tree.prove_membership(certs[3].id), certs[3].id, anchor_for(other_key, tree.epoch())).reason ==
          RejectReason::Signature);
}

TEST_CASE("proof decoding rejects structural damage") {
    auto plan = single_class_plan(64, 4);
    RevocationTree tree(plan);
    auto key = test::test_key(9);
    tree.insert({CertId::from_u64(1), 0});
    tree.sign_root(key);
    auto wire = tree.prove_membership(CertId::from_u64(1)).serialize();

    auto truncated = wire;
    truncated.pop_back();
    CHECK_THROWS_AS(MembershipProof::deserialize(truncated), DecodeError);
    auto trailing = wire;
    trailing.push_back(0);
    CHECK_THROWS_AS(MembershipProof::deserialize(trailing), DecodeError);
    auto version = wire;
    version[0] = 9;
    CHECK_THROWS_AS(MembershipProof::deserialize(version), DecodeError);
    CHECK_THROWS_AS(MembershipProof::deserialize({}), DecodeError);
}

TEST_CASE("incremental root equals rebuild after every random operation") {
    std::mt19937_64 rng(6);
    for (int seq = 0; seq < 15; ++seq) {
        auto plan = random_plan(rng);
        RevocationTree tree(plan);
        oracle::TreeModel model(plan);
        std::vector<CertId> live;
        const int ops = 1 + static_cast<int>(rng() % 200);
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
            REQUIRE(tree.root_digest() == model.root());
        }
    }
}

TEST_CASE("append cost is one duplexing call per level") {
    for (int k = 2; k <= 6; ++k) {
        auto plan = single_class_plan(300, k);
        const int depth = plan.classes[0].leaf_depth;
        RevocationTree tree(plan);
        for (std::uint64_t i = 0; i < 300; ++i) {
            tree.insert({CertId::from_u64(i), 0});
            CHECK(tree.last_op_duplex_calls() == static_cast<std::uint64_t>(depth));
        }
    }

    auto plan = three_class_plan(3);
    RevocationTree tree(plan);
    std::mt19937_64 rng(7);
    for (int i = 0; i < 500; ++i) {
        const int cls = 1 + static_cast<int>(rng() % 3);
        if (tree.stratum_size(cls) >= plan.find(cls)->capacity) continue;
        tree.insert({test::random_cert_id(rng), cls});
        CHECK(tree.last_op_duplex_calls() <= static_cast<std::uint64_t>(plan.find(cls)->leaf_depth * plan.k));
    }
}

TEST_CASE("delta replication") {
    auto plan = three_class_plan();
    auto key = test::test_key(10);
    RevocationTree ttp(plan);
    ttp.sign_root(key);
    RevocationTree replica = RevocationTree::from_snapshot(ttp.to_snapshot());
    std::mt19937_64 rng(8);
    std::vector<CertId> live;
    std::vector<TreeDelta> deltas;

    for (int i = 0; i < 50; ++i) {
        TreeDelta d;
        if (!live.empty() && rng() % 4 == 0) {
            d = ttp.remove(live.back());
            live.pop_back();
        } else {
            auto id = test::random_cert_id(rng);
            d = ttp.insert({id, 3});
            live.push_back(id);
        }
        d.new_signed_root = ttp.sign_root(key);
        deltas.push_back(d);
        CHECK(replica.apply_delta(d, key) == DeltaResult::Applied);
        CHECK(replica.root_digest() == ttp.root_digest());
    }
    CHECK(replica.apply_delta(deltas.back(), key) == DeltaResult::Duplicate);
    CHECK(replica.epoch() == ttp.epoch());

    SUBCASE("epoch gaps are reported") {
        auto d1 = ttp.insert({test::random_cert_id(rng), 1});
        d1.new_signed_root = ttp.sign_root(key);
        auto d2 = ttp.insert({test::random_cert_id(rng), 1});
        d2.new_signed_root = ttp.sign_root(key);
        try {
            replica.apply_delta(d2, key);
            FAIL("gap accepted");
        } catch (const TreeError& e) {
            CHECK(e.code() == TreeErrc::EpochGap);
        }
    }
    SUBCASE("dropped operations leave the replica unchanged") {
        const auto id_a = test::random_cert_id(rng);
        const auto id_b = test::random_cert_id(rng);
        const std::vector<TreeOp> ops = {{OpKind::Insert, {id_a, 2}}, {OpKind::Insert, {id_b, 2}}};
        auto d = ttp.apply_ops(ops);
        d.new_signed_root = ttp.sign_root(key);
        auto corrupt = d;
        corrupt.ops.pop_back();
        const auto before = replica.root_digest();
        try {
            replica.apply_delta(corrupt, key);
            FAIL("corrupt delta accepted");
        } catch (const TreeError& e) {
            CHECK(e.code() == TreeErrc::RootMismatch);
        }
        CHECK(replica.root_digest() == before);
        CHECK_FALSE(replica.contains(id_a));
        CHECK(replica.apply_delta(d, key) == DeltaResult::Applied);
        CHECK(replica.root_digest() == ttp.root_digest());
    }
    SUBCASE("forged signatures are rejected") {
        auto d = ttp.insert({test::random_cert_id(rng), 1});
        d.new_signed_root = sign_root(ttp.root_digest(), ttp.epoch(), test::test_key(99));
        try {
            replica.apply_delta(d, key);
            FAIL("forged delta accepted");
        } catch (const TreeError& e) {
            CHECK(e.code() == TreeErrc::BadSignature);
        }
    }
}

TEST_CASE("compaction") {
    auto plan = three_class_plan();
    RevocationTree tree(plan);
    oracle::TreeModel model(plan);
    std::vector<CertId> truck;
    for (std::uint64_t i = 0; i < 8; ++i) {
        tree.insert({CertId::from_u64(100 + i), 2});
        model.insert(CertId::from_u64(100 + i), 2);
        truck.push_back(CertId::from_u64(100 + i));
    }
    for (std::uint64_t i = 0; i < 40; ++i) {
        tree.insert({CertId::from_u64(500 + i), 3});
        model.insert(CertId::from_u64(500 + i), 3);
    }
    for (const auto& id : truck) {
        tree.remove(id);
        model.remove(id);
    }
    const auto private_before = model.stratum_digest(3);
    const auto epoch = tree.epoch();

    auto compacted = tree.compact();
    model.compact();
    CHECK(compacted.stratum_size(2) == 0);
    CHECK(compacted.root_digest() == model.root());
    CHECK(model.stratum_digest(3) == private_before);
    CHECK(model.stratum_digest(2) == oracle::TreeModel::empty(plan.find(2)->code_depth));
    CHECK(compacted.epoch() == epoch + 1);
    CHECK(compacted.compact().root_digest() == compacted.root_digest());
    CHECK(compacted.live_count() == tree.live_count());
    for (std::uint64_t i = 0; i < 40; ++i) CHECK(compacted.contains(CertId::from_u64(500 + i)));
}

TEST_CASE("snapshot round trip") {
    auto plan = three_class_plan(4);
    RevocationTree tree(plan);
    auto key = test::test_key(11);
    std::mt19937_64 rng(9);
    std::vector<CertId> ids;
    for (int i = 0; i < 60; ++i) {
        ids.push_back(test::random_cert_id(rng));
        tree.insert({ids.back(), i < 10 ? 1 : (i < 30 ? 2 : 3)});
    }
    tree.remove(ids[4]);
    tree.remove(ids[17]);
    tree.sign_root(key);

    auto bytes = tree.to_snapshot();
    CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "HRT1");
    auto back = RevocationTree::from_snapshot(bytes);
    CHECK(back.root_digest() == tree.root_digest());
    CHECK(back.epoch() == tree.epoch());
    CHECK(back.to_snapshot() == bytes);
    CHECK(back.current_signed_root() == tree.current_signed_root());

    auto bad_magic = bytes;
    bad_magic[0] = 'X';
    CHECK_THROWS_AS(RevocationTree::from_snapshot(bad_magic), TreeError);

    // flip a byte of the last record's id: records no longer match the signed root
    auto tampered = bytes;
    tampered[bytes.size() - 8 - SignedRoot::kWireBytes - 2] ^= 0x01;
    try {
        RevocationTree::from_snapshot(tampered);
        FAIL("tampered snapshot accepted");
    } catch (const TreeError& e) {
        CHECK(e.code() == TreeErrc::RootMismatch);
    }
    CHECK_THROWS_AS(RevocationTree::from_snapshot(Bytes(bytes.begin(), bytes.end() - 3)), TreeError);
}

TEST_CASE("leaf and internal digests are domain separated") {
    std::mt19937_64 rng(10);
    std::set<Digest> leaves;
    std::set<Digest> internal;
    for (int i = 0; i < 500; ++i) {
        auto id = test::random_cert_id(rng);
        leaves.insert(nodehash::leaf_digest({id, static_cast<int>(rng() % 4)}));
        std::vector<Digest> children(2 + rng() % 3);
        for (auto& c : children) {
            auto raw = test::random_bytes(rng, 32);
            std::copy(raw.begin(), raw.end(), c.begin());
        }
        internal.insert(nodehash::internal_digest(static_cast<int>(rng() % 10), children));
    }
    for (const auto& d : leaves) CHECK_FALSE(internal.contains(d));
    CHECK(nodehash::leaf_digest({CertId::from_u64(1), 0}) != nodehash::leaf_digest({CertId::from_u64(1), 1}));
}

TEST_CASE("certificate ids") {
    CHECK(CertId::from_hex("ff").bytes()[28] == 0xff);
    CHECK(CertId::from_hex("0x01").to_hex().size() == 58);
    CHECK_THROWS_AS(CertId::from_hex(std::string(58, 'f')), std::invalid_argument);
    CHECK_NOTHROW(CertId::from_hex("0" + std::string(57, 'f')));
    CHECK_THROWS_AS(CertId::from_hex(std::string(59, '0')), std::invalid_argument);
    CHECK_THROWS_AS(CertId::from_hex("xyz"), std::invalid_argument);
    CHECK(CertId::from_u64(1) < CertId::from_u64(2));
}
