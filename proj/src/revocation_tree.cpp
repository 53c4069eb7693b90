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

#include "huffrev/revocation_tree.hpp"

#include <algorithm>

#include "huffrev/node_hash.hpp"

namespace huffrev {

namespace {

constexpr std::uint8_t kSnapshotMagic[4] = {'H', 'R', 'T', '1'};

bool is_zero(const SignatureTag& tag) {
    return std::all_of(tag.begin(), tag.end(), [](std::uint8_t b) { return b == 0; });
}

unsigned __int128 ipow(int k, int e) {
    unsigned __int128 v = 1;
    for (int i = 0; i < e; ++i) v *= static_cast<unsigned>(k);
    return v;
}

}  // namespace

std::string_view errc_name(TreeErrc code) {
    switch (code) {
        case TreeErrc::DuplicateCertificate: return "DuplicateCertificate";
        case TreeErrc::StratumFull: return "StratumFull";
        case TreeErrc::UnknownClass: return "UnknownClass";
        case TreeErrc::NotFound: return "NotFound";
        case TreeErrc::Unsigned: return "Unsigned";
        case TreeErrc::EpochGap: return "EpochGap";
        case TreeErrc::RootMismatch: return "RootMismatch";
        case TreeErrc::BadSignature: return "BadSignature";
        case TreeErrc::MalformedSnapshot: return "MalformedSnapshot";
    }
    return "Unknown";
}

RevocationTree::RevocationTree(planner::HuffmanPlan plan) : plan_(std::move(plan)) {
    const auto anchors = planner::anchor_paths(plan_);
    for (std::size_t i = 0; i < plan_.classes.size(); ++i) {
        const auto& c = plan_.classes[i];
        strata_.push_back({c.class_id, anchors[i], c.subtree_depth, c.capacity, {}});
        max_depth_ = std::max(max_depth_, c.leaf_depth);
    }
    for (int level = 0; level <= max_depth_; ++level) {
        empty_.push_back(nodehash::empty_digest(level));
        if (level < max_depth_) headers_.push_back(nodehash::header_context(level, plan_.k));
    }
}

Digest RevocationTree::root_digest() const {
    if (root_ < 0) return nodehash::empty_tree_root(plan_);
    return nodes_[root_].digest;
}

std::size_t RevocationTree::stratum_index(int class_id) const {
    for (std::size_t i = 0; i < strata_.size(); ++i) {
        if (strata_[i].class_id == class_id) return i;
    }
    throw TreeError(TreeErrc::UnknownClass, "unknown vehicle class " + std::to_string(class_id));
}

std::optional<int> RevocationTree::class_of(const CertId& id) const {
    auto it = live_.find(id);
    if (it == live_.end()) return std::nullopt;
    return strata_[it->second.stratum].class_id;
}

std::size_t RevocationTree::stratum_size(int class_id) const { return strata_[stratum_index(class_id)].records.size(); }

const std::vector<LeafRecord>& RevocationTree::stratum_records(int class_id) const {
    return strata_[stratum_index(class_id)].records;
}

std::vector<int> RevocationTree::slot_path(const Stratum& s, std::uint64_t slot) const {
    std::vector<int> path = s.anchor;
    std::vector<int> digits(s.subtree_depth, 0);
    for (int i = s.subtree_depth - 1; i >= 0; --i) {
        digits[i] = static_cast<int>(slot % static_cast<std::uint64_t>(plan_.k));
        slot /= static_cast<std::uint64_t>(plan_.k);
    }
    path.insert(path.end(), digits.begin(), digits.end());
    return path;
}

Digest RevocationTree::child_digest(const Node& n, int j) const {
    const auto child = n.children[j];
    return child < 0 ? empty_[n.level + 1] : nodes_[child].digest;
}

void RevocationTree::recompute_node(std::int32_t index, int changed) {
    Node& n = nodes_[index];
    int last = -1;
    for (int j = plan_.k - 1; j >= 0; --j) {
        if (n.children[j] >= 0) {
            last = j;
            break;
        }
    }
    const int start = std::min(changed, static_cast<int>(n.snapshots.size()));
    keccak::DuplexContext ctx = start == 0 ? headers_[n.level] : n.snapshots[start - 1];
    n.snapshots.erase(n.snapshots.begin() + start, n.snapshots.end());

    Digest out{};
    for (int j = start; j <= last; ++j) {
        ctx.duplexing(child_digest(n, j), out);
        ++last_op_calls_;
        ++total_calls_;
        n.snapshots.push_back(ctx);
    }
    n.digest = n.snapshots.empty() ? empty_[n.level] : out;
}

void RevocationTree::update_path(const std::vector<int>& path, const Digest& leaf_digest, bool create) {
    auto new_node = [&](int level, bool leaf) {
        Node n;
        n.leaf = leaf;
        n.level = level;
        if (!leaf) n.children.assign(plan_.k, -1);
        nodes_.push_back(std::move(n));
        return static_cast<std::int32_t>(nodes_.size() - 1);
    };

    if (root_ < 0) {
        if (!create) throw std::logic_error("update_path on an empty tree");
        root_ = new_node(0, path.empty());
    }

    std::vector<std::pair<std::int32_t, int>> trail;
    std::int32_t cur = root_;
    for (std::size_t i = 0; i < path.size(); ++i) {
        const int j = path[i];
        trail.emplace_back(cur, j);
        std::int32_t child = nodes_[cur].children[j];
        if (child < 0) {
            if (!create) throw std::logic_error("update_path through an unmaterialized node");
            child = new_node(static_cast<int>(i) + 1, i + 1 == path.size());
            nodes_[cur].children[j] = child;
        }
        cur = child;
    }
    nodes_[cur].digest = leaf_digest;

    for (auto it = trail.rbegin(); it != trail.rend(); ++it) recompute_node(it->first, it->second);
}

void RevocationTree::append_leaf(std::size_t stratum, const CertificateId& cert) {
    auto& s = strata_[stratum];
    const std::uint64_t slot = s.records.size();
    s.records.push_back({cert.id, true});
    live_[cert.id] = {stratum, slot};
    update_path(slot_path(s, slot), nodehash::leaf_digest(cert), true);
}

void RevocationTree::insert_unchecked(const CertificateId& cert) {
    const std::size_t si = stratum_index(cert.class_id);
    if (live_.contains(cert.id)) {
        throw TreeError(TreeErrc::DuplicateCertificate, "certificate " + cert.id.to_hex() + " is already revoked");
    }
    if (strata_[si].records.size() >= strata_[si].capacity) {
        throw TreeError(TreeErrc::StratumFull,
                        "stratum for class " + std::to_string(cert.class_id) + " is at capacity; re-plan required");
    }
    append_leaf(si, cert);
}

void RevocationTree::tombstone(const CertId& id) {
    auto it = live_.find(id);
    if (it == live_.end()) throw TreeError(TreeErrc::NotFound, "certificate " + id.to_hex() + " is not revoked");
    const auto [si, slot] = it->second;
    auto& s = strata_[si];
    s.records[slot].live = false;
    live_.erase(it);
    update_path(slot_path(s, slot), nodehash::tombstone_digest(s.class_id, slot), false);
}

TreeDelta RevocationTree::insert(const CertificateId& cert) {
    last_op_calls_ = 0;
    insert_unchecked(cert);
    ++epoch_;
    return {epoch_, {{OpKind::Insert, cert}}, {root_digest(), epoch_, {}}};
}

TreeDelta RevocationTree::remove(const CertId& id) {
    last_op_calls_ = 0;
    const int class_id = class_of(id).value_or(0);
    tombstone(id);
    ++epoch_;
    return {epoch_, {{OpKind::Remove, {id, class_id}}}, {root_digest(), epoch_, {}}};
}

TreeDelta RevocationTree::apply_ops(std::span<const TreeOp> ops) {
    RevocationTree next = *this;
    next.last_op_calls_ = 0;
    for (const auto& op : ops) {
        if (op.kind == OpKind::Insert) {
            next.insert_unchecked(op.cert);
        } else {
            next.tombstone(op.cert.id);
        }
    }
    ++next.epoch_;
    *this = std::move(next);
    return {epoch_, {ops.begin(), ops.end()}, {root_digest(), epoch_, {}}};
}

const SignedRoot& RevocationTree::sign_root(const Signer& signer) {
    signed_root_ = huffrev::sign_root(root_digest(), epoch_, signer);
    return *signed_root_;
}

const SignedRoot& RevocationTree::current_signed_root() const {
    if (!signed_root_ || signed_root_->epoch != epoch_ || signed_root_->root_digest != root_digest()) {
        throw TreeError(TreeErrc::Unsigned, "tree root for epoch " + std::to_string(epoch_) + " is not signed");
    }
    return *signed_root_;
}

MembershipProof RevocationTree::prove_membership(const CertId& id) const {
    auto it = live_.find(id);
    if (it == live_.end()) throw TreeError(TreeErrc::NotFound, "certificate " + id.to_hex() + " is not revoked");
    const auto& s = strata_[it->second.stratum];

    MembershipProof proof;
    proof.cert = {id, s.class_id};
    proof.signed_root = current_signed_root();

    const auto path = slot_path(s, it->second.index);
    std::vector<std::pair<std::int32_t, int>> trail;
    std::int32_t cur = root_;
    for (int j : path) {
        trail.emplace_back(cur, j);
        cur = nodes_[cur].children[j];
    }
    for (auto t = trail.rbegin(); t != trail.rend(); ++t) {
        const Node& n = nodes_[t->first];
        PathLevel level;
        level.child_index = t->second;
        for (int j = 0; j < plan_.k; ++j) {
            if (j != t->second) level.siblings.push_back(child_digest(n, j));
        }
        proof.path.push_back(std::move(level));
    }
    return proof;
}

DeltaResult RevocationTree::apply_delta(const TreeDelta& delta, const SignatureVerifier& ttp) {
    if (delta.epoch <= epoch_) return DeltaResult::Duplicate;
    if (delta.epoch != epoch_ + 1) {
        throw TreeError(TreeErrc::EpochGap, "delta epoch " + std::to_string(delta.epoch) + " does not follow replica epoch " +
                                                std::to_string(epoch_));
    }
    if (delta.new_signed_root.epoch != delta.epoch || !verify_signed_root(delta.new_signed_root, ttp)) {
        throw TreeError(TreeErrc::BadSignature, "delta root signature does not verify");
    }

    RevocationTree next = *this;
    try {
        next.apply_ops(delta.ops);
    } catch (const TreeError& e) {
        throw TreeError(TreeErrc::RootMismatch, std::string("delta does not replay: ") + e.what());
    }
    if (next.root_digest() != delta.new_signed_root.root_digest) {
        throw TreeError(TreeErrc::RootMismatch, "replayed root differs from the signed root");
    }
    next.signed_root_ = delta.new_signed_root;
    *this = std::move(next);
    return DeltaResult::Applied;
}

RevocationTree RevocationTree::compact() const {
    RevocationTree out(plan_);
    for (const auto& s : strata_) {
        for (const auto& rec : s.records) {
            if (rec.live) out.insert_unchecked({rec.id, s.class_id});
        }
    }
    out.epoch_ = epoch_ + 1;
    out.last_op_calls_ = 0;
    out.total_calls_ = 0;
    return out;
}

Digest RevocationTree::recompute_subtree(const std::vector<int>& prefix, std::uint64_t* calls) const {
    const int level = static_cast<int>(prefix.size());
    bool any_stratum_below = false;
    for (const auto& s : strata_) {
        if (s.records.empty()) continue;
        const auto common = std::min(prefix.size(), s.anchor.size());
        if (!std::equal(prefix.begin(), prefix.begin() + static_cast<std::ptrdiff_t>(common), s.anchor.begin())) continue;

        if (prefix.size() < s.anchor.size()) {
            any_stratum_below = true;
            continue;
        }

        // inside this stratum's subtree
        const int consumed = level - static_cast<int>(s.anchor.size());
        unsigned __int128 first_slot = 0;
        for (std::size_t i = s.anchor.size(); i < prefix.size(); ++i) first_slot = first_slot * plan_.k + prefix[i];
        const int remaining = s.subtree_depth - consumed;
        first_slot *= ipow(plan_.k, remaining);
        if (first_slot >= s.records.size()) return empty_[level];
        if (remaining == 0) {
            const auto slot = static_cast<std::uint64_t>(first_slot);
            const auto& rec = s.records[slot];
            return rec.live ? nodehash::leaf_digest({rec.id, s.class_id}) : nodehash::tombstone_digest(s.class_id, slot);
        }
        any_stratum_below = true;
        break;
    }
    if (!any_stratum_below) return empty_[level];

    std::vector<Digest> children;
    auto child_prefix = prefix;
    child_prefix.push_back(0);
    for (int j = 0; j < plan_.k; ++j) {
        child_prefix.back() = j;
        children.push_back(recompute_subtree(child_prefix, calls));
    }
    return nodehash::internal_digest(level, children, calls);
}

Digest RevocationTree::recompute_root(std::uint64_t* duplex_calls) const {
    const bool empty = std::all_of(strata_.begin(), strata_.end(), [](const Stratum& s) { return s.records.empty(); });
    if (empty) return nodehash::empty_tree_root(plan_);
    return recompute_subtree({}, duplex_calls);
}

Bytes RevocationTree::to_snapshot() const {
    ByteWriter w;
    w.raw(kSnapshotMagic);
    const auto plan_json = planner::plan_to_json(plan_).dump();
    w.u32(static_cast<std::uint32_t>(plan_json.size()));
    w.raw(ByteView(reinterpret_cast<const std::uint8_t*>(plan_json.data()), plan_json.size()));
    for (const auto& s : strata_) {
        w.u64(s.records.size());
        for (const auto& rec : s.records) {
            w.raw(rec.id.bytes());
            w.u8(rec.live ? 1 : 0);
        }
    }
    w.u64(epoch_);
    const SignedRoot sr = signed_root_.value_or(SignedRoot{root_digest(), epoch_, {}});
    sr.encode(w);
    return std::move(w).take();
}

RevocationTree RevocationTree::from_snapshot(ByteView bytes) {
    try {
        ByteReader r(bytes);
        auto magic = r.raw(4);
        if (!std::equal(magic.begin(), magic.end(), std::begin(kSnapshotMagic))) {
            throw TreeError(TreeErrc::MalformedSnapshot, "not a tree snapshot (bad magic)");
        }
        const auto plan_len = r.u32();
        auto plan_bytes = r.raw(plan_len);
        auto plan_doc = nlohmann::json::parse(plan_bytes.begin(), plan_bytes.end());
        RevocationTree tree(planner::plan_from_json(plan_doc));

        for (std::size_t si = 0; si < tree.strata_.size(); ++si) {
            const auto count = r.u64();
            if (count > tree.strata_[si].capacity) throw TreeError(TreeErrc::MalformedSnapshot, "stratum over capacity");
            std::vector<std::uint64_t> dead;
            for (std::uint64_t slot = 0; slot < count; ++slot) {
                const auto id = CertId::from_bytes(r.raw(kCertIdBytes));
                const auto live = r.u8();
                if (live > 1) throw TreeError(TreeErrc::MalformedSnapshot, "bad liveness flag");
                if (tree.live_.contains(id)) throw TreeError(TreeErrc::MalformedSnapshot, "duplicate live certificate");
                tree.append_leaf(si, {id, tree.strata_[si].class_id});
                if (live == 0) tree.tombstone(id);
            }
        }
        tree.epoch_ = r.u64();
        const auto sr = SignedRoot::decode(r);
        r.expect_end();

        if (!is_zero(sr.signature)) {
            if (sr.epoch == tree.epoch_ && sr.root_digest != tree.root_digest()) {
                throw TreeError(TreeErrc::RootMismatch, "snapshot records do not match the signed root");
            }
            tree.signed_root_ = sr;
        }
        tree.last_op_calls_ = 0;
        tree.total_calls_ = 0;
        return tree;
    } catch (const DecodeError& e) {
        throw TreeError(TreeErrc::MalformedSnapshot, e.what());
    } catch (const std::invalid_argument& e) {
        throw TreeError(TreeErrc::MalformedSnapshot, e.what());
    } catch (const nlohmann::json::exception& e) {
        throw TreeError(TreeErrc::MalformedSnapshot, e.what());
    } catch (const planner::PlannerError& e) {
        throw TreeError(TreeErrc::MalformedSnapshot, e.what());
    }
}

}  // namespace huffrev
