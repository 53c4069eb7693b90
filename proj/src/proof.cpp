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

#include "huffrev/proof.hpp"

#include "huffrev/node_hash.hpp"

namespace huffrev {

Bytes SignedRoot::signed_message() const {
    ByteWriter w;
    w.raw(root_digest);
    w.u64(epoch);
    return std::move(w).take();
}

void SignedRoot::encode(ByteWriter& w) const {
    w.raw(root_digest);
    w.u64(epoch);
    w.raw(signature);
}

SignedRoot SignedRoot::decode(ByteReader& r) {
    SignedRoot out;
    out.root_digest = r.array<32>();
    out.epoch = r.u64();
    out.signature = r.array<32>();
    return out;
}

SignedRoot sign_root(const Digest& root, std::uint64_t epoch, const Signer& signer) {
    SignedRoot out{root, epoch, {}};
    out.signature = signer.sign(out.signed_message());
    return out;
}

bool verify_signed_root(const SignedRoot& root, const SignatureVerifier& verifier) {
    return verifier.verify(root.signed_message(), root.signature);
}

Bytes MembershipProof::serialize() const {
    ByteWriter w;
    w.u8(kVersion);
    w.raw(cert.id.bytes());
    w.u8(static_cast<std::uint8_t>(cert.class_id));
    w.u16(static_cast<std::uint16_t>(path.size()));
    for (const auto& level : path) {
        w.u8(static_cast<std::uint8_t>(level.child_index));
        for (const auto& s : level.siblings) w.raw(s);
    }
    signed_root.encode(w);
    return std::move(w).take();
}

MembershipProof MembershipProof::deserialize(ByteView bytes) {
    ByteReader r(bytes);
    if (r.u8() != kVersion) throw DecodeError("unsupported proof version");
    MembershipProof proof;
    try {
        proof.cert.id = CertId::from_bytes(r.raw(kCertIdBytes));
    } catch (const std::invalid_argument& e) {
        throw DecodeError(e.what());
    }
    proof.cert.class_id = r.u8();
    const std::size_t levels = r.u16();

    // Arity is implied by the remaining length: levels * (1 + (k-1)*32) + 72.
    std::size_t siblings_per_level = 0;
    if (levels > 0) {
        if (r.remaining() < SignedRoot::kWireBytes) throw DecodeError("truncated proof");
        const std::size_t body = r.remaining() - SignedRoot::kWireBytes;
        if (body % levels != 0 || (body / levels) < 1 || (body / levels - 1) % 32 != 0) {
            throw DecodeError("proof path length does not match its size");
        }
        siblings_per_level = (body / levels - 1) / 32;
        if (siblings_per_level < 1 || siblings_per_level + 1 > static_cast<std::size_t>(planner::kMaxArity)) {
            throw DecodeError("proof arity out of range");
        }
    }
    for (std::size_t i = 0; i < levels; ++i) {
        PathLevel level;
        level.child_index = r.u8();
        if (static_cast<std::size_t>(level.child_index) > siblings_per_level) {
            throw DecodeError("child index out of range");
        }
        for (std::size_t j = 0; j < siblings_per_level; ++j) level.siblings.push_back(r.array<32>());
        proof.path.push_back(std::move(level));
    }
    proof.signed_root = SignedRoot::decode(r);
    r.expect_end();
    return proof;
}

std::string_view reason_name(RejectReason reason) {
    switch (reason) {
        case RejectReason::None: return "accepted";
        case RejectReason::Malformed: return "malformed";
        case RejectReason::Signature: return "signature";
        case RejectReason::StaleRoot: return "stale_root";
        case RejectReason::Leaf: return "leaf";
        case RejectReason::Path: return "path";
    }
    return "unknown";
}

std::optional<Digest> fold_path(const CertificateId& cert, const std::vector<PathLevel>& path) {
    if (cert.class_id < 0 || cert.class_id > planner::kMaxClassId) return std::nullopt;
    Digest current = nodehash::leaf_digest(cert);
    const int depth = static_cast<int>(path.size());
    if (depth > planner::kMaxDepth) return std::nullopt;
    const std::size_t arity = path.empty() ? 0 : path.front().siblings.size() + 1;

    std::vector<Digest> children;
    for (int i = 0; i < depth; ++i) {
        const auto& level = path[i];
        const int node_level = depth - 1 - i;
        if (level.siblings.size() + 1 != arity || arity < 2 || arity > planner::kMaxArity) return std::nullopt;
        if (level.child_index < 0 || static_cast<std::size_t>(level.child_index) >= arity) return std::nullopt;

        children.assign(level.siblings.begin(), level.siblings.end());
        children.insert(children.begin() + level.child_index, current);

        const Digest empty = nodehash::empty_digest(node_level + 1);
        const int last = std::max(nodehash::last_nonempty(children, empty), level.child_index);
        auto ctx = nodehash::header_context(node_level, static_cast<int>(arity));
        for (int j = 0; j <= last; ++j) ctx.duplexing(children[j], current);
    }
    return current;
}

Verdict verify_membership(const MembershipProof& proof, const CertId& cert_id, const TrustAnchor& anchor) {
    if (anchor.ttp == nullptr || !verify_signed_root(proof.signed_root, *anchor.ttp)) {
        return {RejectReason::Signature};
    }
    if (!anchor.fresh(proof.signed_root.epoch)) return {RejectReason::StaleRoot};
    if (proof.cert.id != cert_id) return {RejectReason::Leaf};

    auto root = fold_path(proof.cert, proof.path);
    if (!root || *root != proof.signed_root.root_digest) return {RejectReason::Path};
    return {};
}

}  // namespace huffrev
