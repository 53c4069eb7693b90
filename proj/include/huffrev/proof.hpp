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

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "huffrev/bytes.hpp"
#include "huffrev/cert.hpp"
#include "huffrev/planner.hpp"
#include "huffrev/signature.hpp"

namespace huffrev {

struct SignedRoot {
    Digest root_digest{};
    std::uint64_t epoch = 0;
    SignatureTag signature{};

    //! root_digest || epoch (8-byte big-endian): the bytes the TTP signs.
    [[nodiscard]] Bytes signed_message() const;

    static constexpr std::size_t kWireBytes = 32 + 8 + 32;
    void encode(ByteWriter& w) const;
    static SignedRoot decode(ByteReader& r);

    bool operator==(const SignedRoot&) const = default;
};

SignedRoot sign_root(const Digest& root, std::uint64_t epoch, const Signer& signer);
bool verify_signed_root(const SignedRoot& root, const SignatureVerifier& verifier);

//! One level of a membership path: the parent's children in order, minus the subject.
struct PathLevel {
    int child_index = 0;
    std::vector<Digest> siblings;  // k - 1 digests; the subject sits at child_index

    bool operator==(const PathLevel&) const = default;
};

/// Revocation proof. `path` runs from the leaf's parent up to the root;
/// path[i] describes the node at depth path.size() - 1 - i.
struct MembershipProof {
    static constexpr std::uint8_t kVersion = 1;
    //! version + id + class + path length + signed root
    static constexpr std::size_t kFramingBytes = 1 + kCertIdBytes + 1 + 2 + SignedRoot::kWireBytes;

    CertificateId cert;
    std::vector<PathLevel> path;
    SignedRoot signed_root;

    [[nodiscard]] int arity() const { return path.empty() ? 0 : static_cast<int>(path.front().siblings.size()) + 1; }

    /// version(1) id(29) class(1) path_len(2) then per level
    /// child_index(1) siblings((k-1)*32), then the signed root (72).
    [[nodiscard]] Bytes serialize() const;
    //! Throws DecodeError on any structural problem.
    static MembershipProof deserialize(ByteView bytes);

    bool operator==(const MembershipProof&) const = default;
};

//! Serialized proof size for a leaf at `depth` in a k-ary tree.
constexpr std::size_t proof_wire_size(int depth, int k) {
    return MembershipProof::kFramingBytes + static_cast<std::size_t>(depth) * (1 + static_cast<std::size_t>(k - 1) * 32);
}

//! Planner model that reproduces proof_wire_size exactly.
inline planner::ProofSizeModel wire_proof_model() {
    return {.digest_bytes = 32, .overhead_bytes = static_cast<int>(MembershipProof::kFramingBytes), .per_level_bytes = 1};
}

enum class RejectReason {
    None,
    Malformed,
    Signature,
    StaleRoot,
    Leaf,
    Path,
};

std::string_view reason_name(RejectReason reason);

struct Verdict {
    RejectReason reason = RejectReason::None;

    [[nodiscard]] bool accepted() const { return reason == RejectReason::None; }
    explicit operator bool() const { return accepted(); }
};

//! What a verifier trusts: the TTP key plus a freshness window over epochs.
struct TrustAnchor {
    const SignatureVerifier* ttp = nullptr;
    //! Newest epoch this verifier has seen; roots older than newest - window are stale.
    std::uint64_t newest_epoch = 0;
    std::uint64_t window = 1;

    [[nodiscard]] bool fresh(std::uint64_t epoch) const { return epoch + window >= newest_epoch; }
};

/// Accepts iff the root signature verifies, the epoch is fresh, the proof is
/// about `cert_id`, and folding the path from the leaf digest reproduces the
/// signed root. Checks run in that order and the first failure is reported.
Verdict verify_membership(const MembershipProof& proof, const CertId& cert_id, const TrustAnchor& anchor);

//! Recomputes the root implied by a proof, or nullopt if the path is structurally invalid.
std::optional<Digest> fold_path(const CertificateId& cert, const std::vector<PathLevel>& path);

}  // namespace huffrev
