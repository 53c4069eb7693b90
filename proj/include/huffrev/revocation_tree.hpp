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

// Stratified k-ary hash tree of revoked certificates.
//
// The top of the tree is the k-ary Huffman code over vehicle classes; each
// class anchors a complete k-ary subtree (its stratum) sized to the class
// capacity. Leaves are appended left to right inside a stratum. Every
// internal node keeps one duplex snapshot per absorbed child so that a change
// at child j only re-absorbs children j.. onwards.
//
// Single writer, many readers: const member functions never mutate and may
// run concurrently; insert/remove/apply_delta must be externally serialized.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "huffrev/bytes.hpp"
#include "huffrev/cert.hpp"
#include "huffrev/keccak.hpp"
#include "huffrev/planner.hpp"
#include "huffrev/proof.hpp"
#include "huffrev/signature.hpp"

namespace huffrev {

enum class TreeErrc {
    DuplicateCertificate,
    StratumFull,
    UnknownClass,
    NotFound,
    Unsigned,
    EpochGap,
    RootMismatch,
    BadSignature,
    MalformedSnapshot,
};

std::string_view errc_name(TreeErrc code);

class TreeError : public std::runtime_error {
  public:
    TreeError(TreeErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    [[nodiscard]] TreeErrc code() const { return code_; }

  private:
    TreeErrc code_;
};

enum class OpKind : std::uint8_t { Insert = 1, Remove = 2 };

struct TreeOp {
    OpKind kind = OpKind::Insert;
    CertificateId cert;  // class_id is informational for Remove

    bool operator==(const TreeOp&) const = default;
};

struct TreeDelta {
    std::uint64_t epoch = 0;
    std::vector<TreeOp> ops;
    SignedRoot new_signed_root;

    bool operator==(const TreeDelta&) const = default;
};

enum class DeltaResult { Applied, Duplicate };

struct LeafRecord {
    CertId id;
    bool live = true;

    bool operator==(const LeafRecord&) const = default;
};

class RevocationTree {
  public:
    explicit RevocationTree(planner::HuffmanPlan plan);

    [[nodiscard]] const planner::HuffmanPlan& plan() const { return plan_; }
    [[nodiscard]] int arity() const { return plan_.k; }
    [[nodiscard]] std::uint64_t epoch() const { return epoch_; }
    [[nodiscard]] Digest root_digest() const;

    //! Appends one leaf; one epoch step. The returned delta carries the unsigned new root.
    TreeDelta insert(const CertificateId& cert);
    //! Tombstones a live leaf; one epoch step.
    TreeDelta remove(const CertId& id);
    //! Applies several operations as a single epoch step. Strong guarantee on failure.
    TreeDelta apply_ops(std::span<const TreeOp> ops);

    //! Signs (root, epoch), remembers it and returns it.
    const SignedRoot& sign_root(const Signer& signer);
    [[nodiscard]] const std::optional<SignedRoot>& signed_root() const { return signed_root_; }
    //! Signed root for the current epoch; throws TreeError(Unsigned) if the tree changed since signing.
    [[nodiscard]] const SignedRoot& current_signed_root() const;

    [[nodiscard]] bool contains(const CertId& id) const { return live_.contains(id); }
    [[nodiscard]] std::optional<int> class_of(const CertId& id) const;
    [[nodiscard]] std::size_t live_count() const { return live_.size(); }
    [[nodiscard]] std::size_t stratum_size(int class_id) const;
    [[nodiscard]] const std::vector<LeafRecord>& stratum_records(int class_id) const;

    //! Throws TreeError(NotFound) for ids that are not live, TreeError(Unsigned) before signing.
    [[nodiscard]] MembershipProof prove_membership(const CertId& id) const;

    /// Replays a delta from the TTP. Deltas at or below the current epoch are
    /// duplicates and are ignored. On any error the tree is left unchanged.
    DeltaResult apply_delta(const TreeDelta& delta, const SignatureVerifier& ttp);

    //! Rebuilds every stratum from its live leaves in insertion order; one epoch step.
    [[nodiscard]] RevocationTree compact() const;

    //! Root from a bottom-up recomputation that ignores every cached snapshot.
    [[nodiscard]] Digest recompute_root(std::uint64_t* duplex_calls = nullptr) const;

    //! Duplexing calls issued by node updates since construction / by the last mutation.
    [[nodiscard]] std::uint64_t duplex_calls() const { return total_calls_; }
    [[nodiscard]] std::uint64_t last_op_duplex_calls() const { return last_op_calls_; }

    /// Binary snapshot: "HRT1", u32 plan JSON length, plan JSON, then for each
    /// class in plan order a u64 record count and records (29-byte id,
    /// 1-byte liveness), then u64 epoch and the signed root.
    [[nodiscard]] Bytes to_snapshot() const;
    //! Throws TreeError(MalformedSnapshot) or TreeError(RootMismatch).
    static RevocationTree from_snapshot(ByteView bytes);

  private:
    struct Stratum {
        int class_id = 0;
        std::vector<int> anchor;  // child indices from the root to the stratum anchor
        int subtree_depth = 0;
        std::uint64_t capacity = 0;
        std::vector<LeafRecord> records;  // slot order
    };

    struct Node {
        bool leaf = false;
        int level = 0;
        Digest digest{};
        std::vector<std::int32_t> children;               // internal only; -1 marks an empty slot
        std::vector<keccak::DuplexContext> snapshots;     // snapshot j: after absorbing child j
    };

    struct Slot {
        std::size_t stratum = 0;
        std::uint64_t index = 0;
    };

    [[nodiscard]] std::vector<int> slot_path(const Stratum& s, std::uint64_t slot) const;
    [[nodiscard]] std::size_t stratum_index(int class_id) const;
    [[nodiscard]] Digest child_digest(const Node& n, int j) const;

    void append_leaf(std::size_t stratum, const CertificateId& cert);
    void tombstone(const CertId& id);
    void update_path(const std::vector<int>& path, const Digest& leaf_digest, bool create);
    void recompute_node(std::int32_t node, int changed);
    void insert_unchecked(const CertificateId& cert);

    [[nodiscard]] Digest recompute_subtree(const std::vector<int>& prefix, std::uint64_t* calls) const;

    planner::HuffmanPlan plan_;
    std::vector<Stratum> strata_;  // plan class order
    int max_depth_ = 0;
    std::vector<Digest> empty_;                       // per level
    std::vector<keccak::DuplexContext> headers_;      // per level

    std::vector<Node> nodes_;
    std::int32_t root_ = -1;
    std::map<CertId, Slot> live_;

    std::uint64_t epoch_ = 0;
    std::optional<SignedRoot> signed_root_;
    std::uint64_t total_calls_ = 0;
    std::uint64_t last_op_calls_ = 0;
};

}  // namespace huffrev
