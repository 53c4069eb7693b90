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

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "huffrev/net/messages.hpp"
#include "huffrev/net/transport.hpp"
#include "huffrev/revocation_tree.hpp"

namespace huffrev::net {

inline constexpr std::chrono::milliseconds kDefaultTimeout{2000};

class NotBootstrapped : public std::runtime_error {
  public:
    NotBootstrapped() : std::runtime_error("road side unit has no tree replica yet") {}
};

struct RsuOptions {
    std::string ttp_address;  // empty: never request snapshots
    std::chrono::milliseconds timeout = kDefaultTimeout;
};

/// Road side unit: a read-mostly replica of the revocation tree.
///
/// Queries take a shared lock and may run concurrently; deltas and snapshots
/// take the exclusive lock. When a delta reveals an epoch gap the RSU asks
/// the TTP for a fresh snapshot.
class RsuNode final : public FrameHandler {
  public:
    RsuNode(const SignatureVerifier& ttp_key, const Signer& rsu_key, const Clock& clock, Transport* transport = nullptr,
            RsuOptions options = {});

    Bytes handle(ByteView frame) override;

    //! Throws NotBootstrapped.
    QueryResponse handle_query(const QueryMessage& msg) const;

    /// Applies a delta; on an epoch gap or replay failure falls back to a
    /// snapshot request. Returns the replica epoch afterwards.
    std::uint64_t handle_delta(const TreeDelta& delta);

    //! Installs a snapshot if its root is TTP-signed and not older than the replica. Returns success.
    bool install_snapshot(ByteView snapshot);

    //! Pulls a snapshot from the TTP. Returns success.
    bool request_snapshot();

    [[nodiscard]] bool bootstrapped() const;
    [[nodiscard]] std::uint64_t epoch() const;
    [[nodiscard]] std::optional<Digest> root_digest() const;
    [[nodiscard]] std::optional<Bytes> snapshot() const;

  private:
    const SignatureVerifier& ttp_key_;
    const Signer& rsu_key_;
    const Clock& clock_;
    Transport* transport_;
    RsuOptions options_;
    mutable std::shared_mutex mu_;
    std::optional<RevocationTree> tree_;
};

struct DeliveryFailure {
    std::string address;
    std::string reason;
};

struct BroadcastReport {
    TreeDelta delta;
    std::vector<DeliveryFailure> failures;
    //! RSUs that needed a snapshot push to catch up.
    std::vector<std::string> resynced;
};

/// Trusted third party: sole writer of the authoritative tree. Mutations run
/// under a mutex; broadcasts happen after the lock is released so RSUs may
/// call back with snapshot requests.
class TtpNode final : public FrameHandler {
  public:
    TtpNode(RevocationTree tree, const Signer& ttp_key, const SignatureVerifier& admin_key, Transport& transport,
            std::vector<std::string> roster, std::chrono::milliseconds timeout = kDefaultTimeout);

    Bytes handle(ByteView frame) override;

    //! Inserts, signs and broadcasts. Tree errors propagate; delivery failures are reported.
    BroadcastReport revoke(const CertificateId& cert);
    BroadcastReport apply(std::span<const TreeOp> ops);

    //! Delivers a delta to every RSU in the roster (at least once per call).
    BroadcastReport broadcast(const TreeDelta& delta);

    //! Pushes the current snapshot; returns the failures.
    std::vector<DeliveryFailure> bootstrap_all();
    std::optional<DeliveryFailure> bootstrap(const std::string& address);

    [[nodiscard]] std::uint64_t epoch() const;
    [[nodiscard]] Digest root_digest() const;
    [[nodiscard]] Bytes snapshot() const;
    [[nodiscard]] const std::vector<std::string>& roster() const { return roster_; }

  private:
    Bytes push(const std::string& address, const Message& m);

    mutable std::mutex mu_;
    RevocationTree tree_;
    const Signer& ttp_key_;
    const SignatureVerifier& admin_key_;
    Transport& transport_;
    std::vector<std::string> roster_;
    std::chrono::milliseconds timeout_;
};

enum class Outcome { Revoked, NotRevoked, Distrust };

struct QueryOutcome {
    Outcome outcome = Outcome::Distrust;
    //! Failed check for Distrust: timeout, transport, malformed, error, mismatch, signature, stale_root, leaf, path.
    std::string reason;
    std::uint64_t epoch = 0;

    [[nodiscard]] std::string describe() const;
};

struct VehicleOptions {
    std::uint64_t window = 1;
    std::chrono::milliseconds timeout = kDefaultTimeout;
    //! Maximum age in seconds of a not-revoked statement.
    std::uint64_t max_statement_age = 300;
};

/// Vehicle: trusts the TTP root key and one response key per RSU, remembers
/// the newest epoch it has seen, and verifies every answer.
class VehicleClient {
  public:
    VehicleClient(const SignatureVerifier& ttp_key, std::map<std::string, const SignatureVerifier*> rsu_keys,
                  Transport& transport, const Clock& clock, VehicleOptions options = {});

    QueryOutcome query(const std::string& rsu_address, const CertId& cert_id);

    //! Checks a reply frame against the query that produced it; exposed for tamper tests.
    QueryOutcome verify_reply(const std::string& rsu_address, const QueryMessage& query, ByteView reply);

    [[nodiscard]] std::uint64_t newest_epoch() const { return newest_epoch_; }
    //! Proof carried by the last accepted revoked answer.
    [[nodiscard]] const std::optional<MembershipProof>& last_proof() const { return last_proof_; }

  private:
    const SignatureVerifier& ttp_key_;
    std::map<std::string, const SignatureVerifier*> rsu_keys_;
    Transport& transport_;
    const Clock& clock_;
    VehicleOptions options_;
    std::uint64_t next_request_ = 1;
    std::uint64_t newest_epoch_ = 0;
    std::optional<MembershipProof> last_proof_;
};

}  // namespace huffrev::net
