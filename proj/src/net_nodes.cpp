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

#include "huffrev/net/nodes.hpp"

#include <spdlog/spdlog.h>

namespace huffrev::net {

namespace {

Bytes error_frame(ErrorCode code, std::uint64_t request_id, std::string text) {
    return encode_frame(ErrorMessage{code, request_id, std::move(text)});
}

ErrorCode error_for(TreeErrc code) {
    switch (code) {
        case TreeErrc::DuplicateCertificate: return ErrorCode::Duplicate;
        case TreeErrc::NotFound: return ErrorCode::NotFound;
        default: return ErrorCode::Rejected;
    }
}

}  // namespace

// ---------------------------------------------------------------- RSU

RsuNode::RsuNode(const SignatureVerifier& ttp_key, const Signer& rsu_key, const Clock& clock, Transport* transport,
                 RsuOptions options)
    : ttp_key_(ttp_key), rsu_key_(rsu_key), clock_(clock), transport_(transport), options_(std::move(options)) {}

Bytes RsuNode::handle(ByteView frame) {
    Message msg;
    try {
        msg = decode_frame(frame);
    } catch (const MalformedFrame& e) {
        return error_frame(ErrorCode::BadRequest, 0, e.what());
    }

    if (const auto* q = std::get_if<QueryMessage>(&msg)) {
        try {
            return encode_frame(handle_query(*q));
        } catch (const NotBootstrapped& e) {
            return error_frame(ErrorCode::NotBootstrapped, q->request_id, e.what());
        }
    }
    if (const auto* d = std::get_if<DeltaMessage>(&msg)) {
        return encode_frame(Ack{handle_delta(d->delta)});
    }
    if (const auto* s = std::get_if<SnapshotMessage>(&msg)) {
        if (!install_snapshot(s->snapshot)) return error_frame(ErrorCode::Rejected, 0, "snapshot rejected");
        return encode_frame(Ack{epoch()});
    }
    return error_frame(ErrorCode::BadRequest, 0, "unexpected message for a road side unit");
}

QueryResponse RsuNode::handle_query(const QueryMessage& msg) const {
    std::shared_lock lock(mu_);
    if (!tree_) throw NotBootstrapped();

    QueryResponse resp;
    resp.request_id = msg.request_id;
    resp.signed_root = tree_->current_signed_root();
    if (tree_->contains(msg.cert_id)) {
        resp.body = tree_->prove_membership(msg.cert_id);
    } else {
        NotRevokedStatement st;
        st.cert_id = msg.cert_id;
        st.root_digest = resp.signed_root.root_digest;
        st.epoch = resp.signed_root.epoch;
        st.timestamp = clock_.now();
        st.sign(rsu_key_);
        resp.body = st;
    }
    resp.sign(rsu_key_);
    spdlog::debug("rsu query id={} status={} epoch={}", msg.cert_id.to_hex(),
                  resp.status() == Status::Revoked ? "revoked" : "not_revoked", resp.signed_root.epoch);
    return resp;
}

std::uint64_t RsuNode::handle_delta(const TreeDelta& delta) {
    bool resync = false;
    {
        std::unique_lock lock(mu_);
        if (!tree_) {
            resync = true;
        } else {
            try {
                const auto result = tree_->apply_delta(delta, ttp_key_);
                spdlog::debug("rsu delta epoch={} {}", delta.epoch, result == DeltaResult::Applied ? "applied" : "duplicate");
            } catch (const TreeError& e) {
                spdlog::debug("rsu delta epoch={} rejected: {}", delta.epoch, e.what());
                resync = e.code() == TreeErrc::EpochGap || e.code() == TreeErrc::RootMismatch;
            }
        }
    }
    if (resync) request_snapshot();
    return epoch();
}

bool RsuNode::install_snapshot(ByteView snapshot) {
    std::optional<RevocationTree> incoming;
    try {
        incoming.emplace(RevocationTree::from_snapshot(snapshot));
    } catch (const TreeError& e) {
        spdlog::debug("rsu snapshot rejected: {}", e.what());
        return false;
    }
    const auto& sr = incoming->signed_root();
    if (!sr || sr->epoch != incoming->epoch() || !verify_signed_root(*sr, ttp_key_)) {
        spdlog::debug("rsu snapshot rejected: root not signed by the TTP");
        return false;
    }
    std::unique_lock lock(mu_);
    if (tree_ && tree_->epoch() > incoming->epoch()) return false;
    tree_.emplace(std::move(*incoming));
    spdlog::debug("rsu installed snapshot epoch={}", tree_->epoch());
    return true;
}

bool RsuNode::request_snapshot() {
    if (transport_ == nullptr || options_.ttp_address.empty()) return false;
    try {
        const auto reply = transport_->roundtrip(options_.ttp_address, encode_frame(SnapshotRequest{epoch()}), options_.timeout);
        const auto msg = decode_frame(reply);
        if (const auto* s = std::get_if<SnapshotMessage>(&msg)) return install_snapshot(s->snapshot);
    } catch (const TransportError& e) {
        spdlog::debug("rsu snapshot request failed: {}", e.what());
    } catch (const MalformedFrame& e) {
        spdlog::debug("rsu snapshot reply malformed: {}", e.what());
    }
    return false;
}

bool RsuNode::bootstrapped() const {
    std::shared_lock lock(mu_);
    return tree_.has_value();
}

std::uint64_t RsuNode::epoch() const {
    std::shared_lock lock(mu_);
    return tree_ ? tree_->epoch() : 0;
}

std::optional<Digest> RsuNode::root_digest() const {
    std::shared_lock lock(mu_);
    if (!tree_) return std::nullopt;
    return tree_->root_digest();
}

std::optional<Bytes> RsuNode::snapshot() const {
    std::shared_lock lock(mu_);
    if (!tree_) return std::nullopt;
    return tree_->to_snapshot();
}

// ---------------------------------------------------------------- TTP

TtpNode::TtpNode(RevocationTree tree, const Signer& ttp_key, const SignatureVerifier& admin_key, Transport& transport,
                 std::vector<std::string> roster, std::chrono::milliseconds timeout)
    : tree_(std::move(tree)),
      ttp_key_(ttp_key),
      admin_key_(admin_key),
      transport_(transport),
      roster_(std::move(roster)),
      timeout_(timeout) {
    const auto& sr = tree_.signed_root();
    if (!sr || sr->epoch != tree_.epoch()) tree_.sign_root(ttp_key_);
}

Bytes TtpNode::handle(ByteView frame) {
    Message msg;
    try {
        msg = decode_frame(frame);
    } catch (const MalformedFrame& e) {
        return error_frame(ErrorCode::BadRequest, 0, e.what());
    }

    if (std::holds_alternative<SnapshotRequest>(msg)) return encode_frame(SnapshotMessage{snapshot()});
    if (const auto* a = std::get_if<AdminRevoke>(&msg)) {
        if (!admin_key_.verify(a->authenticated_bytes(), a->admin_tag)) {
            return error_frame(ErrorCode::Unauthorized, a->request_id, "bad admin tag");
        }
        try {
            auto report = apply(std::span<const TreeOp>(&a->op, 1));
            for (const auto& f : report.failures) spdlog::warn("delivery to {} failed: {}", f.address, f.reason);
            return encode_frame(DeltaMessage{report.delta});
        } catch (const TreeError& e) {
            return error_frame(error_for(e.code()), a->request_id, e.what());
        }
    }
    return error_frame(ErrorCode::BadRequest, 0, "unexpected message for the TTP");
}

BroadcastReport TtpNode::revoke(const CertificateId& cert) {
    const TreeOp op{OpKind::Insert, cert};
    return apply(std::span<const TreeOp>(&op, 1));
}

BroadcastReport TtpNode::apply(std::span<const TreeOp> ops) {
    TreeDelta delta;
    {
        std::lock_guard lock(mu_);
        delta = tree_.apply_ops(ops);
        delta.new_signed_root = tree_.sign_root(ttp_key_);
    }
    spdlog::debug("ttp epoch={} ops={}", delta.epoch, delta.ops.size());
    return broadcast(delta);
}

Bytes TtpNode::push(const std::string& address, const Message& m) {
    return transport_.roundtrip(address, encode_frame(m), timeout_);
}

BroadcastReport TtpNode::broadcast(const TreeDelta& delta) {
    BroadcastReport report;
    report.delta = delta;
    for (const auto& address : roster_) {
        try {
            const auto reply = decode_frame(push(address, DeltaMessage{delta}));
            const auto* ack = std::get_if<Ack>(&reply);
            if (ack != nullptr && ack->epoch >= delta.epoch) continue;
            if (auto failure = bootstrap(address)) {
                report.failures.push_back(*failure);
            } else {
                report.resynced.push_back(address);
            }
        } catch (const TransportError& e) {
            report.failures.push_back({address, e.what()});
        } catch (const MalformedFrame& e) {
            report.failures.push_back({address, std::string("malformed reply: ") + e.what()});
        }
    }
    return report;
}

std::optional<DeliveryFailure> TtpNode::bootstrap(const std::string& address) {
    const auto target = epoch();
    try {
        const auto reply = decode_frame(push(address, SnapshotMessage{snapshot()}));
        const auto* ack = std::get_if<Ack>(&reply);
        if (ack != nullptr && ack->epoch >= target) return std::nullopt;
        if (const auto* err = std::get_if<ErrorMessage>(&reply)) return DeliveryFailure{address, err->text};
        return DeliveryFailure{address, "snapshot not acknowledged"};
    } catch (const TransportError& e) {
        return DeliveryFailure{address, e.what()};
    } catch (const MalformedFrame& e) {
        return DeliveryFailure{address, std::string("malformed reply: ") + e.what()};
    }
}

std::vector<DeliveryFailure> TtpNode::bootstrap_all() {
    std::vector<DeliveryFailure> failures;
    for (const auto& address : roster_) {
        if (auto f = bootstrap(address)) failures.push_back(*f);
    }
    return failures;
}

std::uint64_t TtpNode::epoch() const {
    std::lock_guard lock(mu_);
    return tree_.epoch();
}

Digest TtpNode::root_digest() const {
    std::lock_guard lock(mu_);
    return tree_.root_digest();
}

Bytes TtpNode::snapshot() const {
    std::lock_guard lock(mu_);
    return tree_.to_snapshot();
}

// ---------------------------------------------------------------- vehicle

std::string QueryOutcome::describe() const {
    switch (outcome) {
        case Outcome::Revoked: return "revoked";
        case Outcome::NotRevoked: return "not_revoked";
        case Outcome::Distrust: return "distrust(" + reason + ")";
    }
    return "unknown";
}

VehicleClient::VehicleClient(const SignatureVerifier& ttp_key, std::map<std::string, const SignatureVerifier*> rsu_keys,
                             Transport& transport, const Clock& clock, VehicleOptions options)
    : ttp_key_(ttp_key), rsu_keys_(std::move(rsu_keys)), transport_(transport), clock_(clock), options_(options) {}

QueryOutcome VehicleClient::query(const std::string& rsu_address, const CertId& cert_id) {
    if (!rsu_keys_.contains(rsu_address)) return {Outcome::Distrust, "untrusted_rsu", 0};
    const QueryMessage q{next_request_++, cert_id};
    Bytes reply;
    try {
        reply = transport_.roundtrip(rsu_address, encode_frame(q), options_.timeout);
    } catch (const TransportError& e) {
        return {Outcome::Distrust, e.kind() == TransportError::Kind::Timeout ? "timeout" : "transport", 0};
    }
    return verify_reply(rsu_address, q, reply);
}

QueryOutcome VehicleClient::verify_reply(const std::string& rsu_address, const QueryMessage& query, ByteView reply) {
    auto distrust = [](std::string reason, std::uint64_t epoch = 0) {
        return QueryOutcome{Outcome::Distrust, std::move(reason), epoch};
    };

    const auto key_it = rsu_keys_.find(rsu_address);
    if (key_it == rsu_keys_.end() || key_it->second == nullptr) return distrust("untrusted_rsu");

    MsgType type;
    ByteView payload;
    try {
        std::tie(type, payload) = frame_envelope(reply);
    } catch (const MalformedFrame&) {
        return distrust("malformed");
    }
    if (type == MsgType::Error) return distrust("error");
    if (type != MsgType::Response || payload.size() < 32) return distrust("malformed");

    // the RSU tag covers the whole payload and is checked before the body is interpreted
    SignatureTag tag{};
    std::copy(payload.end() - 32, payload.end(), tag.begin());
    if (!key_it->second->verify(payload.first(payload.size() - 32), tag)) return distrust("signature");

    QueryResponse resp;
    try {
        resp = std::get<QueryResponse>(decode_frame(reply));
    } catch (const MalformedFrame&) {
        return distrust("malformed");
    }
    const auto& sr = resp.signed_root;
    if (resp.request_id != query.request_id) return distrust("mismatch", sr.epoch);
    if (!verify_signed_root(sr, ttp_key_)) return distrust("signature", sr.epoch);

    const TrustAnchor anchor{&ttp_key_, newest_epoch_, options_.window};
    if (!anchor.fresh(sr.epoch)) return distrust("stale_root", sr.epoch);
    newest_epoch_ = std::max(newest_epoch_, sr.epoch);

    if (const auto* proof = std::get_if<MembershipProof>(&resp.body)) {
        if (proof->signed_root != sr) return distrust("mismatch", sr.epoch);
        const auto verdict = verify_membership(*proof, query.cert_id, anchor);
        if (!verdict) return distrust(std::string(reason_name(verdict.reason)), sr.epoch);
        last_proof_ = *proof;
        return {Outcome::Revoked, "", sr.epoch};
    }

    const auto& st = std::get<NotRevokedStatement>(resp.body);
    if (st.cert_id != query.cert_id || st.root_digest != sr.root_digest || st.epoch != sr.epoch) {
        return distrust("mismatch", sr.epoch);
    }
    if (!st.verify(*key_it->second)) return distrust("signature", sr.epoch);
    const auto now = clock_.now();
    const auto age = now >= st.timestamp ? now - st.timestamp : st.timestamp - now;
    if (age > options_.max_statement_age) return distrust("stale_statement", sr.epoch);
    return {Outcome::NotRevoked, "", sr.epoch};
}

}  // namespace huffrev::net
