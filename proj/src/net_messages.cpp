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

#include "huffrev/net/messages.hpp"

namespace huffrev::net {

namespace {

bool known_type(std::uint8_t t) {
    return (t >= 0x01 && t <= 0x07) || t == 0xFF;
}

void encode_op(ByteWriter& w, const TreeOp& op) {
    w.u8(static_cast<std::uint8_t>(op.kind));
    w.raw(op.cert.id.bytes());
    w.u8(static_cast<std::uint8_t>(op.cert.class_id));
}

TreeOp decode_op(ByteReader& r) {
    TreeOp op;
    const auto kind = r.u8();
    if (kind != 1 && kind != 2) throw MalformedFrame("unknown operation kind");
    op.kind = static_cast<OpKind>(kind);
    op.cert.id = CertId::from_bytes(r.raw(kCertIdBytes));
    op.cert.class_id = r.u8();
    return op;
}

void encode_statement(ByteWriter& w, const NotRevokedStatement& s) {
    w.raw(s.cert_id.bytes());
    w.raw(s.root_digest);
    w.u64(s.epoch);
    w.u64(s.timestamp);
    w.raw(s.rsu_signature);
}

NotRevokedStatement decode_statement(ByteReader& r) {
    NotRevokedStatement s;
    s.cert_id = CertId::from_bytes(r.raw(kCertIdBytes));
    s.root_digest = r.array<32>();
    s.epoch = r.u64();
    s.timestamp = r.u64();
    s.rsu_signature = r.array<32>();
    return s;
}

Bytes response_body(const QueryResponse& m) {
    if (const auto* proof = std::get_if<MembershipProof>(&m.body)) return proof->serialize();
    ByteWriter w;
    encode_statement(w, std::get<NotRevokedStatement>(m.body));
    return std::move(w).take();
}

void encode_response_head(ByteWriter& w, const QueryResponse& m) {
    w.u64(m.request_id);
    w.u8(static_cast<std::uint8_t>(m.status()));
    m.signed_root.encode(w);
    const auto body = response_body(m);
    w.u32(static_cast<std::uint32_t>(body.size()));
    w.raw(body);
}

void encode_admin_head(ByteWriter& w, const AdminRevoke& m) {
    w.u64(m.request_id);
    encode_op(w, m.op);
}

struct PayloadEncoder {
    ByteWriter& w;

    void operator()(const QueryMessage& m) const {
        w.u64(m.request_id);
        w.raw(m.cert_id.bytes());
    }
    void operator()(const QueryResponse& m) const {
        encode_response_head(w, m);
        w.raw(m.rsu_tag);
    }
    void operator()(const DeltaMessage& m) const {
        w.u64(m.delta.epoch);
        w.u32(static_cast<std::uint32_t>(m.delta.ops.size()));
        for (const auto& op : m.delta.ops) encode_op(w, op);
        m.delta.new_signed_root.encode(w);
    }
    void operator()(const SnapshotRequest& m) const { w.u64(m.have_epoch); }
    void operator()(const SnapshotMessage& m) const { w.raw(m.snapshot); }
    void operator()(const AdminRevoke& m) const {
        encode_admin_head(w, m);
        w.raw(m.admin_tag);
    }
    void operator()(const Ack& m) const { w.u64(m.epoch); }
    void operator()(const ErrorMessage& m) const {
        w.u8(static_cast<std::uint8_t>(m.code));
        w.u64(m.request_id);
        const auto len = std::min<std::size_t>(m.text.size(), 0xFFFF);
        w.u16(static_cast<std::uint16_t>(len));
        w.raw(ByteView(reinterpret_cast<const std::uint8_t*>(m.text.data()), len));
    }
};

Message decode_payload(MsgType type, ByteView payload) {
    ByteReader r(payload);
    Message out;
    switch (type) {
        case MsgType::Query: {
            QueryMessage m;
            m.request_id = r.u64();
            m.cert_id = CertId::from_bytes(r.raw(kCertIdBytes));
            out = m;
            break;
        }
        case MsgType::Response: {
            QueryResponse m;
            m.request_id = r.u64();
            const auto status = r.u8();
            m.signed_root = SignedRoot::decode(r);
            const auto body_len = r.u32();
            if (body_len > r.remaining()) throw MalformedFrame("response body overruns frame");
            auto body = r.raw(body_len);
            if (status == static_cast<std::uint8_t>(Status::Revoked)) {
                m.body = MembershipProof::deserialize(body);
            } else if (status == static_cast<std::uint8_t>(Status::NotRevoked)) {
                ByteReader br(body);
                m.body = decode_statement(br);
                br.expect_end();
            } else {
                throw MalformedFrame("unknown response status");
            }
            m.rsu_tag = r.array<32>();
            out = std::move(m);
            break;
        }
        case MsgType::Delta: {
            DeltaMessage m;
            m.delta.epoch = r.u64();
            const auto count = r.u32();
            if (count > r.remaining() / 31) throw MalformedFrame("operation count overruns frame");
            m.delta.ops.reserve(count);
            for (std::uint32_t i = 0; i < count; ++i) m.delta.ops.push_back(decode_op(r));
            m.delta.new_signed_root = SignedRoot::decode(r);
            out = std::move(m);
            break;
        }
        case MsgType::SnapshotRequest:
            out = SnapshotRequest{r.u64()};
            break;
        case MsgType::Snapshot: {
            auto bytes = r.raw(r.remaining());
            out = SnapshotMessage{Bytes(bytes.begin(), bytes.end())};
            break;
        }
        case MsgType::AdminRevoke: {
            AdminRevoke m;
            m.request_id = r.u64();
            m.op = decode_op(r);
            m.admin_tag = r.array<32>();
            out = m;
            break;
        }
        case MsgType::Ack:
            out = Ack{r.u64()};
            break;
        case MsgType::Error: {
            ErrorMessage m;
            const auto code = r.u8();
            if (code < 1 || code > 7) throw MalformedFrame("unknown error code");
            m.code = static_cast<ErrorCode>(code);
            m.request_id = r.u64();
            auto text = r.raw(r.u16());
            m.text.assign(text.begin(), text.end());
            out = std::move(m);
            break;
        }
    }
    r.expect_end();
    return out;
}

}  // namespace

Bytes NotRevokedStatement::signed_message() const {
    ByteWriter w;
    w.raw(cert_id.bytes());
    w.raw(root_digest);
    w.u64(epoch);
    w.u64(timestamp);
    return std::move(w).take();
}

Bytes QueryResponse::authenticated_bytes() const {
    ByteWriter w;
    encode_response_head(w, *this);
    return std::move(w).take();
}

Bytes AdminRevoke::authenticated_bytes() const {
    ByteWriter w;
    encode_admin_head(w, *this);
    return std::move(w).take();
}

std::string_view error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::NotBootstrapped: return "not_bootstrapped";
        case ErrorCode::BadRequest: return "bad_request";
        case ErrorCode::Unauthorized: return "unauthorized";
        case ErrorCode::Duplicate: return "duplicate";
        case ErrorCode::NotFound: return "not_found";
        case ErrorCode::Rejected: return "rejected";
        case ErrorCode::Internal: return "internal";
    }
    return "unknown";
}

MsgType message_type(const Message& m) {
    static constexpr MsgType kTypes[] = {MsgType::Query,    MsgType::Response,    MsgType::Delta, MsgType::SnapshotRequest,
                                         MsgType::Snapshot, MsgType::AdminRevoke, MsgType::Ack,   MsgType::Error};
    return kTypes[m.index()];
}

Bytes encode_frame(const Message& m) {
    ByteWriter payload;
    std::visit(PayloadEncoder{payload}, m);
    const auto& body = payload.bytes();
    if (body.size() > kMaxPayloadBytes) throw std::length_error("frame payload too large");
    ByteWriter w;
    w.u32(static_cast<std::uint32_t>(body.size()));
    w.u8(static_cast<std::uint8_t>(message_type(m)));
    w.raw(body);
    return std::move(w).take();
}

std::uint32_t frame_payload_length(ByteView header) {
    if (header.size() < kFrameHeaderBytes) throw MalformedFrame("truncated frame header");
    ByteReader r(header.first(kFrameHeaderBytes));
    const auto len = r.u32();
    const auto type = r.u8();
    if (len > kMaxPayloadBytes) throw MalformedFrame("frame length exceeds limit");
    if (!known_type(type)) throw MalformedFrame("unknown message type");
    return len;
}

std::pair<MsgType, ByteView> frame_envelope(ByteView frame) {
    const auto len = frame_payload_length(frame);
    if (frame.size() != kFrameHeaderBytes + len) throw MalformedFrame("frame length mismatch");
    return {static_cast<MsgType>(frame[4]), frame.subspan(kFrameHeaderBytes)};
}

Message decode_frame(ByteView frame) {
    const auto [type, payload] = frame_envelope(frame);
    try {
        return decode_payload(type, payload);
    } catch (const DecodeError& e) {
        throw MalformedFrame(e.what());
    } catch (const std::invalid_argument& e) {
        throw MalformedFrame(e.what());
    }
}

}  // namespace huffrev::net
