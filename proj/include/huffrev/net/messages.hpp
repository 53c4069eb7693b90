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

// Wire messages exchanged between the TTP, road side units and vehicles.
//
// Frame: u32 big-endian payload length, u8 message type, payload.
//
//   0x01 query           request_id u64, cert id (29)
//   0x02 response        request_id u64, status u8, signed root (72),
//                        body length u32, body, RSU tag (32)
//   0x03 delta           epoch u64, op count u32, ops (kind u8, id 29, class u8),
//                        signed root (72)
//   0x04 snapshot req    epoch u64 the requester already holds
//   0x05 snapshot        tree snapshot bytes
//   0x06 admin revoke    request_id u64, kind u8, id 29, class u8, admin tag (32)
//   0x07 ack             epoch u64 after processing
//   0xFF error           code u8, request_id u64, text length u16, text

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>

#include "huffrev/bytes.hpp"
#include "huffrev/cert.hpp"
#include "huffrev/proof.hpp"
#include "huffrev/revocation_tree.hpp"
#include "huffrev/signature.hpp"

namespace huffrev::net {

enum class MsgType : std::uint8_t {
    Query = 0x01,
    Response = 0x02,
    Delta = 0x03,
    SnapshotRequest = 0x04,
    Snapshot = 0x05,
    AdminRevoke = 0x06,
    Ack = 0x07,
    Error = 0xFF,
};

inline constexpr std::size_t kFrameHeaderBytes = 5;
inline constexpr std::uint32_t kMaxPayloadBytes = 64u << 20;

class MalformedFrame : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct QueryMessage {
    std::uint64_t request_id = 0;
    CertId cert_id;
    bool operator==(const QueryMessage&) const = default;
};

enum class Status : std::uint8_t { Revoked = 1, NotRevoked = 2 };

struct NotRevokedStatement {
    static constexpr std::size_t kWireBytes = kCertIdBytes + 32 + 8 + 8 + 32;

    CertId cert_id;
    Digest root_digest{};
    std::uint64_t epoch = 0;
    std::uint64_t timestamp = 0;
    SignatureTag rsu_signature{};

    //! cert_id || root_digest || epoch || timestamp
    [[nodiscard]] Bytes signed_message() const;
    void sign(const Signer& rsu_key) { rsu_signature = rsu_key.sign(signed_message()); }
    [[nodiscard]] bool verify(const SignatureVerifier& rsu_key) const {
        return rsu_key.verify(signed_message(), rsu_signature);
    }
    bool operator==(const NotRevokedStatement&) const = default;
};

struct QueryResponse {
    std::uint64_t request_id = 0;
    SignedRoot signed_root;
    std::variant<MembershipProof, NotRevokedStatement> body;
    SignatureTag rsu_tag{};

    [[nodiscard]] Status status() const {
        return std::holds_alternative<MembershipProof>(body) ? Status::Revoked : Status::NotRevoked;
    }
    //! The payload bytes covered by rsu_tag: everything before the tag.
    [[nodiscard]] Bytes authenticated_bytes() const;
    void sign(const Signer& rsu_key) { rsu_tag = rsu_key.sign(authenticated_bytes()); }
    bool operator==(const QueryResponse&) const = default;
};

struct DeltaMessage {
    TreeDelta delta;
    bool operator==(const DeltaMessage&) const = default;
};

struct SnapshotRequest {
    std::uint64_t have_epoch = 0;
    bool operator==(const SnapshotRequest&) const = default;
};

struct SnapshotMessage {
    Bytes snapshot;
    bool operator==(const SnapshotMessage&) const = default;
};

//! Operator instruction to the TTP, authenticated with the admin key.
struct AdminRevoke {
    std::uint64_t request_id = 0;
    TreeOp op;
    SignatureTag admin_tag{};

    [[nodiscard]] Bytes authenticated_bytes() const;
    void sign(const Signer& admin_key) { admin_tag = admin_key.sign(authenticated_bytes()); }
    bool operator==(const AdminRevoke&) const = default;
};

struct Ack {
    std::uint64_t epoch = 0;
    bool operator==(const Ack&) const = default;
};

enum class ErrorCode : std::uint8_t {
    NotBootstrapped = 1,  // retryable
    BadRequest = 2,
    Unauthorized = 3,
    Duplicate = 4,
    NotFound = 5,
    Rejected = 6,
    Internal = 7,
};

std::string_view error_code_name(ErrorCode code);

struct ErrorMessage {
    ErrorCode code = ErrorCode::Internal;
    std::uint64_t request_id = 0;
    std::string text;
    bool operator==(const ErrorMessage&) const = default;
};

using Message = std::variant<QueryMessage, QueryResponse, DeltaMessage, SnapshotRequest, SnapshotMessage, AdminRevoke,
                             Ack, ErrorMessage>;

MsgType message_type(const Message& m);

Bytes encode_frame(const Message& m);

//! Decodes exactly one complete frame. Throws MalformedFrame on bad length, unknown type or trailing bytes.
Message decode_frame(ByteView frame);

//! Payload length announced by a frame header; validates the length bound and the type byte.
std::uint32_t frame_payload_length(ByteView header);

//! Splits a frame into (type, payload) after validating the header only.
std::pair<MsgType, ByteView> frame_envelope(ByteView frame);

}  // namespace huffrev::net
