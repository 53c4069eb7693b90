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

#include "huffrev/signature.hpp"

#include "huffrev/keccak.hpp"

namespace huffrev {

namespace {

constexpr std::uint8_t kMacTag = 0x05;
constexpr std::size_t kMacChunk = 64;

}  // namespace

DuplexMac DuplexMac::from_hex(std::string_view hex) {
    auto raw = huffrev::from_hex(hex);
    if (raw.size() != 32) throw std::invalid_argument("MAC key must be 32 bytes (64 hex digits)");
    Key key{};
    std::copy(raw.begin(), raw.end(), key.begin());
    return DuplexMac(key);
}

SignatureTag DuplexMac::sign(ByteView message) const {
    keccak::DuplexContext ctx;
    SignatureTag tag{};

    ByteWriter first;
    first.u8(kMacTag);
    first.raw(key_);
    first.u64(message.size());
    ctx.duplexing(first.bytes(), tag);

    for (std::size_t off = 0; off < message.size(); off += kMacChunk) {
        ctx.duplexing(message.subspan(off, std::min(kMacChunk, message.size() - off)), tag);
    }
    return tag;
}

bool DuplexMac::verify(ByteView message, const SignatureTag& tag) const {
    const auto expected = sign(message);
    std::uint8_t diff = 0;
    for (std::size_t i = 0; i < tag.size(); ++i) diff |= static_cast<std::uint8_t>(expected[i] ^ tag[i]);
    return diff == 0;
}

}  // namespace huffrev
