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

// Pluggable signing contract: sign(bytes) -> 32-byte tag, verify(bytes, tag).

#include "huffrev/bytes.hpp"

namespace huffrev {

using SignatureTag = Digest;

class Signer {
  public:
    virtual ~Signer() = default;
    [[nodiscard]] virtual SignatureTag sign(ByteView message) const = 0;
};

class SignatureVerifier {
  public:
    virtual ~SignatureVerifier() = default;
    [[nodiscard]] virtual bool verify(ByteView message, const SignatureTag& tag) const = 0;
};

/// Keyed duplex MAC: the key and message length are absorbed in the first
/// duplexing call, then the message in 64-byte chunks; the tag is the output
/// of the last call. Symmetric, so the same object both signs and verifies.
class DuplexMac final : public Signer, public SignatureVerifier {
  public:
    using Key = std::array<std::uint8_t, 32>;

    explicit DuplexMac(const Key& key) : key_(key) {}
    //! Throws std::invalid_argument unless hex decodes to 32 bytes.
    static DuplexMac from_hex(std::string_view hex);

    [[nodiscard]] SignatureTag sign(ByteView message) const override;
    [[nodiscard]] bool verify(ByteView message, const SignatureTag& tag) const override;

  private:
    Key key_;
};

}  // namespace huffrev
