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

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

#include "huffrev/bytes.hpp"

namespace huffrev {

inline constexpr std::size_t kCertIdBits = 228;
inline constexpr std::size_t kCertIdBytes = 29;

//! 228-bit certificate serial, stored as 29 big-endian bytes with the top nibble clear.
class CertId {
  public:
    using Storage = std::array<std::uint8_t, kCertIdBytes>;

    CertId() = default;

    //! Throws std::invalid_argument if the top 4 bits are set.
    static CertId from_bytes(ByteView bytes);
    //! Accepts up to 57 hex digits (or 58 with a leading 0); shorter input is left-padded.
    static CertId from_hex(std::string_view hex);
    static CertId from_u64(std::uint64_t v);

    [[nodiscard]] const Storage& bytes() const { return bytes_; }
    [[nodiscard]] std::string to_hex() const { return huffrev::to_hex(bytes_); }

    auto operator<=>(const CertId&) const = default;

  private:
    Storage bytes_{};
};

struct CertificateId {
    CertId id;
    int class_id = 0;

    bool operator==(const CertificateId&) const = default;
};

}  // namespace huffrev
