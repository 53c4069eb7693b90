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

#include "huffrev/cert.hpp"

#include <stdexcept>

namespace huffrev {

CertId CertId::from_bytes(ByteView bytes) {
    if (bytes.size() != kCertIdBytes) {
        throw std::invalid_argument("certificate id must be 29 bytes");
    }
    if ((bytes[0] & 0xF0) != 0) {
        throw std::invalid_argument("certificate id exceeds 228 bits");
    }
    CertId out;
    std::copy(bytes.begin(), bytes.end(), out.bytes_.begin());
    return out;
}

CertId CertId::from_hex(std::string_view hex) {
    if (hex.starts_with("0x") || hex.starts_with("0X")) hex.remove_prefix(2);
    if (hex.empty() || hex.size() > 2 * kCertIdBytes) {
        throw std::invalid_argument("certificate id must be 1..58 hex digits");
    }
    std::string padded(2 * kCertIdBytes - hex.size(), '0');
    padded.append(hex);
    return from_bytes(huffrev::from_hex(padded));
}

CertId CertId::from_u64(std::uint64_t v) {
    CertId out;
    for (std::size_t i = 0; i < 8; ++i) {
        out.bytes_[kCertIdBytes - 1 - i] = static_cast<std::uint8_t>(v >> (8 * i));
    }
    return out;
}

}  // namespace huffrev
