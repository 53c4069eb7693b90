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
#include <cstdint>
#include <random>

#include "huffrev/bytes.hpp"
#include "huffrev/cert.hpp"
#include "huffrev/keccak.hpp"
#include "huffrev/signature.hpp"

namespace huffrev::test {

// Keccak-f[800] applied to the all-zero state, lanes indexed x + 5y.
// Produced by tests/oracles/keccak800_reference.py.
inline constexpr std::array<std::uint32_t, 25> kF800ZeroState = {
    0xe531d45d, 0xf404c6fb, 0x23a0bf99, 0xf1f8452f, 0x51ffd042,  //
    0xe539f578, 0xf00b80a7, 0xaf973664, 0xbf5af34c, 0x227a2424,  //
    0x88172715, 0x9f685884, 0xb15cd054, 0x1bf4fc0e, 0x6166fa91,  //
    0x1a9e599a, 0xa3970a1f, 0xab659687, 0xafab8d68, 0xe74b1015,  //
    0x34001a98, 0x4119eff3, 0x930a0e76, 0x87b28070, 0x11efe996,
};

inline keccak::KeccakState random_state(std::mt19937_64& rng) {
    keccak::KeccakState s;
    for (auto& lane : s.lanes) lane = static_cast<std::uint32_t>(rng());
    return s;
}

inline Bytes random_bytes(std::mt19937_64& rng, std::size_t n) {
    Bytes out(n);
    for (auto& b : out) b = static_cast<std::uint8_t>(rng());
    return out;
}

inline CertId random_cert_id(std::mt19937_64& rng) {
    auto raw = random_bytes(rng, kCertIdBytes);
    raw[0] &= 0x0F;
    return CertId::from_bytes(raw);
}

inline DuplexMac test_key(std::uint8_t fill) {
    DuplexMac::Key key{};
    for (std::size_t i = 0; i < key.size(); ++i) key[i] = static_cast<std::uint8_t>(fill + i);
    return DuplexMac(key);
}

}  // namespace huffrev::test
