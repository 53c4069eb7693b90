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

// Keccak-f[800] (5x5 grid of 32-bit lanes), the multi-rate pad10*1 rule,
// the sponge and the duplex construction built on top of it.
//
// Bit numbering follows the Keccak reference: lanes are loaded little-endian
// and bit i of a message is bit (i % 8) of byte (i / 8).

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "huffrev/bytes.hpp"

namespace huffrev::keccak {

inline constexpr unsigned kLaneBits = 32;
inline constexpr std::size_t kLaneCount = 25;
inline constexpr std::size_t kStateBits = kLaneBits * kLaneCount;
inline constexpr std::size_t kStateBytes = kStateBits / 8;

//! Rounds of Keccak-f[800]: 12 + 2l with 2^l = 32.
inline constexpr unsigned kRounds = 22;

struct KeccakState {
    std::array<std::uint32_t, kLaneCount> lanes{};

    std::uint32_t& lane(unsigned x, unsigned y) { return lanes[x + 5 * y]; }
    [[nodiscard]] std::uint32_t lane(unsigned x, unsigned y) const { return lanes[x + 5 * y]; }

    //! Byte i of the little-endian lane serialization.
    [[nodiscard]] std::uint8_t byte(std::size_t i) const {
        return static_cast<std::uint8_t>(lanes[i / 4] >> (8 * (i % 4)));
    }
    void xor_byte(std::size_t i, std::uint8_t v) { lanes[i / 4] ^= std::uint32_t{v} << (8 * (i % 4)); }

    bool operator==(const KeccakState&) const = default;
};

//! Applies the first `rounds` rounds of Keccak-f[800] in place.
void permute(KeccakState& state, unsigned rounds = kRounds);

template <unsigned Rounds = kRounds>
[[nodiscard]] KeccakState keccak_f800(KeccakState state) {
    static_assert(Rounds >= 1 && Rounds <= 24);
    permute(state, Rounds);
    return state;
}

//! Bit sequence in Keccak order (bit i lives in byte i/8 at position i%8).
class BitString {
  public:
    BitString() = default;
    static BitString from_bytes(ByteView bytes);
    static BitString from_bits(std::initializer_list<int> bits);

    [[nodiscard]] std::size_t size() const { return bits_; }
    [[nodiscard]] bool empty() const { return bits_ == 0; }
    [[nodiscard]] bool operator[](std::size_t i) const { return (bytes_[i / 8] >> (i % 8)) & 1U; }

    void push_back(bool bit);
    void append(const BitString& other);
    [[nodiscard]] BitString prefix(std::size_t n) const;

    //! Underlying storage; bits beyond size() are zero.
    [[nodiscard]] const Bytes& bytes() const { return bytes_; }

    bool operator==(const BitString&) const = default;

  private:
    Bytes bytes_;
    std::size_t bits_ = 0;
};

struct SpongeParams {
    std::size_t rate_bits = 544;
    std::size_t capacity_bits = 256;
    std::size_t output_bits = 256;

    [[nodiscard]] std::size_t rate_bytes() const { return rate_bits / 8; }
    //! Throws std::invalid_argument unless r + c = 800 and r is a positive multiple of 8.
    void validate() const;

    bool operator==(const SpongeParams&) const = default;
};

//! Multi-rate padding: message || 1 || 0* || 1, split into rate-sized blocks.
std::vector<BitString> pad10star1(const BitString& message, std::size_t rate_bits);

//! Inverse of pad10star1; nullopt if the blocks do not end in a valid padding.
std::optional<BitString> unpad10star1(std::span<const BitString> blocks);

//! Sponge over Keccak-f[800]: pad, absorb every block, squeeze `out_bits`.
BitString sponge(const BitString& message, const SpongeParams& params, std::size_t out_bits);

//! Byte-oriented sponge hash returning a 256-bit digest.
Digest sponge_hash(ByteView message, const SpongeParams& params = {});

class OversizedBlock : public std::length_error {
  public:
    using std::length_error::length_error;
};

//! Resumable duplex object. Copies are independent snapshots.
///
/// Every duplexing call pads its input into exactly one rate block, absorbs
/// it, permutes once and returns a prefix of the rate. There is deliberately
/// no squeeze: output only comes from duplexing calls.
class DuplexContext {
  public:
    explicit DuplexContext(const SpongeParams& params = {});

    //! Largest sigma accepted by one call: floor((r - 2) / 8) bytes.
    [[nodiscard]] std::size_t max_input_bytes() const { return (params_.rate_bits - 2) / 8; }

    BitString duplexing(ByteView sigma, std::size_t out_bits);

    //! Fast path for whole-byte outputs; writes out.size() bytes of the rate.
    void duplexing(ByteView sigma, std::span<std::uint8_t> out);

    [[nodiscard]] const KeccakState& state() const { return state_; }
    [[nodiscard]] const SpongeParams& params() const { return params_; }
    [[nodiscard]] std::uint64_t call_count() const { return calls_; }

    bool operator==(const DuplexContext&) const = default;

  private:
    void absorb_block(ByteView sigma);

    KeccakState state_{};
    SpongeParams params_;
    std::uint64_t calls_ = 0;
};

DuplexContext duplex_init(const SpongeParams& params = {});

//! Value-semantics form: returns the advanced context and leaves `ctx` untouched.
std::pair<DuplexContext, BitString> duplexing(DuplexContext ctx, ByteView sigma, std::size_t out_bits);

}  // namespace huffrev::keccak
