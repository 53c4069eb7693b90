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

#include "huffrev/keccak.hpp"

#include <bit>
#include <string>

namespace huffrev::keccak {

namespace {

// Low 32 bits of the Keccak round constants.
constexpr std::array<std::uint32_t, 24> kRoundConstants = {
    0x00000001, 0x00008082, 0x0000808A, 0x80008000, 0x0000808B, 0x80000001,
    0x80008081, 0x00008009, 0x0000008A, 0x00000088, 0x80008009, 0x8000000A,
    0x8000808B, 0x0000008B, 0x00008089, 0x00008003, 0x00008002, 0x00000080,
    0x0000800A, 0x8000000A, 0x80008081, 0x00008080, 0x80000001, 0x80008008,
};

// Rho offsets reduced mod 32, indexed x + 5y.
constexpr std::array<int, 25> kRho = {
    0,  1,  30, 28, 27,  //
    4,  12, 6,  23, 20,  //
    3,  10, 11, 25, 7,   //
    9,  13, 15, 21, 8,   //
    18, 2,  29, 24, 14,
};

void round(std::array<std::uint32_t, 25>& a, std::uint32_t rc) {
    std::array<std::uint32_t, 5> c{};
    for (unsigned x = 0; x < 5; ++x) {
        c[x] = a[x] ^ a[x + 5] ^ a[x + 10] ^ a[x + 15] ^ a[x + 20];
    }
    for (unsigned x = 0; x < 5; ++x) {
        std::uint32_t d = c[(x + 4) % 5] ^ std::rotl(c[(x + 1) % 5], 1);
        for (unsigned y = 0; y < 25; y += 5) {
            a[x + y] ^= d;
        }
    }

    // rho + pi: B[y, 2x + 3y] = rot(A[x, y])
    std::array<std::uint32_t, 25> b{};
    for (unsigned x = 0; x < 5; ++x) {
        for (unsigned y = 0; y < 5; ++y) {
            b[y + 5 * ((2 * x + 3 * y) % 5)] = std::rotl(a[x + 5 * y], kRho[x + 5 * y]);
        }
    }

    for (unsigned y = 0; y < 25; y += 5) {
        for (unsigned x = 0; x < 5; ++x) {
            a[x + y] = b[x + y] ^ (~b[(x + 1) % 5 + y] & b[(x + 2) % 5 + y]);
        }
    }
    a[0] ^= rc;
}

void xor_block(KeccakState& state, ByteView block) {
    for (std::size_t i = 0; i < block.size(); ++i) {
        state.xor_byte(i, block[i]);
    }
}

}  // namespace

void permute(KeccakState& state, unsigned rounds) {
    if (rounds > kRoundConstants.size()) {
        throw std::invalid_argument("Keccak-f[800]: at most 24 rounds");
    }
    for (unsigned i = 0; i < rounds; ++i) {
        round(state.lanes, kRoundConstants[i]);
    }
}

BitString BitString::from_bytes(ByteView bytes) {
    BitString out;
    out.bytes_.assign(bytes.begin(), bytes.end());
    out.bits_ = bytes.size() * 8;
    return out;
}

BitString BitString::from_bits(std::initializer_list<int> bits) {
    BitString out;
    for (int b : bits) out.push_back(b != 0);
    return out;
}

void BitString::push_back(bool bit) {
    if (bits_ % 8 == 0) bytes_.push_back(0);
    if (bit) bytes_.back() |= static_cast<std::uint8_t>(1U << (bits_ % 8));
    ++bits_;
}

void BitString::append(const BitString& other) {
    if (bits_ % 8 == 0) {
        bytes_.insert(bytes_.end(), other.bytes_.begin(), other.bytes_.end());
        bits_ += other.bits_;
        return;
    }
    for (std::size_t i = 0; i < other.size(); ++i) push_back(other[i]);
}

BitString BitString::prefix(std::size_t n) const {
    if (n > bits_) throw std::out_of_range("BitString::prefix");
    BitString out;
    out.bytes_.assign(bytes_.begin(), bytes_.begin() + static_cast<std::ptrdiff_t>((n + 7) / 8));
    out.bits_ = n;
    if (n % 8 != 0) out.bytes_.back() &= static_cast<std::uint8_t>((1U << (n % 8)) - 1);
    return out;
}

void SpongeParams::validate() const {
    if (rate_bits + capacity_bits != kStateBits) {
        throw std::invalid_argument("sponge: rate + capacity must equal 800");
    }
    if (rate_bits == 0 || rate_bits % 8 != 0) {
        throw std::invalid_argument("sponge: rate must be a positive multiple of 8");
    }
}

std::vector<BitString> pad10star1(const BitString& message, std::size_t rate_bits) {
    if (rate_bits < 2) throw std::invalid_argument("pad10*1: rate must be at least 2 bits");

    BitString padded = message;
    padded.push_back(true);
    while ((padded.size() + 1) % rate_bits != 0) padded.push_back(false);
    padded.push_back(true);

    std::vector<BitString> blocks;
    blocks.reserve(padded.size() / rate_bits);
    for (std::size_t off = 0; off < padded.size(); off += rate_bits) {
        BitString block;
        for (std::size_t i = 0; i < rate_bits; ++i) block.push_back(padded[off + i]);
        blocks.push_back(std::move(block));
    }
    return blocks;
}

std::optional<BitString> unpad10star1(std::span<const BitString> blocks) {
    if (blocks.empty()) return std::nullopt;
    BitString all;
    for (const auto& b : blocks) all.append(b);
    std::size_t n = all.size();
    if (n < 2 || !all[n - 1]) return std::nullopt;
    std::size_t i = n - 2;
    while (!all[i]) {
        if (i == 0) return std::nullopt;
        --i;
    }
    // a minimal padding never spans a whole block of zeros
    if (n - 2 - i > blocks.front().size() - 1) return std::nullopt;
    return all.prefix(i);
}

BitString sponge(const BitString& message, const SpongeParams& params, std::size_t out_bits) {
    params.validate();
    KeccakState state;
    for (const auto& block : pad10star1(message, params.rate_bits)) {
        xor_block(state, block.bytes());
        permute(state);
    }

    BitString out;
    while (true) {
        for (std::size_t i = 0; i < params.rate_bits; ++i) {
            if (out.size() == out_bits) return out;
            out.push_back((state.byte(i / 8) >> (i % 8)) & 1U);
        }
        if (out.size() == out_bits) return out;
        permute(state);
    }
}

Digest sponge_hash(ByteView message, const SpongeParams& params) {
    params.validate();
    if (params.output_bits != kDigestBytes * 8) {
        throw std::invalid_argument("sponge_hash: output must be 256 bits");
    }

    // Byte-aligned fast path of sponge(): the 1 and final 1 bits of pad10*1
    // land in 0x01 and 0x80 (or 0x81 when they share a byte).
    const std::size_t rate = params.rate_bytes();
    KeccakState state;
    std::size_t off = 0;
    while (message.size() - off >= rate) {
        xor_block(state, message.subspan(off, rate));
        permute(state);
        off += rate;
    }
    auto tail = message.subspan(off);
    xor_block(state, tail);
    state.xor_byte(tail.size(), 0x01);
    state.xor_byte(rate - 1, 0x80);
    permute(state);

    Digest out{};
    std::size_t produced = 0;
    while (true) {
        for (std::size_t i = 0; i < rate && produced < out.size(); ++i) {
            out[produced++] = state.byte(i);
        }
        if (produced == out.size()) return out;
        permute(state);
    }
}

DuplexContext::DuplexContext(const SpongeParams& params) : params_(params) { params_.validate(); }

void DuplexContext::absorb_block(ByteView sigma) {
    if (sigma.size() > max_input_bytes()) {
        throw OversizedBlock("duplexing: input of " + std::to_string(sigma.size()) +
                             " bytes exceeds the per-call limit of " + std::to_string(max_input_bytes()));
    }
    xor_block(state_, sigma);
    state_.xor_byte(sigma.size(), 0x01);
    state_.xor_byte(params_.rate_bytes() - 1, 0x80);
    permute(state_);
    ++calls_;
}

BitString DuplexContext::duplexing(ByteView sigma, std::size_t out_bits) {
    if (out_bits > params_.rate_bits) {
        throw std::invalid_argument("duplexing: output cannot exceed the rate");
    }
    absorb_block(sigma);
    BitString out;
    for (std::size_t i = 0; i < out_bits; ++i) {
        out.push_back((state_.byte(i / 8) >> (i % 8)) & 1U);
    }
    return out;
}

void DuplexContext::duplexing(ByteView sigma, std::span<std::uint8_t> out) {
    if (out.size() > params_.rate_bytes()) {
        throw std::invalid_argument("duplexing: output cannot exceed the rate");
    }
    absorb_block(sigma);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = state_.byte(i);
}

DuplexContext duplex_init(const SpongeParams& params) { return DuplexContext(params); }

std::pair<DuplexContext, BitString> duplexing(DuplexContext ctx, ByteView sigma, std::size_t out_bits) {
    auto out = ctx.duplexing(sigma, out_bits);
    return {std::move(ctx), std::move(out)};
}

}  // namespace huffrev::keccak
