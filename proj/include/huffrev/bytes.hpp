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

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace huffrev {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

inline constexpr std::size_t kDigestBytes = 32;
using Digest = std::array<std::uint8_t, kDigestBytes>;

std::string to_hex(ByteView data);

template <std::size_t N>
std::string to_hex(const std::array<std::uint8_t, N>& data) {
    return to_hex(ByteView{data});
}

//! Throws std::invalid_argument on odd length or non-hex characters.
Bytes from_hex(std::string_view hex);

//! Raised by ByteReader when the input is exhausted or has trailing bytes.
class DecodeError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

//! Append-only big-endian encoder.
class ByteWriter {
  public:
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u16(std::uint16_t v);
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void raw(ByteView data) { buf_.insert(buf_.end(), data.begin(), data.end()); }

    [[nodiscard]] const Bytes& bytes() const& { return buf_; }
    [[nodiscard]] Bytes take() && { return std::move(buf_); }

  private:
    Bytes buf_;
};

//! Big-endian decoder over a borrowed buffer.
class ByteReader {
  public:
    explicit ByteReader(ByteView data) : data_(data) {}

    std::uint8_t u8();
    std::uint16_t u16();
    std::uint32_t u32();
    std::uint64_t u64();
    ByteView raw(std::size_t n);

    template <std::size_t N>
    std::array<std::uint8_t, N> array() {
        std::array<std::uint8_t, N> out{};
        auto src = raw(N);
        std::copy(src.begin(), src.end(), out.begin());
        return out;
    }

    [[nodiscard]] std::size_t remaining() const { return data_.size() - pos_; }
    [[nodiscard]] std::size_t position() const { return pos_; }
    void expect_end() const;

  private:
    ByteView data_;
    std::size_t pos_ = 0;
};

}  // namespace huffrev
