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

// Domain-separated hashing rules shared by the tree and by verifiers.
//
//   leaf       sponge(0x00 || class || id29)
//   empty slot sponge(0x02 || level)
//   tombstone  sponge(0x03 || class || slot64)
//   empty tree sponge(0x04 || canonical plan)
//   internal   duplex: one call on (0x01 || level || arity), then one call
//              per child up to the last non-empty child; the digest is the
//              256-bit output of the final call.

#include <cstdint>
#include <span>

#include "huffrev/bytes.hpp"
#include "huffrev/cert.hpp"
#include "huffrev/keccak.hpp"
#include "huffrev/planner.hpp"

namespace huffrev::nodehash {

inline constexpr std::uint8_t kLeafTag = 0x00;
inline constexpr std::uint8_t kNodeTag = 0x01;
inline constexpr std::uint8_t kEmptyTag = 0x02;
inline constexpr std::uint8_t kTombstoneTag = 0x03;
inline constexpr std::uint8_t kEmptyTreeTag = 0x04;

Digest leaf_digest(const CertificateId& cert);
Digest tombstone_digest(int class_id, std::uint64_t slot);
Digest empty_digest(int level);
Digest empty_tree_root(const planner::HuffmanPlan& plan);

//! Duplex context after the header call of an internal node; shared by every node at `level`.
keccak::DuplexContext header_context(int level, int arity);

//! Index of the last child whose digest differs from the empty sentinel, or -1.
int last_nonempty(std::span<const Digest> children, const Digest& empty);

//! From-scratch internal node digest (header context plus one call per absorbed child).
Digest internal_digest(int level, std::span<const Digest> children, std::uint64_t* calls = nullptr);

}  // namespace huffrev::nodehash
