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

#include "huffrev/node_hash.hpp"

namespace huffrev::nodehash {

Digest leaf_digest(const CertificateId& cert) {
    ByteWriter w;
    w.u8(kLeafTag);
    w.u8(static_cast<std::uint8_t>(cert.class_id));
    w.raw(cert.id.bytes());
    return keccak::sponge_hash(w.bytes());
}

Digest tombstone_digest(int class_id, std::uint64_t slot) {
    ByteWriter w;
    w.u8(kTombstoneTag);
    w.u8(static_cast<std::uint8_t>(class_id));
    w.u64(slot);
    return keccak::sponge_hash(w.bytes());
}

Digest empty_digest(int level) {
    const std::uint8_t msg[] = {kEmptyTag, static_cast<std::uint8_t>(level)};
    return keccak::sponge_hash(msg);
}

Digest empty_tree_root(const planner::HuffmanPlan& plan) {
    ByteWriter w;
    w.u8(kEmptyTreeTag);
    w.raw(plan.canonical_bytes());
    return keccak::sponge_hash(w.bytes());
}

keccak::DuplexContext header_context(int level, int arity) {
    keccak::DuplexContext ctx;
    const std::uint8_t header[] = {kNodeTag, static_cast<std::uint8_t>(level), static_cast<std::uint8_t>(arity)};
    ctx.duplexing(header, std::span<std::uint8_t>{});
    return ctx;
}

int last_nonempty(std::span<const Digest> children, const Digest& empty) {
    for (int j = static_cast<int>(children.size()) - 1; j >= 0; --j) {
        if (children[j] != empty) return j;
    }
    return -1;
}

Digest internal_digest(int level, std::span<const Digest> children, std::uint64_t* calls) {
    const int last = last_nonempty(children, empty_digest(level + 1));
    if (last < 0) return empty_digest(level);
    auto ctx = header_context(level, static_cast<int>(children.size()));
    Digest out{};
    for (int j = 0; j <= last; ++j) {
        ctx.duplexing(children[j], out);
        if (calls) ++*calls;
    }
    return out;
}

}  // namespace huffrev::nodehash
