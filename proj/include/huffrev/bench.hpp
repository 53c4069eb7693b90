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

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "huffrev/cert.hpp"
#include "huffrev/planner.hpp"
#include "huffrev/signature.hpp"

namespace huffrev {

/// Classic certificate revocation list: a signed, sorted flat list of ids.
///
/// Wire form: epoch u64, count u32, ids (29 bytes each), signature (32).
class CrlBaseline {
  public:
    static constexpr std::size_t kFramingBytes = 8 + 4 + 32;

    //! Sorts the ids; throws std::invalid_argument on duplicates.
    CrlBaseline(std::vector<CertId> ids, std::uint64_t epoch, const Signer& signer);

    [[nodiscard]] bool contains(const CertId& id) const;
    [[nodiscard]] const std::vector<CertId>& entries() const { return entries_; }
    [[nodiscard]] std::uint64_t epoch() const { return epoch_; }
    [[nodiscard]] std::size_t size_bytes() const { return kFramingBytes + kCertIdBytes * entries_.size(); }
    [[nodiscard]] std::size_t payload_bytes() const { return kCertIdBytes * entries_.size(); }

    [[nodiscard]] Bytes serialize() const;
    [[nodiscard]] bool verify(const SignatureVerifier& verifier) const;

  private:
    [[nodiscard]] Bytes signed_part() const;

    std::vector<CertId> entries_;
    std::uint64_t epoch_;
    SignatureTag signature_{};
};

struct BenchConfig {
    std::uint64_t fleet = 100000;
    double revoked_fraction = planner::kDefaultRevocationFraction;
    int k_min = 2;
    int k_max = 8;
    std::uint64_t seed = 1;
};

struct ClassBench {
    int class_id = 0;
    std::string label;
    double query_weight = 0;
    std::uint64_t population = 0;
    std::uint64_t capacity = 0;
    std::uint64_t revoked = 0;
    int leaf_depth = 0;
    std::size_t model_proof_bytes = 0;
    double mean_proof_bytes = 0;
    std::size_t max_proof_bytes = 0;
};

struct BenchReport {
    BenchConfig config;
    std::uint64_t revoked = 0;
    int k = 0;
    std::vector<std::pair<int, double>> sweep;  // (k, expected proof bytes)
    double expected_proof_bytes = 0;
    std::vector<ClassBench> classes;
    std::size_t crl_bytes = 0;
    std::size_t crl_payload_bytes = 0;
    std::uint64_t incremental_calls_total = 0;
    std::uint64_t incremental_calls_max = 0;
    double incremental_calls_mean = 0;
    //! Bound checked on every append: leaf_depth * k of the inserted class.
    bool incremental_within_bound = true;
    std::uint64_t rebuild_calls = 0;
    //! rebuild_calls / incremental_calls_mean
    double rebuild_ratio = 0;
    std::size_t max_proof_bytes = 0;
    //! crl_bytes / max_proof_bytes
    double transfer_reduction = 0;
    //! Proofs beat the CRL wherever the revoked count exceeds leaf_depth*(k-1)*32/29.
    bool proof_beats_crl = true;

    [[nodiscard]] nlohmann::json to_json() const;
    [[nodiscard]] std::string table() const;
};

//! Synthetic fleet: taxi 5% (weight 0.5), truck 15% (0.3), private 80% (0.2).
std::vector<planner::VehicleClass> synthetic_registry(std::uint64_t fleet);

//! Deterministic under a fixed seed.
BenchReport run_bench(const BenchConfig& config);

}  // namespace huffrev
