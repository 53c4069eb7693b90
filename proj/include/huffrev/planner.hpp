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

// Tree planning: k-ary Huffman depths for vehicle classes, per-class
// capacities, and the arity search that minimizes expected proof size.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "huffrev/bytes.hpp"

namespace huffrev::planner {

enum class PlannerErrc {
    EmptyInput,
    InvalidArity,
    InvalidWeight,
    InvalidClass,
    DepthOverflow,
    ParseError,
};

class PlannerError : public std::runtime_error {
  public:
    PlannerError(PlannerErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    [[nodiscard]] PlannerErrc code() const { return code_; }

  private:
    PlannerErrc code_;
};

inline constexpr int kMaxArity = 64;
inline constexpr int kMaxClassId = 255;
inline constexpr int kMaxDepth = 255;
inline constexpr double kDefaultRevocationFraction = 0.01;

struct VehicleClass {
    int class_id = 0;
    std::string label;
    double query_weight = 0.0;
    std::uint64_t population = 0;
};

//! Code depths for the real symbols plus the zero-weight dummies that
//! completed the k-ary tree.
struct KaryCode {
    std::vector<int> depths;
    std::vector<int> dummy_depths;
};

//! Number of zero-weight dummies needed so that (n - 1) mod (k - 1) == 0.
inline std::size_t dummy_count(std::size_t symbols, int k) {
    const std::size_t step = static_cast<std::size_t>(k) - 1;
    return (step - (symbols - 1) % step) % step;
}

/// k-ary Huffman code over arbitrary ordered additive weights (double,
/// boost::rational, integers). Merges the k lightest nodes until one
/// remains; ties resolve by (weight, creation order) with dummies created
/// first, then the real symbols in input order, then merged nodes.
template <typename Weight>
KaryCode build_kary_code_full(std::span<const Weight> weights, int k) {
    if (weights.empty()) throw PlannerError(PlannerErrc::EmptyInput, "no weights");
    if (k < 2) throw PlannerError(PlannerErrc::InvalidArity, "arity must be at least 2");
    for (const auto& w : weights) {
        if (w < Weight{0}) throw PlannerError(PlannerErrc::InvalidWeight, "negative weight");
    }

    const std::size_t dummies = dummy_count(weights.size(), k);
    const std::size_t leaves = weights.size() + dummies;

    // node i < leaves: dummies first, then real symbols
    std::vector<std::size_t> parent(leaves, SIZE_MAX);
    using Entry = std::tuple<Weight, std::size_t>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
    for (std::size_t i = 0; i < dummies; ++i) heap.emplace(Weight{0}, i);
    for (std::size_t i = 0; i < weights.size(); ++i) heap.emplace(weights[i], dummies + i);

    while (heap.size() > 1) {
        Weight sum{0};
        const std::size_t merged = parent.size();
        parent.push_back(SIZE_MAX);
        for (int j = 0; j < k; ++j) {
            auto [w, id] = heap.top();
            heap.pop();
            sum = sum + w;
            parent[id] = merged;
        }
        heap.emplace(sum, merged);
    }

    auto depth_of = [&](std::size_t node) {
        int d = 0;
        while (parent[node] != SIZE_MAX) {
            node = parent[node];
            ++d;
        }
        return d;
    };

    KaryCode code;
    for (std::size_t i = 0; i < dummies; ++i) code.dummy_depths.push_back(depth_of(i));
    for (std::size_t i = 0; i < weights.size(); ++i) code.depths.push_back(depth_of(dummies + i));
    return code;
}

template <typename Weight>
std::vector<int> build_kary_code(std::span<const Weight> weights, int k) {
    return build_kary_code_full(weights, k).depths;
}

inline std::vector<int> build_kary_code(const std::vector<double>& weights, int k) {
    return build_kary_code(std::span<const double>(weights), k);
}

//! Smallest m with k^m >= n (0 for n <= 1).
int ceil_log(std::uint64_t n, int k);

struct ClassPlan {
    int class_id = 0;
    std::string label;
    double query_weight = 0.0;
    std::uint64_t population = 0;
    int code_depth = 0;
    std::uint64_t capacity = 0;
    int subtree_depth = 0;
    int leaf_depth = 0;

    bool operator==(const ClassPlan&) const = default;
};

struct HuffmanPlan {
    int k = 2;
    double revocation_fraction = kDefaultRevocationFraction;
    std::vector<ClassPlan> classes;  // sorted by class_id

    [[nodiscard]] const ClassPlan* find(int class_id) const;
    [[nodiscard]] std::uint64_t total_capacity() const;

    //! Structural encoding (k and per-class depths/capacities) hashed into the empty-tree root.
    [[nodiscard]] Bytes canonical_bytes() const;

    bool operator==(const HuffmanPlan&) const = default;
};

/// Child-index path from the root to each class anchor. Codewords are
/// assigned canonically from the depths (shallower first, then class_id),
/// so a plan's depths alone fix the tree shape.
std::vector<std::vector<int>> anchor_paths(const HuffmanPlan& plan);

void validate_classes(std::span<const VehicleClass> classes);

HuffmanPlan plan_tree(std::span<const VehicleClass> classes, int k,
                      double revocation_fraction = kDefaultRevocationFraction);

struct ProofSizeModel {
    int digest_bytes = 32;
    int overhead_bytes = 0;
    //! Bytes each path level adds besides its sibling digests (child index on the wire).
    int per_level_bytes = 0;
};

//! Sum over classes of weight * leaf_depth * ((k - 1) * digest + per_level) + overhead.
double expected_proof_size(const HuffmanPlan& plan, const ProofSizeModel& model);

struct ArityChoice {
    int k = 2;
    HuffmanPlan plan;
    //! (k, expected proof size) for every evaluated arity, ascending k.
    std::vector<std::pair<int, double>> sweep;
};

//! Exhaustive argmin over [k_min, k_max]; ties go to the smaller k.
ArityChoice optimal_k(std::span<const VehicleClass> classes, int k_min, int k_max, const ProofSizeModel& model,
                      double revocation_fraction = kDefaultRevocationFraction);

//! Registry CSV with header `class_id,label,query_weight,population`.
std::vector<VehicleClass> parse_registry(std::istream& in);
std::vector<VehicleClass> load_registry(const std::string& path);

nlohmann::json plan_to_json(const HuffmanPlan& plan);
HuffmanPlan plan_from_json(const nlohmann::json& doc);

}  // namespace huffrev::planner
