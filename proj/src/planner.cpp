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

#include "huffrev/planner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace huffrev::planner {

namespace {

// ceil(fraction * population), tolerant of the representation error in
// fractions such as 0.01 so that 0.01 * 1000 yields 10, not 11.
std::uint64_t capacity_for(double fraction, std::uint64_t population) {
    const double exact = fraction * static_cast<double>(population);
    const double nearest = std::round(exact);
    if (std::abs(exact - nearest) <= 1e-9 * std::max(1.0, exact)) {
        return static_cast<std::uint64_t>(nearest);
    }
    return static_cast<std::uint64_t>(std::ceil(exact));
}

std::string trim(std::string s) {
    auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(trim(field));
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

[[noreturn]] void parse_fail(std::size_t line_no, const std::string& msg) {
    throw PlannerError(PlannerErrc::ParseError, "registry line " + std::to_string(line_no) + ": " + msg);
}

}  // namespace

int ceil_log(std::uint64_t n, int k) {
    if (k < 2) throw PlannerError(PlannerErrc::InvalidArity, "arity must be at least 2");
    int m = 0;
    unsigned __int128 reach = 1;
    while (reach < n) {
        reach *= static_cast<unsigned>(k);
        ++m;
    }
    return m;
}

const ClassPlan* HuffmanPlan::find(int class_id) const {
    auto it = std::lower_bound(classes.begin(), classes.end(), class_id,
                               [](const ClassPlan& c, int id) { return c.class_id < id; });
    return (it != classes.end() && it->class_id == class_id) ? &*it : nullptr;
}

std::uint64_t HuffmanPlan::total_capacity() const {
    std::uint64_t total = 0;
    for (const auto& c : classes) total += c.capacity;
    return total;
}

Bytes HuffmanPlan::canonical_bytes() const {
    ByteWriter w;
    w.raw(ByteView(reinterpret_cast<const std::uint8_t*>("HRPLAN"), 6));
    w.u8(static_cast<std::uint8_t>(k));
    w.u16(static_cast<std::uint16_t>(classes.size()));
    for (const auto& c : classes) {
        w.u8(static_cast<std::uint8_t>(c.class_id));
        w.u8(static_cast<std::uint8_t>(c.code_depth));
        w.u64(c.capacity);
        w.u8(static_cast<std::uint8_t>(c.leaf_depth));
    }
    return std::move(w).take();
}

std::vector<std::vector<int>> anchor_paths(const HuffmanPlan& plan) {
    std::vector<std::size_t> order(plan.classes.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& ca = plan.classes[a];
        const auto& cb = plan.classes[b];
        return std::tie(ca.code_depth, ca.class_id) < std::tie(cb.code_depth, cb.class_id);
    });

    std::vector<std::vector<int>> paths(plan.classes.size());
    std::vector<int> code;
    bool first = true;
    for (std::size_t idx : order) {
        const int depth = plan.classes[idx].code_depth;
        if (!first) {
            // next codeword at the same depth: increment with carry
            int pos = static_cast<int>(code.size()) - 1;
            while (pos >= 0 && code[pos] == plan.k - 1) {
                code[pos] = 0;
                --pos;
            }
            if (pos < 0) throw PlannerError(PlannerErrc::InvalidClass, "code depths violate the Kraft inequality");
            ++code[pos];
        }
        code.resize(depth, 0);
        first = false;
        paths[idx] = code;
    }
    return paths;
}

void validate_classes(std::span<const VehicleClass> classes) {
    if (classes.empty()) throw PlannerError(PlannerErrc::EmptyInput, "no vehicle classes");
    std::set<int> seen;
    double total = 0.0;
    for (const auto& c : classes) {
        if (c.class_id < 0 || c.class_id > kMaxClassId) {
            throw PlannerError(PlannerErrc::InvalidClass, "class_id out of range: " + std::to_string(c.class_id));
        }
        if (!seen.insert(c.class_id).second) {
            throw PlannerError(PlannerErrc::InvalidClass, "duplicate class_id " + std::to_string(c.class_id));
        }
        if (!(c.query_weight >= 0.0) || !std::isfinite(c.query_weight)) {
            throw PlannerError(PlannerErrc::InvalidWeight, "invalid query_weight for class " + std::to_string(c.class_id));
        }
        total += c.query_weight;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw PlannerError(PlannerErrc::InvalidWeight, "query weights must sum to 1");
    }
}

HuffmanPlan plan_tree(std::span<const VehicleClass> classes, int k, double revocation_fraction) {
    if (k < 2 || k > kMaxArity) throw PlannerError(PlannerErrc::InvalidArity, "arity must be in [2, 64]");
    if (!(revocation_fraction > 0.0 && revocation_fraction <= 1.0)) {
        throw PlannerError(PlannerErrc::InvalidWeight, "revocation fraction must be in (0, 1]");
    }
    validate_classes(classes);

    std::vector<VehicleClass> sorted(classes.begin(), classes.end());
    std::sort(sorted.begin(), sorted.end(),
              [](const VehicleClass& a, const VehicleClass& b) { return a.class_id < b.class_id; });

    std::vector<double> weights;
    for (const auto& c : sorted) weights.push_back(c.query_weight);
    const auto depths = build_kary_code(weights, k);

    HuffmanPlan plan;
    plan.k = k;
    plan.revocation_fraction = revocation_fraction;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        ClassPlan cp;
        cp.class_id = sorted[i].class_id;
        cp.label = sorted[i].label;
        cp.query_weight = sorted[i].query_weight;
        cp.population = sorted[i].population;
        cp.code_depth = depths[i];
        cp.capacity = capacity_for(revocation_fraction, sorted[i].population);
        cp.subtree_depth = ceil_log(std::max<std::uint64_t>(cp.capacity, 1), k);
        cp.leaf_depth = cp.code_depth + cp.subtree_depth;
        if (cp.leaf_depth > kMaxDepth) {
            throw PlannerError(PlannerErrc::DepthOverflow, "leaf depth exceeds 255 for class " + std::to_string(cp.class_id));
        }
        plan.classes.push_back(std::move(cp));
    }
    return plan;
}

double expected_proof_size(const HuffmanPlan& plan, const ProofSizeModel& model) {
    const double per_level = static_cast<double>(plan.k - 1) * model.digest_bytes + model.per_level_bytes;
    double total = 0.0;
    for (const auto& c : plan.classes) {
        total += c.query_weight * c.leaf_depth * per_level;
    }
    return total + model.overhead_bytes;
}

ArityChoice optimal_k(std::span<const VehicleClass> classes, int k_min, int k_max, const ProofSizeModel& model,
                      double revocation_fraction) {
    if (k_min < 2 || k_max > kMaxArity || k_min > k_max) {
        throw PlannerError(PlannerErrc::InvalidArity, "need 2 <= k_min <= k_max <= 64");
    }
    ArityChoice best;
    std::optional<double> best_cost;
    for (int k = k_min; k <= k_max; ++k) {
        auto plan = plan_tree(classes, k, revocation_fraction);
        const double cost = expected_proof_size(plan, model);
        best.sweep.emplace_back(k, cost);
        if (!best_cost || cost < *best_cost) {
            best_cost = cost;
            best.k = k;
            best.plan = std::move(plan);
        }
    }
    return best;
}

std::vector<VehicleClass> parse_registry(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    std::vector<VehicleClass> out;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
        if (trim(line).empty()) continue;

        auto fields = split_csv_line(line);
        if (!have_header) {
            const std::vector<std::string> expected = {"class_id", "label", "query_weight", "population"};
            if (fields != expected) parse_fail(line_no, "expected header class_id,label,query_weight,population");
            have_header = true;
            continue;
        }
        if (fields.size() != 4) parse_fail(line_no, "expected 4 fields, got " + std::to_string(fields.size()));

        VehicleClass vc;
        try {
            std::size_t used = 0;
            vc.class_id = std::stoi(fields[0], &used);
            if (used != fields[0].size()) throw std::invalid_argument("class_id");
            vc.label = fields[1];
            vc.query_weight = std::stod(fields[2], &used);
            if (used != fields[2].size()) throw std::invalid_argument("query_weight");
            if (fields[3].empty() || fields[3][0] == '-') throw std::invalid_argument("population");
            vc.population = std::stoull(fields[3], &used);
            if (used != fields[3].size()) throw std::invalid_argument("population");
        } catch (const std::exception&) {
            parse_fail(line_no, "malformed numeric field");
        }
        out.push_back(std::move(vc));
    }
    if (!have_header) throw PlannerError(PlannerErrc::EmptyInput, "registry is empty");
    if (out.empty()) throw PlannerError(PlannerErrc::EmptyInput, "registry has no classes");
    return out;
}

std::vector<VehicleClass> load_registry(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw PlannerError(PlannerErrc::ParseError, "cannot open registry " + path);
    return parse_registry(in);
}

nlohmann::json plan_to_json(const HuffmanPlan& plan) {
    nlohmann::json classes = nlohmann::json::array();
    for (const auto& c : plan.classes) {
        classes.push_back({
            {"id", c.class_id},
            {"label", c.label},
            {"query_weight", c.query_weight},
            {"population", c.population},
            {"code_depth", c.code_depth},
            {"capacity", c.capacity},
            {"leaf_depth", c.leaf_depth},
        });
    }
    return {{"k", plan.k}, {"revocation_fraction", plan.revocation_fraction}, {"classes", classes}};
}

HuffmanPlan plan_from_json(const nlohmann::json& doc) {
    try {
        HuffmanPlan plan;
        plan.k = doc.at("k").get<int>();
        if (plan.k < 2 || plan.k > kMaxArity) throw PlannerError(PlannerErrc::InvalidArity, "plan arity out of range");
        plan.revocation_fraction = doc.value("revocation_fraction", kDefaultRevocationFraction);
        for (const auto& jc : doc.at("classes")) {
            ClassPlan c;
            c.class_id = jc.at("id").get<int>();
            c.label = jc.value("label", std::string{});
            c.query_weight = jc.value("query_weight", 0.0);
            c.population = jc.value("population", std::uint64_t{0});
            c.code_depth = jc.at("code_depth").get<int>();
            c.capacity = jc.at("capacity").get<std::uint64_t>();
            c.subtree_depth = ceil_log(std::max<std::uint64_t>(c.capacity, 1), plan.k);
            c.leaf_depth = jc.at("leaf_depth").get<int>();
            if (c.class_id < 0 || c.class_id > kMaxClassId || c.code_depth < 0 ||
                c.leaf_depth != c.code_depth + c.subtree_depth || c.leaf_depth > kMaxDepth) {
                throw PlannerError(PlannerErrc::InvalidClass, "inconsistent plan entry for class " + std::to_string(c.class_id));
            }
            plan.classes.push_back(std::move(c));
        }
        if (plan.classes.empty()) throw PlannerError(PlannerErrc::EmptyInput, "plan has no classes");
        std::sort(plan.classes.begin(), plan.classes.end(),
                  [](const ClassPlan& a, const ClassPlan& b) { return a.class_id < b.class_id; });
        for (std::size_t i = 1; i < plan.classes.size(); ++i) {
            if (plan.classes[i].class_id == plan.classes[i - 1].class_id) {
                throw PlannerError(PlannerErrc::InvalidClass, "duplicate class in plan");
            }
        }
        anchor_paths(plan);  // rejects depth sets that do not form a prefix code
        return plan;
    } catch (const nlohmann::json::exception& e) {
        throw PlannerError(PlannerErrc::ParseError, std::string("malformed plan JSON: ") + e.what());
    }
}

}  // namespace huffrev::planner
