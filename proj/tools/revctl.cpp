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

// revctl: plan revocation trees, run TTP/RSU nodes, issue and verify proofs,
// and benchmark against a flat CRL.
//
// Exit codes: 0 success/accept, 1 verification reject, 2 usage or parse
// error, 3 transport error, 4 not found, 5 duplicate, 6 other failure.

#include <atomic>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <thread>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "huffrev/bench.hpp"
#include "huffrev/net/config.hpp"
#include "huffrev/net/nodes.hpp"
#include "huffrev/planner.hpp"
#include "huffrev/revocation_tree.hpp"

namespace fs = std::filesystem;
using namespace huffrev;

namespace {

enum Exit : int {
    kOk = 0,
    kReject = 1,
    kUsage = 2,
    kTransport = 3,
    kNotFound = 4,
    kDuplicate = 5,
    kFailure = 6,
};

//! Carries an exit code out of a subcommand.
struct CliExit {
    int code;
    std::string message;
};

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop = true; }

void setup_logging(const char* fallback) {
    auto logger = spdlog::stderr_color_mt("revctl");
    logger->set_pattern("%Y-%m-%dT%H:%M:%S.%e level=%l %v");
    spdlog::set_default_logger(logger);
    const char* env = std::getenv("HUFFREV_LOG");
    spdlog::set_level(spdlog::level::from_str(env != nullptr ? env : fallback));
}

Bytes read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CliExit{kUsage, "cannot read " + path.string()};
    return Bytes(std::istreambuf_iterator<char>(in), {});
}

void write_file(const fs::path& path, ByteView data) {
    const auto tmp = fs::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw CliExit{kFailure, "cannot write " + path.string()};
        out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    }
    fs::rename(tmp, path);
}

CertId parse_cert(const std::string& hex) {
    try {
        return CertId::from_hex(hex);
    } catch (const std::invalid_argument& e) {
        throw CliExit{kUsage, std::string("bad certificate id: ") + e.what()};
    }
}

DuplexMac parse_key(const std::string& hex, const char* what) {
    if (hex.empty()) throw CliExit{kUsage, std::string(what) + " is required (flag or environment)"};
    try {
        return DuplexMac::from_hex(hex);
    } catch (const std::invalid_argument& e) {
        throw CliExit{kUsage, std::string(what) + ": " + e.what()};
    }
}

RevocationTree load_tree(const fs::path& path) {
    try {
        return RevocationTree::from_snapshot(read_file(path));
    } catch (const TreeError& e) {
        throw CliExit{kUsage, path.string() + ": " + e.what()};
    }
}

int tree_exit(const TreeError& e) {
    switch (e.code()) {
        case TreeErrc::NotFound: return kNotFound;
        case TreeErrc::DuplicateCertificate: return kDuplicate;
        default: return kFailure;
    }
}

int error_exit(net::ErrorCode code) {
    switch (code) {
        case net::ErrorCode::NotFound: return kNotFound;
        case net::ErrorCode::Duplicate: return kDuplicate;
        case net::ErrorCode::BadRequest: return kUsage;
        default: return kFailure;
    }
}

std::unique_ptr<net::Clock> make_clock(std::uint64_t fixed) {
    if (fixed > 0) return std::make_unique<net::ManualClock>(fixed);
    return std::make_unique<net::SystemClock>();
}

void print_proof(const MembershipProof& proof) {
    std::cout << "class " << proof.cert.class_id << "\n";
    std::cout << "depth " << proof.path.size() << "\n";
    std::cout << "epoch " << proof.signed_root.epoch << "\n";
    std::cout << "root " << to_hex(proof.signed_root.root_digest) << "\n";
    std::cout << "proof " << to_hex(proof.serialize()) << "\n";
}

// ---------------------------------------------------------------- plan

struct PlanArgs {
    std::string registry;
    int k_min = 2;
    int k_max = 8;
    double fraction = planner::kDefaultRevocationFraction;
    std::string out;
};

int cmd_plan(const PlanArgs& a) {
    std::vector<planner::VehicleClass> classes;
    planner::ArityChoice choice;
    try {
        classes = planner::load_registry(a.registry);
        choice = planner::optimal_k(classes, a.k_min, a.k_max, wire_proof_model(), a.fraction);
    } catch (const planner::PlannerError& e) {
        throw CliExit{kUsage, e.what()};
    }
    const auto doc = planner::plan_to_json(choice.plan).dump(2) + "\n";
    if (a.out.empty()) {
        std::cout << doc;
    } else {
        write_file(a.out, ByteView(reinterpret_cast<const std::uint8_t*>(doc.data()), doc.size()));
    }

    std::ostream& report = a.out.empty() ? std::cerr : std::cout;
    report << "k = " << choice.k << "\n";
    for (const auto& [k, bytes] : choice.sweep) report << "  k=" << k << " expected proof bytes " << bytes << "\n";
    for (const auto& cp : choice.plan.classes) {
        report << "class " << cp.class_id << " " << cp.label << ": code depth " << cp.code_depth << ", capacity " << cp.capacity
               << ", leaf depth " << cp.leaf_depth << ", proof bytes " << proof_wire_size(cp.leaf_depth, choice.plan.k) << "\n";
    }
    return kOk;
}

// ---------------------------------------------------------------- init

struct InitArgs {
    std::string plan;
    std::string out;
    std::string key;
};

int cmd_init(const InitArgs& a) {
    planner::HuffmanPlan plan;
    try {
        const auto raw = read_file(a.plan);
        plan = planner::plan_from_json(nlohmann::json::parse(raw.begin(), raw.end()));
    } catch (const nlohmann::json::exception& e) {
        throw CliExit{kUsage, a.plan + ": " + e.what()};
    } catch (const planner::PlannerError& e) {
        throw CliExit{kUsage, a.plan + ": " + e.what()};
    }
    const auto key = parse_key(a.key, "--key");
    RevocationTree tree(plan);
    tree.sign_root(key);
    write_file(a.out, tree.to_snapshot());
    std::cout << "epoch 0\nroot " << to_hex(tree.root_digest()) << "\n";
    return kOk;
}

// ---------------------------------------------------------------- revoke

struct TargetArgs {
    std::string tree;
    std::string rsu;
    std::string cert;
    std::string key;
    std::string rsu_key;
    int class_id = -1;
    bool remove = false;
    std::uint64_t timeout_ms = 2000;
};

int cmd_revoke(const TargetArgs& a) {
    const auto id = parse_cert(a.cert);
    const auto key = parse_key(a.key, "--key");
    if (a.class_id < 0 && !a.remove) throw CliExit{kUsage, "--class is required when revoking"};
    const TreeOp op{a.remove ? OpKind::Remove : OpKind::Insert, {id, std::max(a.class_id, 0)}};

    TreeDelta delta;
    if (!a.tree.empty()) {
        auto tree = load_tree(a.tree);
        try {
            delta = tree.apply_ops(std::span<const TreeOp>(&op, 1));
        } catch (const TreeError& e) {
            throw CliExit{tree_exit(e), e.what()};
        }
        delta.new_signed_root = tree.sign_root(key);
        write_file(a.tree, tree.to_snapshot());
    } else {
        net::AdminRevoke msg;
        msg.request_id = 1;
        msg.op = op;
        msg.sign(key);
        net::TcpTransport tcp;
        net::Message reply;
        try {
            reply = net::decode_frame(tcp.roundtrip(a.rsu, net::encode_frame(msg), std::chrono::milliseconds(a.timeout_ms)));
        } catch (const net::TransportError& e) {
            throw CliExit{kTransport, e.what()};
        } catch (const net::MalformedFrame& e) {
            throw CliExit{kTransport, std::string("malformed reply: ") + e.what()};
        }
        if (const auto* err = std::get_if<net::ErrorMessage>(&reply)) {
            throw CliExit{error_exit(err->code), std::string(net::error_code_name(err->code)) + ": " + err->text};
        }
        const auto* d = std::get_if<net::DeltaMessage>(&reply);
        if (d == nullptr) throw CliExit{kTransport, "unexpected reply"};
        delta = d->delta;
    }
    std::cout << "epoch " << delta.epoch << "\n";
    for (const auto& o : delta.ops) {
        std::cout << (o.kind == OpKind::Insert ? "insert " : "remove ") << o.cert.id.to_hex() << " class " << o.cert.class_id
                  << "\n";
    }
    std::cout << "root " << to_hex(delta.new_signed_root.root_digest) << "\n";
    return kOk;
}

// ---------------------------------------------------------------- query / verify

struct RemoteAnswer {
    net::QueryOutcome outcome;
    std::optional<MembershipProof> proof;
};

RemoteAnswer remote_query(const TargetArgs& a, const CertId& id, std::uint64_t fixed_clock) {
    const auto ttp = parse_key(a.key, "--key");
    const auto rsu = parse_key(a.rsu_key, "--rsu-key");
    net::TcpTransport tcp;
    auto clock = make_clock(fixed_clock);
    net::VehicleOptions opts;
    opts.timeout = std::chrono::milliseconds(a.timeout_ms);
    net::VehicleClient vehicle(ttp, {{a.rsu, &rsu}}, tcp, *clock, opts);
    auto out = vehicle.query(a.rsu, id);
    if (out.outcome == net::Outcome::Distrust && (out.reason == "timeout" || out.reason == "transport")) {
        throw CliExit{kTransport, "transport: " + out.reason};
    }
    RemoteAnswer answer{out, std::nullopt};
    if (out.outcome == net::Outcome::Revoked && vehicle.last_proof()) answer.proof = *vehicle.last_proof();
    return answer;
}

int cmd_query(const TargetArgs& a, const std::string& proof_out, std::uint64_t fixed_clock) {
    const auto id = parse_cert(a.cert);
    if (!a.tree.empty()) {
        const auto tree = load_tree(a.tree);
        if (!tree.contains(id)) {
            std::cout << "NOT_REVOKED\nepoch " << tree.epoch() << "\nroot " << to_hex(tree.root_digest()) << "\n";
            return kOk;
        }
        MembershipProof proof;
        try {
            proof = tree.prove_membership(id);
        } catch (const TreeError& e) {
            throw CliExit{tree_exit(e), e.what()};
        }
        std::cout << "REVOKED\n";
        print_proof(proof);
        if (!proof_out.empty()) write_file(proof_out, proof.serialize());
        return kOk;
    }
    const auto [out, proof] = remote_query(a, id, fixed_clock);
    if (out.outcome == net::Outcome::Distrust) {
        std::cout << "DISTRUST " << out.reason << "\n";
        return kReject;
    }
    std::cout << (out.outcome == net::Outcome::Revoked ? "REVOKED" : "NOT_REVOKED") << "\n";
    if (proof) {
        print_proof(*proof);
        if (!proof_out.empty()) write_file(proof_out, proof->serialize());
    } else {
        std::cout << "epoch " << out.epoch << "\n";
    }
    return kOk;
}

struct VerifyArgs {
    std::string proof;
    std::uint64_t newest_epoch = 0;
    std::uint64_t window = 1;
};

int cmd_verify(const TargetArgs& a, const VerifyArgs& v, std::uint64_t fixed_clock) {
    const auto id = parse_cert(a.cert);
    if (v.proof.empty() && a.tree.empty()) {
        const auto out = remote_query(a, id, fixed_clock).outcome;
        std::cout << (out.outcome == net::Outcome::Distrust ? "REJECT " + out.reason : "ACCEPT " + out.describe()) << "\n";
        return out.outcome == net::Outcome::Distrust ? kReject : kOk;
    }

    const auto key = parse_key(a.key, "--key");
    MembershipProof proof;
    std::uint64_t newest = v.newest_epoch;
    if (!v.proof.empty()) {
        try {
            proof = MembershipProof::deserialize(read_file(v.proof));
        } catch (const DecodeError& e) {
            std::cout << "REJECT " << reason_name(RejectReason::Malformed) << "\n";
            return kReject;
        }
        if (!a.tree.empty()) newest = std::max(newest, load_tree(a.tree).epoch());
    } else {
        const auto tree = load_tree(a.tree);
        try {
            proof = tree.prove_membership(id);
        } catch (const TreeError& e) {
            throw CliExit{tree_exit(e), e.what()};
        }
        newest = std::max(newest, tree.epoch());
    }
    const auto verdict = verify_membership(proof, id, TrustAnchor{&key, newest, v.window});
    if (!verdict) {
        std::cout << "REJECT " << reason_name(verdict.reason) << "\n";
        return kReject;
    }
    std::cout << "ACCEPT revoked\n";
    return kOk;
}

// ---------------------------------------------------------------- bench

int cmd_bench(const BenchConfig& cfg, const std::string& json_out) {
    const auto rep = run_bench(cfg);
    std::cout << rep.table();
    if (!json_out.empty()) {
        const auto doc = rep.to_json().dump(2) + "\n";
        write_file(json_out, ByteView(reinterpret_cast<const std::uint8_t*>(doc.data()), doc.size()));
    }
    if (!rep.proof_beats_crl) {
        spdlog::error("proof size exceeded the CRL above the break-even revoked count");
        return kFailure;
    }
    return kOk;
}

// ---------------------------------------------------------------- serve

void wait_for_signal(const std::function<void()>& tick) {
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    auto next_tick = std::chrono::steady_clock::now();
    while (!g_stop) {
        if (std::chrono::steady_clock::now() >= next_tick) {
            tick();
            next_tick = std::chrono::steady_clock::now() + std::chrono::seconds(2);
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
}

int serve_ttp(const net::NetConfig& cfg) {
    std::optional<RevocationTree> tree;
    if (!cfg.ttp.snapshot.empty() && fs::exists(cfg.ttp.snapshot)) {
        tree.emplace(load_tree(cfg.ttp.snapshot));
    } else if (!cfg.ttp.plan.empty()) {
        const auto raw = read_file(cfg.ttp.plan);
        try {
            tree.emplace(planner::plan_from_json(nlohmann::json::parse(raw.begin(), raw.end())));
        } catch (const std::exception& e) {
            throw CliExit{kUsage, cfg.ttp.plan.string() + ": " + e.what()};
        }
    } else {
        throw CliExit{kUsage, "ttp needs a plan or an existing snapshot"};
    }

    const DuplexMac key(cfg.ttp.key);
    const DuplexMac admin(cfg.ttp.admin_key);
    net::TcpTransport tcp;
    net::TtpNode ttp(std::move(*tree), key, admin, tcp, cfg.roster(), cfg.timeout);
    net::TcpServer server(ttp, cfg.ttp.address);
    server.start();
    spdlog::info("role=ttp address={} epoch={} rsus={}", cfg.ttp.address, ttp.epoch(), cfg.rsus.size());

    const auto roster = cfg.roster();
    std::set<std::string> pending(roster.begin(), roster.end());
    wait_for_signal([&] {
        // keep pushing snapshots until every RSU has acknowledged one
        for (auto it = pending.begin(); it != pending.end();) {
            if (auto failure = ttp.bootstrap(*it)) {
                spdlog::debug("role=ttp bootstrap={} pending reason=\"{}\"", *it, failure->reason);
                ++it;
            } else {
                spdlog::info("role=ttp bootstrap={} epoch={}", *it, ttp.epoch());
                it = pending.erase(it);
            }
        }
    });
    server.stop();
    if (!cfg.ttp.snapshot.empty()) write_file(cfg.ttp.snapshot, ttp.snapshot());
    spdlog::info("role=ttp shutdown epoch={}", ttp.epoch());
    return kOk;
}

int serve_rsu(const net::NetConfig& cfg, const std::string& listen, std::uint64_t fixed_clock) {
    const net::RsuConfig* me = nullptr;
    if (!listen.empty()) {
        me = cfg.find_rsu(listen);
    } else if (cfg.rsus.size() == 1) {
        me = &cfg.rsus.front();
    }
    if (me == nullptr) throw CliExit{kUsage, "pick the RSU entry with --listen host:port"};

    const DuplexMac ttp_key(cfg.ttp.key);
    const DuplexMac rsu_key(me->key);
    auto clock = make_clock(fixed_clock);
    net::TcpTransport tcp;
    net::RsuNode rsu(ttp_key, rsu_key, *clock, &tcp, net::RsuOptions{cfg.ttp.address, cfg.timeout});
    if (!me->snapshot.empty() && fs::exists(me->snapshot) && !rsu.install_snapshot(read_file(me->snapshot))) {
        spdlog::warn("role=rsu snapshot={} rejected", me->snapshot.string());
    }
    net::TcpServer server(rsu, me->address);
    server.start();
    spdlog::info("role=rsu address={} bootstrapped={}", me->address, rsu.bootstrapped());

    wait_for_signal([&] {
        if (!rsu.bootstrapped() && rsu.request_snapshot()) spdlog::info("role=rsu bootstrapped epoch={}", rsu.epoch());
    });
    server.stop();
    if (!me->snapshot.empty()) {
        if (auto snap = rsu.snapshot()) write_file(me->snapshot, *snap);
    }
    spdlog::info("role=rsu shutdown epoch={}", rsu.epoch());
    return kOk;
}

int cmd_serve(const std::string& role, const std::string& config, const std::string& listen, std::uint64_t fixed_clock) {
    net::NetConfig cfg;
    try {
        cfg = net::NetConfig::load(config);
    } catch (const net::ConfigError& e) {
        throw CliExit{kUsage, e.what()};
    }
    try {
        return role == "ttp" ? serve_ttp(cfg) : serve_rsu(cfg, listen, fixed_clock);
    } catch (const std::system_error& e) {
        throw CliExit{kTransport, e.what()};
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"revctl: Huffman-stratified revocation trees for vehicular networks"};
    app.require_subcommand(1);

    auto* plan = app.add_subcommand("plan", "plan a tree from a registry CSV");
    PlanArgs plan_args;
    plan->add_option("--registry", plan_args.registry, "registry CSV: class_id,label,query_weight,population")->required();
    plan->add_option("--k-min", plan_args.k_min, "smallest arity to try")->check(CLI::Range(2, planner::kMaxArity));
    plan->add_option("--k-max", plan_args.k_max, "largest arity to try")->check(CLI::Range(2, planner::kMaxArity));
    plan->add_option("--fraction", plan_args.fraction, "revocable fraction of each class")->check(CLI::Range(0.0, 1.0));
    plan->add_option("--out", plan_args.out, "plan JSON path (stdout if omitted)");

    auto* init = app.add_subcommand("init", "create an empty, signed tree snapshot from a plan");
    InitArgs init_args;
    init->add_option("--plan", init_args.plan, "plan JSON")->required();
    init->add_option("--out", init_args.out, "snapshot path")->required();
    init->add_option("--key", init_args.key, "TTP key (64 hex)")->envname("HUFFREV_TTP_KEY");

    TargetArgs target;
    auto add_target = [&target](CLI::App* cmd, bool remote_keys) {
        auto* tree = cmd->add_option("--tree", target.tree, "tree snapshot file");
        auto* rsu = cmd->add_option("--rsu", target.rsu, "node address host:port");
        tree->excludes(rsu);
        cmd->add_option("--cert", target.cert, "certificate id (hex)")->required();
        cmd->add_option("--key", target.key, "TTP key (64 hex)")->envname("HUFFREV_TTP_KEY");
        if (remote_keys) cmd->add_option("--rsu-key", target.rsu_key, "RSU response key (64 hex)")->envname("HUFFREV_RSU_KEY");
        cmd->add_option("--timeout-ms", target.timeout_ms, "network timeout");
    };

    auto* revoke = app.add_subcommand("revoke", "revoke a certificate in a snapshot or through the TTP");
    add_target(revoke, false);
    revoke->add_option("--class", target.class_id, "vehicle class id")->check(CLI::Range(0, planner::kMaxClassId));
    revoke->add_flag("--remove", target.remove, "tombstone a revoked certificate instead");

    std::uint64_t fixed_clock = 0;
    auto* query = app.add_subcommand("query", "ask a snapshot or an RSU about a certificate");
    add_target(query, true);
    std::string proof_out;
    query->add_option("--proof-out", proof_out, "write the binary proof here");
    query->add_option("--fixed-clock", fixed_clock, "pin the clock (seconds) for reproducible runs");

    auto* verify = app.add_subcommand("verify", "verify a proof file, a snapshot proof or an RSU answer");
    add_target(verify, true);
    VerifyArgs verify_args;
    verify->add_option("--proof", verify_args.proof, "binary proof file");
    verify->add_option("--newest-epoch", verify_args.newest_epoch, "newest epoch known to the verifier");
    verify->add_option("--window", verify_args.window, "freshness window in epochs");
    verify->add_option("--fixed-clock", fixed_clock, "pin the clock (seconds)");

    auto* bench = app.add_subcommand("bench", "compare proofs with a flat CRL on a synthetic fleet");
    BenchConfig bench_cfg;
    std::string bench_json;
    bench->add_option("--fleet", bench_cfg.fleet, "fleet size")->check(CLI::PositiveNumber);
    bench->add_option("--fraction", bench_cfg.revoked_fraction, "revoked fraction")->check(CLI::Range(0.0, 1.0));
    bench->add_option("--k-min", bench_cfg.k_min)->check(CLI::Range(2, planner::kMaxArity));
    bench->add_option("--k-max", bench_cfg.k_max)->check(CLI::Range(2, planner::kMaxArity));
    bench->add_option("--seed", bench_cfg.seed);
    bench->add_option("--json", bench_json, "write the report as JSON");

    auto* serve = app.add_subcommand("serve", "run a TTP or RSU node until interrupted");
    std::string role, config, listen;
    serve->add_option("--role", role, "ttp or rsu")->required()->check(CLI::IsMember({"ttp", "rsu"}));
    serve->add_option("--config", config, "network config JSON")->required();
    serve->add_option("--listen", listen, "which RSU entry to run (its address)");
    serve->add_option("--fixed-clock", fixed_clock, "pin the clock (seconds)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    setup_logging(serve->parsed() ? "info" : "warn");
    try {
        if (plan->parsed()) {
            if (plan_args.k_min > plan_args.k_max) throw CliExit{kUsage, "--k-min exceeds --k-max"};
            return cmd_plan(plan_args);
        }
        if (init->parsed()) return cmd_init(init_args);
        if (serve->parsed()) return cmd_serve(role, config, listen, fixed_clock);
        if (bench->parsed()) {
            if (bench_cfg.k_min > bench_cfg.k_max) throw CliExit{kUsage, "--k-min exceeds --k-max"};
            return cmd_bench(bench_cfg, bench_json);
        }
        const bool proof_only = verify->parsed() && !verify_args.proof.empty();
        if (target.tree.empty() && target.rsu.empty() && !proof_only) throw CliExit{kUsage, "one of --tree or --rsu is required"};
        if (revoke->parsed()) return cmd_revoke(target);
        if (query->parsed()) return cmd_query(target, proof_out, fixed_clock);
        if (verify->parsed()) return cmd_verify(target, verify_args, fixed_clock);
    } catch (const CliExit& e) {
        if (!e.message.empty()) std::cerr << "revctl: " << e.message << "\n";
        return e.code;
    } catch (const std::exception& e) {
        std::cerr << "revctl: " << e.what() << "\n";
        return kFailure;
    }
    return kUsage;
}
