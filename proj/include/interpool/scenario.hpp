#pragma once
// Declarative scenarios and the deterministic runner that drives a whole
// Simulation from one config: account funding, provider lifecycles, scripted
// burn claims, ratio shocks, collateral injections and commitment faults,
// plus an auto-generated trading workload whose hash classes can fill every
// locked slot when forging is enabled.
//
// The runner plays the honest-provider strategy for every non-deaf provider:
// an assigned claim is paid on the alien chain in the next block, the payment
// proof is assembled as soon as its block is mined, and the proof is
// submitted (and re-submitted while the claim stays assigned) once the
// settlement layer holds a commitment for its height. Re-submission is what
// recovers a claim whose first proof trips the forgery alarm.
//
// Outputs are deterministic strings: an event journal (JSON lines), a
// per-block position report (CSV) and a final summary (JSON). Two runs with
// the same config and seed produce byte-identical outputs regardless of the
// optimizer thread count.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "interpool/sim.hpp"

namespace interpool {

struct ScenarioAccount {
    uint64_t id = 0;
    Native native;
    Intertoken intertoken;
};

struct ScenarioProvider {
    uint64_t id = 0;
    ProviderKind kind = ProviderKind::regular;
    Native deposit;
    uint64_t join_block = 1;
    uint64_t alien_seed = 0;
    bool deaf = false;  // ignores assigned claims; used to exercise defaults
    std::optional<uint64_t> exit_block;
};

struct ScenarioClaim {
    uint64_t block = 0;
    uint64_t claimant = 0;
    Intertoken amount;
};

// A swap sized at run time so the pool lands on the given ratio. The volume
// is the gap between the current inventory and the constant-product point at
// the target, so a shock stays exact no matter what traded earlier.
struct ScenarioShock {
    uint64_t block = 0;
    uint64_t trader = 0;
    Ratio target_ratio;
};

struct ScenarioInjection {
    uint64_t block = 0;
    uint64_t provider = 0;
    Native amount;
};

struct ScenarioWorkload {
    int traders = 0;  // auto-funded accounts first_trader .. first_trader+n-1
    uint64_t first_trader = 400;
    int extra_txs = 0;  // unconstrained transactions beyond the locked prefix
    Native trade_floor = Native::from_string("0.01");
    Native trade_span = Native::from_string("0.04");
    Native trader_native = Native::from_int(200);
    Intertoken trader_intertoken = Intertoken::from_int(20);
};

struct ScenarioConfig {
    std::string name = "scenario";
    uint64_t blocks = 0;
    uint64_t seed = 1;
    SimParams sim{};
    std::vector<ScenarioAccount> accounts;
    ScenarioWorkload workload{};
    std::vector<ScenarioProvider> providers;
    std::vector<ScenarioClaim> claims;
    std::vector<ScenarioShock> shocks;
    std::vector<ScenarioInjection> injections;
    std::vector<uint64_t> missed_forge_blocks;  // blocks given an empty batch
    std::vector<uint64_t> bad_record_blocks;    // commitments recorded corrupted

    static ScenarioConfig from_json(const json& j);
    static ScenarioConfig from_file(const std::string& path);
};

namespace detail_scenario {

inline int64_t int_field(const json& j, const char* key, int64_t fallback) {
    return j.contains(key) ? j.at(key).get<int64_t>() : fallback;
}

inline bool bool_field(const json& j, const char* key, bool fallback) {
    return j.contains(key) ? j.at(key).get<bool>() : fallback;
}

template <Unit U>
Amount<U> amount_field(const json& j, const char* key, Amount<U> fallback = {}) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (v.is_string()) return Amount<U>::from_string(v.get<std::string>());
    return Amount<U>::from_int(v.get<int64_t>());
}

inline Ratio ratio_field(const json& j, const char* key, Ratio fallback) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (v.is_string()) return Ratio::from_string(v.get<std::string>());
    return Ratio::from_int(v.get<int64_t>());
}

inline std::vector<uint64_t> block_list(const json& j, const char* key) {
    std::vector<uint64_t> out;
    if (j.contains(key))
        for (const auto& v : j.at(key)) out.push_back(v.get<uint64_t>());
    return out;
}

inline SimParams sim_params_from_json(const json& j) {
    SimParams p;
    p.poe_enabled = bool_field(j, "poe_enabled", p.poe_enabled);
    p.hash_bits = int(int_field(j, "hash_bits", p.hash_bits));
    p.bits_per_tx = int(int_field(j, "bits_per_tx", p.bits_per_tx));
    p.min_batch = size_t(int_field(j, "min_batch", int64_t(p.min_batch)));
    p.booster_enabled = bool_field(j, "booster_enabled", p.booster_enabled);
    p.booster_key_seed = uint64_t(int_field(j, "booster_key_seed", int64_t(p.booster_key_seed)));
    if (j.contains("bootstrap_ratio"))
        p.bootstrap_ratio = ratio_field(j, "bootstrap_ratio", Ratio{});
    p.min_volume_threshold = amount_field<Unit::native>(j, "min_volume_threshold");
    p.finality_depth = int_field(j, "finality_depth", p.finality_depth);
    p.premine_height = int_field(j, "premine_height", p.premine_height);
    if (j.contains("fee")) {
        const json& f = j.at("fee");
        p.fee_policy.rate = ratio_field(f, "rate", p.fee_policy.rate);
        p.fee_policy.fee_min = ratio_field(f, "min", p.fee_policy.fee_min);
        p.fee_policy.fee_max = ratio_field(f, "max", p.fee_policy.fee_max);
        p.fee_policy.target_liquidity =
            amount_field<Unit::native>(f, "target_liquidity", p.fee_policy.target_liquidity);
    }
    if (j.contains("risk")) {
        const json& r = j.at("risk");
        p.risk.injection_margin = ratio_field(r, "injection_margin", p.risk.injection_margin);
        p.risk.flag_grace_blocks =
            int(int_field(r, "flag_grace_blocks", p.risk.flag_grace_blocks));
    }
    if (j.contains("buffer")) {
        const json& b = j.at("buffer");
        p.buffer.booster_rate = ratio_field(b, "booster_rate", p.buffer.booster_rate);
        p.buffer.payout_interval = int(int_field(b, "payout_interval", p.buffer.payout_interval));
        p.buffer.volatility_window =
            int(int_field(b, "volatility_window", p.buffer.volatility_window));
        if (b.contains("volatility_threshold"))
            p.buffer.volatility_threshold = b.at("volatility_threshold").get<double>();
        p.buffer.deploy_fraction = ratio_field(b, "deploy_fraction", p.buffer.deploy_fraction);
        p.buffer.native_floor = amount_field<Unit::native>(b, "native_floor", p.buffer.native_floor);
        p.buffer.intertoken_floor =
            amount_field<Unit::intertoken>(b, "intertoken_floor", p.buffer.intertoken_floor);
    }
    if (j.contains("burncycle")) {
        const json& b = j.at("burncycle");
        p.burncycle.transfer_window =
            int(int_field(b, "transfer_window", p.burncycle.transfer_window));
        p.burncycle.cycle_length = int(int_field(b, "cycle_length", p.burncycle.cycle_length));
        p.burncycle.exit_penalty_max =
            ratio_field(b, "exit_penalty_max", p.burncycle.exit_penalty_max);
        p.burncycle.never_liquidity_limit =
            int(int_field(b, "never_liquidity_limit", p.burncycle.never_liquidity_limit));
    }
    if (j.contains("search")) {
        const json& s = j.at("search");
        p.search.move_budget = size_t(int_field(s, "move_budget", int64_t(p.search.move_budget)));
        p.search.restarts = size_t(int_field(s, "restarts", int64_t(p.search.restarts)));
        p.search.threads = size_t(int_field(s, "threads", int64_t(p.search.threads)));
        p.search.seed = uint64_t(int_field(s, "seed", int64_t(p.search.seed)));
    }
    return p;
}

}  // namespace detail_scenario

inline ScenarioConfig ScenarioConfig::from_json(const json& j) {
    using namespace detail_scenario;
    if (int_field(j, "schema", 1) != 1)
        throw std::invalid_argument("unsupported scenario schema version");
    ScenarioConfig c;
    c.name = j.contains("name") ? j.at("name").get<std::string>() : c.name;
    c.blocks = uint64_t(int_field(j, "blocks", 0));
    c.seed = uint64_t(int_field(j, "seed", 1));
    if (j.contains("sim")) c.sim = sim_params_from_json(j.at("sim"));
    if (!j.contains("sim") || !j.at("sim").contains("search") ||
        !j.at("sim").at("search").contains("seed"))
        c.sim.search.seed = c.seed;
    if (j.contains("accounts"))
        for (const auto& a : j.at("accounts"))
            c.accounts.push_back({uint64_t(int_field(a, "id", 0)),
                                  amount_field<Unit::native>(a, "native"),
                                  amount_field<Unit::intertoken>(a, "intertoken")});
    if (j.contains("workload")) {
        const json& w = j.at("workload");
        c.workload.traders = int(int_field(w, "traders", 0));
        c.workload.first_trader = uint64_t(int_field(w, "first_trader", 400));
        c.workload.extra_txs = int(int_field(w, "extra_txs", 0));
        c.workload.trade_floor =
            amount_field<Unit::native>(w, "trade_floor", c.workload.trade_floor);
        c.workload.trade_span = amount_field<Unit::native>(w, "trade_span", c.workload.trade_span);
        c.workload.trader_native =
            amount_field<Unit::native>(w, "trader_native", c.workload.trader_native);
        c.workload.trader_intertoken =
            amount_field<Unit::intertoken>(w, "trader_intertoken", c.workload.trader_intertoken);
    }
    if (j.contains("providers"))
        for (const auto& p : j.at("providers")) {
            ScenarioProvider sp;
            sp.id = uint64_t(int_field(p, "id", 0));
            std::string kind = p.contains("kind") ? p.at("kind").get<std::string>() : "regular";
            if (kind == "full")
                sp.kind = ProviderKind::full;
            else if (kind == "regular")
                sp.kind = ProviderKind::regular;
            else
                throw std::invalid_argument("unknown provider kind: " + kind);
            sp.deposit = amount_field<Unit::native>(p, "deposit");
            sp.join_block = uint64_t(int_field(p, "join_block", 1));
            sp.alien_seed = uint64_t(int_field(p, "alien_seed", 1000 + sp.id));
            sp.deaf = bool_field(p, "deaf", false);
            if (p.contains("exit_block")) sp.exit_block = p.at("exit_block").get<uint64_t>();
            c.providers.push_back(sp);
        }
    if (j.contains("claims"))
        for (const auto& cl : j.at("claims"))
            c.claims.push_back({uint64_t(int_field(cl, "block", 0)),
                                uint64_t(int_field(cl, "claimant", 0)),
                                amount_field<Unit::intertoken>(cl, "amount")});
    if (j.contains("shocks"))
        for (const auto& s : j.at("shocks"))
            c.shocks.push_back({uint64_t(int_field(s, "block", 0)),
                                uint64_t(int_field(s, "trader", 0)),
                                detail_scenario::ratio_field(s, "target_ratio", Ratio::from_int(1))});
    if (j.contains("injections"))
        for (const auto& i : j.at("injections"))
            c.injections.push_back({uint64_t(int_field(i, "block", 0)),
                                    uint64_t(int_field(i, "provider", 0)),
                                    amount_field<Unit::native>(i, "amount")});
    c.missed_forge_blocks = block_list(j, "missed_forge_blocks");
    c.bad_record_blocks = block_list(j, "bad_record_blocks");
    return c;
}

inline ScenarioConfig ScenarioConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scenario config: " + path);
    json j = json::parse(in);
    return from_json(j);
}

struct ScenarioOutput {
    std::string name;
    std::vector<BlockReport> reports;
    std::string events_jsonl;
    std::string report_csv;
    json summary;
};

class ScenarioRunner {
  public:
    explicit ScenarioRunner(ScenarioConfig cfg)
        : cfg_(std::move(cfg)), sim_(cfg_.sim), rng_(cfg_.seed) {
        for (const auto& p : cfg_.providers) {
            ProviderDriver d;
            d.cfg = p;
            d.keys = keypair_from_seed(p.alien_seed);
            sim_.register_alien_identity(d.keys);
            providers_[p.id] = d;
        }
        for (const auto& cl : cfg_.claims)
            if (!claimant_keys_.count(cl.claimant)) {
                KeyPair kp = keypair_from_seed(0xC1A13000u + cl.claimant);
                sim_.register_alien_identity(kp);
                claimant_keys_[cl.claimant] = kp;
            }
        for (const auto& a : cfg_.accounts) {
            if (a.native.mantissa() > 0) sim_.credit_native(a.id, a.native);
            if (a.intertoken.mantissa() > 0) sim_.credit_intertoken(a.id, a.intertoken);
        }
        for (int t = 0; t < cfg_.workload.traders; ++t) {
            uint64_t id = cfg_.workload.first_trader + uint64_t(t);
            sim_.credit_native(id, cfg_.workload.trader_native);
            sim_.credit_intertoken(id, cfg_.workload.trader_intertoken);
        }
        for (uint64_t b : cfg_.bad_record_blocks) sim_.corrupt_forge(b);
    }

    Simulation& simulation() { return sim_; }
    const Simulation& simulation() const { return sim_; }

    ScenarioOutput run() {
        ScenarioOutput out;
        out.name = cfg_.name;
        std::ostringstream csv;
        csv << "block,provider,status,current_intertoken,current_native,risky_intertoken,"
               "risky_native,collateral,remaining,injection_request,total_balance\n";
        for (uint64_t b = 1; b <= cfg_.blocks; ++b) {
            schedule_inputs(b);
            drive_honest_providers(b);
            out.reports.push_back(sim_.produce_block(build_workload(b)));
            collect_proofs();
            append_valuations(csv, b);
        }
        out.report_csv = csv.str();
        out.events_jsonl = sim_.log().to_jsonl();
        out.summary = build_summary();
        return out;
    }

  private:
    struct ProviderDriver {
        ScenarioProvider cfg;
        KeyPair keys;
        uint64_t alien_nonce = 1;
    };

    // One alien payment riding toward a proof: submitted in some block, its
    // receipt becomes provable once that block is mined, and the proof is
    // pushed every block from the first one whose settlement layer holds a
    // commitment for the height until the claim leaves the assigned state.
    struct PaymentDriver {
        bool submitted = false;
        int64_t height = -1;
        AlienTx tx;
        std::optional<SpvProof> proof;
        uint64_t last_push = 0;
    };

    void schedule_inputs(uint64_t b) {
        for (auto& [id, d] : providers_) {
            if (d.cfg.join_block == b) {
                sim_.register_provider_alien_key(id, d.keys.pubkey);
                sim_.join_provider(id, d.cfg.kind, d.cfg.deposit);
            }
            if (d.cfg.exit_block && *d.cfg.exit_block == b) sim_.request_exit(id);
        }
        for (const auto& i : cfg_.injections)
            if (i.block == b) sim_.inject_collateral(i.provider, i.amount);
        for (const auto& cl : cfg_.claims)
            if (cl.block == b)
                sim_.submit_claim(cl.claimant, claimant_keys_.at(cl.claimant).pubkey, cl.amount);
    }

    void drive_honest_providers(uint64_t b) {
        predicted_bad_height_.reset();
        for (const auto& [claim_id, claim] : sim_.burn().claims()) {
            if (claim.state != ClaimState::assigned || !claim.provider_id) continue;
            auto pit = providers_.find(*claim.provider_id);
            if (pit == providers_.end() || pit->second.cfg.deaf) continue;
            ProviderDriver& prov = pit->second;
            PaymentDriver& pay = payments_[claim_id];
            if (!pay.submitted) {
                pay.tx = make_alien_transfer(prov.keys, claim.claimant_alien_pubkey,
                                             to_alien(claim.amount), prov.alien_nonce++);
                pay.height = sim_.chain().tip_height() + 1;
                pay.submitted = true;
                sim_.submit_alien_tx(pay.tx);
                continue;
            }
            if (!pay.proof || pay.last_push == b) continue;
            auto hit = sim_.forged_headers().find(pay.height);
            if (hit == sim_.forged_headers().end()) continue;
            sim_.submit_burn_proof(claim_id, *pay.proof);
            pay.last_push = b;
            // A proof against a corrupted record will raise the alarm this
            // block; plan the doubled-lane batch for it up front.
            if (hit->second != sim_.chain().block_at(pay.height).header_hash &&
                !sim_.repair_height())
                predicted_bad_height_ = pay.height;
        }
    }

    // Builds the proof for a payment once its alien block exists.
    void collect_proofs() {
        for (auto& [claim_id, pay] : payments_) {
            if (!pay.submitted || pay.proof || sim_.chain().tip_height() < pay.height) continue;
            const AlienBlock& block = sim_.chain().block_at(pay.height);
            auto leaves = AlienChain::leaves_of(block);
            Hash256 want = pay.tx.leaf_hash();
            for (size_t i = 0; i < leaves.size(); ++i)
                if (leaves[i] == want) {
                    pay.proof = make_spv_proof(block, i);
                    break;
                }
        }
    }

    std::vector<MainnetTx> build_workload(uint64_t b) {
        if (std::find(cfg_.missed_forge_blocks.begin(), cfg_.missed_forge_blocks.end(), b) !=
            cfg_.missed_forge_blocks.end())
            return {};
        std::vector<MainnetTx> mempool;
        if (cfg_.sim.poe_enabled && cfg_.workload.traders > 0) {
            PoeParams plan = sim_.next_poe_params();
            if (predicted_bad_height_) {
                plan.bits_per_tx = cfg_.sim.bits_per_tx * 2;
                plan.target_hashes = {
                    sim_.chain().block_at(*predicted_bad_height_).header_hash,
                    sim_.chain().block_at(sim_.commit_height_of(b)).header_hash};
            }
            const size_t prefix = plan.prefix_length();
            for (size_t g = 0; g < prefix; ++g)
                mempool.push_back(salted_trade(poe::detail_poe::slot_bit_class(g, plan), plan));
            for (int i = 0; i < cfg_.workload.extra_txs; ++i) mempool.push_back(random_trade());
        } else if (cfg_.workload.traders > 0) {
            for (int i = 0; i < cfg_.workload.extra_txs; ++i) mempool.push_back(random_trade());
        }
        for (const auto& s : cfg_.shocks)
            if (s.block == b)
                if (auto tx = shock_trade(s)) mempool.push_back(*tx);
        return mempool;
    }

    MainnetTx random_trade() {
        uint64_t sender = cfg_.workload.first_trader + rng_() % uint64_t(cfg_.workload.traders);
        uint64_t nonce = ++trade_nonce_[sender];
        bool buying = (rng_() & 1) != 0;
        int128 span = cfg_.workload.trade_span.mantissa();
        int128 volume = cfg_.workload.trade_floor.mantissa() +
                        (span > 0 ? int128(rng_() % uint64_t(span)) : 0);
        return make_exchange_tx(sender, nonce, Ratio::from_string("0.0001"),
                                GasAmount::from_int(1),
                                buying ? ExchangeDirection::buy_intertoken
                                       : ExchangeDirection::sell_intertoken,
                                volume, Ratio{}, Ratio::from_int(1000000));
    }

    // Nudges the trade volume by single mantissa steps until the transaction
    // hash falls in the wanted bit class; the value drift is a few units in
    // the twelfth decimal place.
    MainnetTx salted_trade(uint32_t want, const PoeParams& plan) {
        MainnetTx tx = random_trade();
        while (poe::detail_poe::tx_bit_class(tx.tx_hash, plan) != want) {
            std::get<ExchangeOrder>(tx.order).volume_in += 1;
            tx.rehash();
        }
        return tx;
    }

    std::optional<MainnetTx> shock_trade(const ScenarioShock& s) {
        const PoolState& pool = sim_.pool();
        if (!pool.has_liquidity()) return std::nullopt;
        PoolCoins product = coins_of(pool.intertoken_inventory, pool.native_inventory);
        PositionLegs target = position_at_ratio(product, s.target_ratio);
        uint64_t nonce = ++trade_nonce_[s.trader];
        if (target.native > pool.native_inventory) {
            int128 volume = (target.native - pool.native_inventory).mantissa();
            return make_exchange_tx(s.trader, nonce, Ratio::from_string("0.0001"),
                                    GasAmount::from_int(1), ExchangeDirection::buy_intertoken,
                                    volume, Ratio{}, Ratio::from_int(1000000));
        }
        if (target.intertoken > pool.intertoken_inventory) {
            int128 volume = (target.intertoken - pool.intertoken_inventory).mantissa();
            return make_exchange_tx(s.trader, nonce, Ratio::from_string("0.0001"),
                                    GasAmount::from_int(1), ExchangeDirection::sell_intertoken,
                                    volume, Ratio{}, Ratio::from_int(1000000));
        }
        return std::nullopt;
    }

    void append_valuations(std::ostringstream& csv, uint64_t b) {
        for (const auto& v : sim_.valuations()) {
            Native total = v.current_native + v.remaining;
            csv << b << ',' << v.id << ',' << provider_status_name(v.status) << ','
                << v.current_intertoken.to_string() << ',' << v.current_native.to_string() << ','
                << v.risky_intertoken.to_string() << ',' << v.risky_native.to_string() << ','
                << v.collateral.to_string() << ',' << v.remaining.to_string() << ','
                << v.injection_request.to_string() << ',' << total.to_string() << '\n';
        }
    }

    json build_summary() const {
        json s;
        s["name"] = cfg_.name;
        s["blocks"] = cfg_.blocks;
        s["seed"] = cfg_.seed;
        const PoolState& pool = sim_.pool();
        json fin;
        fin["pool_intertoken"] = pool.intertoken_inventory.to_string();
        fin["pool_native"] = pool.native_inventory.to_string();
        if (pool.has_liquidity()) fin["ratio"] = pool_ratio(pool).to_string();
        fin["minted"] = pool.supply.minted_total.to_string();
        fin["burned"] = pool.supply.burned_total.to_string();
        fin["escrow"] = sim_.escrow().to_string();
        fin["buffer_intertoken"] = sim_.buffer().intertoken_stack().to_string();
        fin["buffer_native"] = sim_.buffer().native_stack().to_string();
        fin["burn_debt"] = sim_.buffer().burn_debt().to_string();
        fin["booster_owed"] = sim_.buffer().booster_owed().to_string();
        s["final"] = std::move(fin);
        json provs = json::array();
        for (const auto& [id, pos] : sim_.risk_book().positions()) {
            json p;
            p["id"] = id;
            p["kind"] = provider_kind_name(pos.kind);
            p["status"] = provider_status_name(pos.status);
            p["collateral"] = pos.collateral.to_string();
            provs.push_back(std::move(p));
        }
        s["providers"] = std::move(provs);
        json claims = json::array();
        for (const auto& [id, cl] : sim_.burn().claims()) {
            json c;
            c["claim_id"] = id;
            c["state"] = claim_state_name(cl.state);
            c["amount"] = cl.amount.to_string();
            claims.push_back(std::move(c));
        }
        s["claims"] = std::move(claims);
        std::map<std::string, size_t> counts;
        for (const auto& e : sim_.log().events()) ++counts[e.kind];
        json ev;
        for (const auto& [kind, n] : counts) ev[kind] = n;
        s["events"] = std::move(ev);
        return s;
    }

    ScenarioConfig cfg_;
    Simulation sim_;
    std::mt19937_64 rng_;
    std::map<uint64_t, ProviderDriver> providers_;
    std::map<uint64_t, KeyPair> claimant_keys_;
    std::map<uint64_t, PaymentDriver> payments_;
    std::map<uint64_t, uint64_t> trade_nonce_;
    std::optional<int64_t> predicted_bad_height_;
};

// Runs a config and writes events.jsonl, report.csv and summary.json under
// the given directory (created if missing). Returns the output it wrote.
inline ScenarioOutput run_scenario_to_dir(const ScenarioConfig& cfg, const std::string& dir) {
    ScenarioRunner runner(cfg);
    ScenarioOutput out = runner.run();
    std::filesystem::create_directories(dir);
    auto write = [&dir](const std::string& file, const std::string& text) {
        std::ofstream f(std::filesystem::path(dir) / file, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + file + " under " + dir);
        f << text;
    };
    write("events.jsonl", out.events_jsonl);
    write("report.csv", out.report_csv);
    write("summary.json", out.summary.dump(2) + "\n");
    return out;
}

}  // namespace interpool
