// Command-line face of the simulator.
//
//   interpool simulate     run a scenario config, write/print reports
//   interpool entropy      ordering-freedom count for a constrained batch
//   interpool optimize     order one batch from a file against target hashes
//   interpool verify-proof check an SPV payment proof against a forged header
//   interpool swap-demo    scripted cross-chain swap: happy path and slash
//
// All outputs are JSON on stdout; exit code 0 means every check passed.
// INTERPOOL_LOG=quiet|summary|events controls how much `simulate` prints.

#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "interpool/entropy.hpp"
#include "interpool/listrack.hpp"
#include "interpool/scenario.hpp"

using namespace interpool;

namespace {

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return json::parse(in);
}

int run_simulate(const std::string& config_path, std::optional<uint64_t> seed,
                 std::optional<std::string> out_dir, std::optional<unsigned> threads) {
    ScenarioConfig cfg = ScenarioConfig::from_file(config_path);
    if (seed) {
        cfg.seed = *seed;
        cfg.sim.search.seed = *seed;
    }
    if (threads) cfg.sim.search.threads = *threads;

    ScenarioOutput out;
    if (out_dir) {
        out = run_scenario_to_dir(cfg, *out_dir);
    } else {
        ScenarioRunner runner(std::move(cfg));
        out = runner.run();
    }

    const char* log_env = std::getenv("INTERPOOL_LOG");
    std::string verbosity = log_env ? log_env : "summary";
    if (verbosity == "events") std::cout << out.events_jsonl;
    if (verbosity != "quiet") std::cout << out.summary.dump(2) << "\n";
    return 0;
}

int run_entropy(int64_t n, int locked_digits, int64_t hash_bits) {
    poe::EntropyParams p{n, locked_digits, hash_bits};
    p.validate();
    json out;
    out["omega"] = poe::count_orderings(p).to_decimal();
    out["entropy_bits"] = poe::entropy_bits(p);
    std::cout << out.dump(2) << "\n";
    return 0;
}

MainnetTx tx_from_json(const json& t) {
    uint64_t sender = t.at("sender").get<uint64_t>();
    uint64_t nonce = t.at("nonce").get<uint64_t>();
    Ratio gas_price = detail_scenario::ratio_field(t, "gas_price", Ratio::from_string("0.0001"));
    GasAmount gas_limit = detail_scenario::amount_field<Unit::gas>(t, "gas_limit",
                                                                   GasAmount::from_int(1));
    std::string type = t.contains("type") ? t.at("type").get<std::string>() : "exchange";
    if (type == "liquidity")
        return make_liquidity_tx(sender, nonce, gas_price, gas_limit,
                                 detail_scenario::amount_field<Unit::native>(t, "deposit"));
    if (type != "exchange") throw std::invalid_argument("unknown tx type: " + type);
    std::string dir = t.at("direction").get<std::string>();
    ExchangeDirection direction;
    if (dir == "buy" || dir == "buy_intertoken")
        direction = ExchangeDirection::buy_intertoken;
    else if (dir == "sell" || dir == "sell_intertoken")
        direction = ExchangeDirection::sell_intertoken;
    else
        throw std::invalid_argument("unknown direction: " + dir);
    int128 volume = direction == ExchangeDirection::buy_intertoken
                        ? detail_scenario::amount_field<Unit::native>(t, "volume_in").mantissa()
                        : detail_scenario::amount_field<Unit::intertoken>(t, "volume_in").mantissa();
    return make_exchange_tx(sender, nonce, gas_price, gas_limit, direction, volume,
                            detail_scenario::ratio_field(t, "ratio_min", Ratio{}),
                            detail_scenario::ratio_field(t, "ratio_max", Ratio::from_int(1000000)));
}

PoolState pool_from_json(const json& p) {
    PoolState pool;
    pool.intertoken_inventory = detail_scenario::amount_field<Unit::intertoken>(p, "intertoken");
    pool.native_inventory = detail_scenario::amount_field<Unit::native>(p, "native");
    pool.fee_policy.rate = detail_scenario::ratio_field(p, "fee_rate", pool.fee_policy.rate);
    pool.fee_policy.target_liquidity = detail_scenario::amount_field<Unit::native>(
        p, "target_liquidity", pool.fee_policy.target_liquidity);
    pool.min_volume_threshold = detail_scenario::amount_field<Unit::native>(
        p, "min_volume_threshold", pool.min_volume_threshold);
    return pool;
}

std::string bit_string(const std::vector<int>& bits) {
    std::string s;
    for (int b : bits) s += b ? '1' : '0';
    return s;
}

int run_optimize(const std::string& batch_path, const std::vector<std::string>& targets_hex,
                 std::optional<std::string> booster_hex, int hash_bits, int bits_per_tx,
                 size_t min_batch, uint64_t seed, size_t move_budget, size_t restarts,
                 size_t threads) {
    json batch = load_json(batch_path);
    PoolState pool = pool_from_json(batch.contains("pool") ? batch.at("pool") : json::object());
    std::vector<MainnetTx> mempool;
    for (const auto& t : batch.at("txs")) mempool.push_back(tx_from_json(t));

    poe::PoeParams params;
    params.hash_bits = hash_bits;
    params.bits_per_tx = bits_per_tx;
    params.min_batch = min_batch;
    for (const auto& hex : targets_hex) params.target_hashes.push_back(Hash256::from_hex(hex));
    if (booster_hex) params.booster_pubkey = Hash256::from_hex(*booster_hex);
    poe::SearchOptions search;
    search.seed = seed;
    search.move_budget = move_budget;
    search.restarts = restarts;
    search.threads = threads;

    json out;
    try {
        poe::OptimizedBatch best = poe::optimize_batch(mempool, pool, params, search);
        out["feasible"] = true;
        out["miner_score"] = best.score.miner_score.to_string();
        out["volume_score"] = best.score.volume_score.to_string();
        json order = json::array();
        for (const auto& tx : best.ordered_txs) order.push_back(tx.tx_hash.hex());
        out["order"] = std::move(order);
        json forged = json::array();
        for (const auto& bits : best.forged_hash_bits) forged.push_back(bit_string(bits));
        out["forged_bits"] = std::move(forged);
        out["booster_bits"] = bit_string(best.booster_key_bits);
        std::cout << out.dump(2) << "\n";
        return 0;
    } catch (const poe::infeasible_error& e) {
        out["feasible"] = false;
        out["slot"] = e.slot;
        std::cout << out.dump(2) << "\n";
        return 1;
    }
}

SpvProof proof_from_json(const json& j) {
    SpvProof proof;
    const json& t = j.at("tx");
    proof.tx.from_pubkey = Hash256::from_hex(t.at("from").get<std::string>());
    proof.tx.to_pubkey = Hash256::from_hex(t.at("to").get<std::string>());
    proof.tx.amount = detail_scenario::amount_field<Unit::alien>(t, "amount");
    proof.tx.nonce = t.at("nonce").get<uint64_t>();
    proof.tx.signature = Hash256::from_hex(t.at("signature").get<std::string>());
    proof.leaf_index = j.at("leaf_index").get<size_t>();
    for (const auto& step : j.at("path")) {
        MerkleStep ms;
        ms.sibling = Hash256::from_hex(step.at("sibling").get<std::string>());
        std::string side = step.at("side").get<std::string>();
        if (side == "left")
            ms.side = Side::left;
        else if (side == "right")
            ms.side = Side::right;
        else
            throw std::invalid_argument("merkle step side must be left or right");
        proof.path.push_back(ms);
    }
    proof.block_height = j.at("block_height").get<int64_t>();
    proof.prev_hash = Hash256::from_hex(j.at("prev_hash").get<std::string>());
    proof.merkle_root = Hash256::from_hex(j.at("merkle_root").get<std::string>());
    return proof;
}

int run_verify_proof(const std::string& proof_path, const std::string& forged_hex) {
    SpvProof proof = proof_from_json(load_json(proof_path));
    listrack::SpvCheck check = listrack::verify_spv(proof, Hash256::from_hex(forged_hex));
    json out;
    out["ok"] = check.ok;
    out["failure"] = listrack::spv_failure_name(check.failure);
    std::cout << out.dump(2) << "\n";
    return check.ok ? 0 : 1;
}

// Scripted cross-chain swap, both endings: a proven alien payment releases
// escrow and bond to the buyer; a missed deadline forfeits the bond to the
// seller. The native books must balance before and after.
int run_swap_demo() {
    json trace = json::array();
    auto record = [&trace](const char* step, const listrack::SwapContract& swap,
                           const listrack::MainnetLedger& ledger) {
        json e;
        e["step"] = step;
        e["state"] = listrack::swap_state_name(swap.state());
        e["escrow"] = swap.escrowed().to_string();
        e["buyer_native"] = ledger.balance(swap.terms().buyer_account).to_string();
        e["seller_native"] = ledger.balance(swap.terms().seller_account).to_string();
        trace.push_back(std::move(e));
    };

    KeyRegistry registry;
    KeyPair buyer_alien = keypair_from_seed(101);
    KeyPair seller_alien = keypair_from_seed(202);
    registry.register_key(buyer_alien);
    registry.register_key(seller_alien);
    AlienChain chain(&registry);
    chain.mine_block({});

    listrack::MainnetLedger ledger;
    ledger.credit(1, Native::from_int(100));
    ledger.credit(2, Native::from_int(100));
    const Native baseline = ledger.total();

    bool ok = true;

    // Happy path: buyer 1 buys 12.5 native from seller 2 for 5 alien coins.
    {
        listrack::SwapTerms terms;
        terms.buyer_account = 1;
        terms.seller_account = 2;
        terms.seller_alien_pubkey = seller_alien.pubkey;
        terms.alien_amount = AlienCoin::from_int(5);
        terms.native_amount = Native::from_string("12.5");
        terms.deadline_block = 20;
        listrack::SwapContract swap(terms);
        record("agreed", swap, ledger);
        swap.lock(ledger);
        record("locked", swap, ledger);

        AlienTx payment =
            make_alien_transfer(buyer_alien, seller_alien.pubkey, AlienCoin::from_int(5), 1);
        const AlienBlock& block = chain.mine_block({payment});
        SpvProof proof = make_spv_proof(block, 0);
        // The settlement layer holds the honestly forged header for that
        // height; here that is the block's true header hash.
        listrack::SettleResult res =
            swap.settle(proof, block.header_hash, ledger, terms.deadline_block);
        record(listrack::settle_result_name(res), swap, ledger);
        ok = ok && res == listrack::SettleResult::completed &&
             swap.state() == listrack::SwapState::completed &&
             ledger.balance(1) == Native::from_string("112.5");
    }

    // Slash path: buyer 3 never pays; past the deadline the bond forfeits.
    {
        ledger.credit(3, Native::from_int(50));
        listrack::SwapTerms terms;
        terms.buyer_account = 3;
        terms.seller_account = 2;
        terms.seller_alien_pubkey = seller_alien.pubkey;
        terms.alien_amount = AlienCoin::from_int(4);
        terms.native_amount = Native::from_int(10);
        terms.deadline_block = 30;
        listrack::SwapContract swap(terms);
        record("agreed", swap, ledger);
        swap.lock(ledger);
        record("locked", swap, ledger);
        Native seller_before = ledger.balance(2);
        bool expired = swap.expire(ledger, terms.deadline_block + 1);
        record("expired", swap, ledger);
        ok = ok && expired && swap.state() == listrack::SwapState::failed &&
             ledger.balance(2) == seller_before + Native::from_int(20);
    }

    ok = ok && ledger.total() == baseline + Native::from_int(50);
    json out;
    out["trace"] = std::move(trace);
    out["ok"] = ok;
    std::cout << out.dump(2) << "\n";
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-chain pool simulator: scenarios, batch forging, SPV checks"};
    app.require_subcommand(1);

    auto* sim = app.add_subcommand("simulate", "Run a scenario config");
    std::string config_path;
    std::optional<uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<unsigned> threads;
    sim->add_option("--config", config_path, "Scenario config JSON")->required();
    sim->add_option("--seed", seed, "Override the config seed");
    sim->add_option("--out", out_dir, "Directory for events.jsonl, report.csv, summary.json");
    sim->add_option("--threads", threads, "Optimizer worker threads");

    auto* ent = app.add_subcommand("entropy", "Ordering freedom of a constrained batch");
    int64_t n = 0;
    int locked_digits = 0;
    int64_t hash_bits_e = 0;
    ent->add_option("--n", n, "Batch size")->required();
    ent->add_option("--locked-digits", locked_digits, "Bits locked per transaction");
    ent->add_option("--hash-bits", hash_bits_e, "Forged hash bits");

    auto* opt = app.add_subcommand("optimize", "Order one batch against target hashes");
    std::string batch_path;
    std::vector<std::string> targets_hex;
    std::optional<std::string> booster_hex;
    int hash_bits_o = 256;
    int bits_per_tx = 1;
    size_t min_batch = 0;
    uint64_t opt_seed = 1;
    size_t move_budget = 2000;
    size_t restarts = 2;
    size_t opt_threads = 1;
    opt->add_option("--batch", batch_path, "Batch JSON: {pool, txs}")->required();
    opt->add_option("--target", targets_hex, "Target hash (hex); repeat for extra lanes")
        ->required();
    opt->add_option("--booster", booster_hex, "Booster public key (hex)");
    opt->add_option("--hash-bits", hash_bits_o, "Bits forged per target");
    opt->add_option("--bits-per-tx", bits_per_tx, "Bits carried per transaction");
    opt->add_option("--min-batch", min_batch, "Minimum mempool size");
    opt->add_option("--seed", opt_seed, "Search seed");
    opt->add_option("--move-budget", move_budget, "Local search moves per restart");
    opt->add_option("--restarts", restarts, "Search restarts");
    opt->add_option("--threads", opt_threads, "Search threads");

    auto* ver = app.add_subcommand("verify-proof", "Check an SPV proof against a forged header");
    std::string proof_path;
    std::string forged_hex;
    ver->add_option("--proof", proof_path, "Proof JSON")->required();
    ver->add_option("--forged", forged_hex, "Forged header hash (hex)")->required();

    auto* demo = app.add_subcommand("swap-demo", "Scripted swap: settle path and slash path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return run_simulate(config_path, seed, out_dir, threads);
        if (ent->parsed()) return run_entropy(n, locked_digits, hash_bits_e);
        if (opt->parsed())
            return run_optimize(batch_path, targets_hex, booster_hex, hash_bits_o, bits_per_tx,
                                min_batch, opt_seed, move_budget, restarts, opt_threads);
        if (ver->parsed()) return run_verify_proof(proof_path, forged_hex);
        if (demo->parsed()) return run_swap_demo();
    } catch (const std::exception& e) {
        std::cerr << "interpool: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
