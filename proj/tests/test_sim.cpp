// End-to-end pipeline tests: wallets, pool, buffer, risk book, burn
// coordinator and the alien chain wired together by Simulation. Amount
// oracles are worked by hand from the fixed-point definitions.

#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <vector>

#include "interpool/sim.hpp"

using namespace interpool;
using namespace interpool::poe;

namespace {

Ratio R(const char* s) { return Ratio::from_string(s); }
Native N(const char* s) { return Native::from_string(s); }
Intertoken I(const char* s) { return Intertoken::from_string(s); }

MainnetTx buy(uint64_t sender, uint64_t nonce, const char* vol, const char* lo = "0",
              const char* hi = "1000") {
    return make_exchange_tx(sender, nonce, R("0.001"), GasAmount::from_int(1),
                            ExchangeDirection::buy_intertoken, Native::from_string(vol).mantissa(),
                            R(lo), R(hi));
}

MainnetTx sell(uint64_t sender, uint64_t nonce, const char* vol, const char* lo = "0",
               const char* hi = "1000") {
    return make_exchange_tx(sender, nonce, R("0.001"), GasAmount::from_int(1),
                            ExchangeDirection::sell_intertoken,
                            Intertoken::from_string(vol).mantissa(), R(lo), R(hi));
}

SimParams plain_params() {
    SimParams p;
    p.poe_enabled = false;
    p.bootstrap_ratio = R("2.5");
    p.fee_policy.rate = R("0.01");
    return p;
}

}  // namespace

TEST_CASE("batch execution moves coin between wallets, pool, buffer and booster") {
    Simulation sim(plain_params());
    sim.credit_native(1, N("100"));
    sim.credit_native(2, N("100"));

    // Block 1: provider 1 joins through a liquidity transaction. Half the
    // deposit is the native pool leg, matched by 5 / 2.5 = 2 freshly minted
    // intertokens at the bootstrap price.
    auto r1 = sim.produce_block({make_liquidity_tx(1, 1, R("0.001"), GasAmount::from_int(1),
                                                   N("10"))});
    REQUIRE(r1.executed == 1);
    CHECK(sim.pool().intertoken_inventory == I("2"));
    CHECK(sim.pool().native_inventory == N("5"));
    CHECK(sim.wallet(1).native == N("89.999"));
    CHECK(sim.wallet(sim.params().miner_account).native == N("0.001"));
    REQUIRE(sim.risk_book().find(1) != nullptr);
    CHECK(sim.risk_book().find(1)->collateral == N("5"));
    CHECK(sim.log().count("provider_joined") == 1);
    CHECK(sim.log().count("header_recorded") == 1);
    REQUIRE(r1.end_ratio);
    CHECK(*r1.end_ratio == R("2.5"));

    // Block 2: a one-native buy. The buffer starts on intertoken fees, so
    // 1% of the outbound fill is skimmed: fill 0.333333333333, fee
    // 0.003333333333, trader receives exactly 0.33.
    auto r2 = sim.produce_block({buy(2, 1, "1")});
    REQUIRE(r2.executed == 1);
    CHECK(sim.wallet(2).intertoken == I("0.33"));
    CHECK(sim.wallet(2).native == N("98.999"));
    CHECK(sim.pool().native_inventory == N("6"));
    CHECK(sim.pool().intertoken_inventory == I("1.666666666667"));
    // The booster is owed 0.1% of executed volume; block 1's join already
    // accrued 10 * 0.001 / 2.5 = 0.004 intertokens of debt, so this whole
    // fee routes to the booster before anything reaches the stack.
    CHECK(sim.buffer().intertoken_stack() == I("0"));
    CHECK(sim.wallet(sim.params().booster_account).intertoken == I("0.003333333333"));
    CHECK(sim.buffer().booster_owed() == I("0.000944444444"));
    CHECK(sim.log().count("booster_paid") == 1);

    // Block 3: a sell plus two skips. Selling is fee-inbound, so the trader
    // pays 1/(1-0.01) - 1 extra intertokens on top of the curve input.
    auto r3 = sim.produce_block({
        sell(2, 2, "0.25"),
        buy(2, 3, "1", "5", "10"),  // ratio window misses (~3.6 pre-trade)
        buy(3, 1, "1"),             // account 3 has no funds
    });
    CHECK(r3.executed == 1);
    REQUIRE(r3.skipped.size() == 2);
    CHECK(sim.wallet(2).intertoken == I("0.33") - I("0.252525252525"));
    // All intertoken fees so far: 0.003333333333 + 0.002525252525; with no
    // burn debt they sit either in the stack or with the booster.
    CHECK(sim.buffer().intertoken_stack() +
              sim.wallet(sim.params().booster_account).intertoken ==
          I("0.005858585858"));
    // Nonces are consumed by skipped transactions too.
    CHECK(sim.next_nonce(2) == 4);
    CHECK(sim.next_nonce(3) == 2);
    CHECK(sim.wallet(sim.params().miner_account).native == N("0.003"));

    CHECK(sim.chain().tip_height() == 6);  // premine 3 + one per block
    sim.audit();
}

TEST_CASE("burn claim settles through the alien chain and a default slashes") {
    Simulation sim(plain_params());
    sim.credit_native(1, N("100"));
    KeyPair provider_key = keypair_from_seed(11);
    KeyPair claimant_key = keypair_from_seed(22);
    sim.register_alien_identity(provider_key);
    sim.credit_intertoken(2, I("5"));

    sim.join_provider(1, ProviderKind::regular, N("10"));
    sim.register_provider_alien_key(1, provider_key.pubkey);
    sim.produce_block({});  // block 1: join + key
    sim.produce_block({});  // block 2

    sim.submit_claim(2, claimant_key.pubkey, I("1"));
    sim.produce_block({});  // block 3: claim opened and assigned
    {
        auto assigned = sim.log().of_kind("claim_assigned");
        REQUIRE(assigned.size() == 1);
        CHECK(assigned[0]->block == 3);
        CHECK(assigned[0]->fields.at("provider") == 1);
        CHECK(assigned[0]->fields.at("deadline") == 9);
    }
    CHECK(sim.escrow() == I("1"));
    CHECK(sim.wallet(2).intertoken == I("4"));
    CHECK(sim.risk_book().find(1)->status == ProviderStatus::burn_pending);

    // The provider pays on the alien chain during block 4; the transfer
    // lands at height 7, whose header is committed at the end of block 7.
    // Half the minted obligation is served, so half the collateral frees.
    sim.submit_alien_tx(make_alien_transfer(provider_key, claimant_key.pubkey,
                                            AlienCoin::from_int(1), 1));
    for (int b = 4; b <= 7; ++b) sim.produce_block({});
    REQUIRE(sim.chain().block_at(7).txs.size() == 1);
    sim.submit_burn_proof(1, make_spv_proof(sim.chain().block_at(7), 0));
    sim.produce_block({});  // block 8: proof settles

    {
        auto settled = sim.log().of_kind("burn_settled");
        REQUIRE(settled.size() == 1);
        CHECK(settled[0]->block == 8);
        CHECK(settled[0]->fields.at("collateral_released") == "2.5");
    }
    CHECK(sim.escrow() == I("0"));
    CHECK(sim.wallet(1).native == N("92.5"));
    CHECK(sim.risk_book().find(1)->collateral == N("2.5"));
    CHECK(sim.risk_book().find(1)->status == ProviderStatus::active);
    CHECK(sim.pool().supply.burned_total == I("1"));

    // A second claim the provider ignores: assigned at block 9 with deadline
    // 15, expired at 16. The claimant is paid 0.5 intertokens at price 2.5
    // in native coin, all of it from collateral.
    sim.submit_claim(2, claimant_key.pubkey, I("0.5"));
    for (int b = 9; b <= 16; ++b) sim.produce_block({});
    {
        auto defaulted = sim.log().of_kind("claim_defaulted");
        REQUIRE(defaulted.size() == 1);
        CHECK(defaulted[0]->block == 16);
        CHECK(defaulted[0]->fields.at("claimant_paid") == "1.25");
        CHECK(defaulted[0]->fields.at("slashed") == "1.25");
        CHECK(defaulted[0]->fields.at("shortfall") == "0");
    }
    CHECK(sim.wallet(2).native == N("1.25"));
    CHECK(sim.risk_book().find(1)->collateral == N("1.25"));
    CHECK(sim.pool().supply.burned_total == I("1.5"));
    CHECK(sim.escrow() == I("0"));
    sim.audit();
}

namespace {

// Builds one transaction per forging slot whose hash class matches the slot,
// salting the trade volume until the class comes out right.
MainnetTx salted_tx(uint64_t sender, uint64_t nonce, uint32_t want, const PoeParams& poe) {
    for (int128 salt = 0;; ++salt) {
        MainnetTx tx = make_exchange_tx(sender, nonce, R("0.001"), GasAmount::from_int(1),
                                        ExchangeDirection::buy_intertoken,
                                        N("0.01").mantissa() + salt, R("0"), R("1000"));
        if (detail_poe::tx_bit_class(tx.tx_hash, poe) == want) return tx;
    }
}

std::vector<MainnetTx> forge_workload(const Simulation& sim, const PoeParams& poe) {
    std::vector<MainnetTx> txs;
    const int prefix = poe.prefix_length();
    for (int i = 0; i < prefix; ++i) {
        uint64_t sender = 101 + uint64_t(i);
        txs.push_back(salted_tx(sender, sim.next_nonce(sender),
                                detail_poe::slot_bit_class(size_t(i), poe), poe));
    }
    return txs;
}

}  // namespace

TEST_CASE("forged commitments, a corrupted record, the alarm and the catch-up") {
    SimParams p;
    p.poe_enabled = true;
    p.hash_bits = 4;
    p.bits_per_tx = 1;
    p.min_batch = 0;
    p.bootstrap_ratio = R("2.5");
    Simulation sim(p);
    sim.credit_native(1, N("100"));
    for (uint64_t s = 101; s <= 104; ++s) sim.credit_native(s, N("1000"));
    KeyPair provider_key = keypair_from_seed(11);
    KeyPair claimant_key = keypair_from_seed(22);
    sim.register_alien_identity(provider_key);
    sim.credit_intertoken(2, I("5"));

    sim.join_provider(1, ProviderKind::regular, N("10"));
    sim.register_provider_alien_key(1, provider_key.pubkey);

    auto r1 = sim.produce_block(forge_workload(sim, sim.next_poe_params()));
    REQUIRE_FALSE(r1.forge_failed);
    CHECK(sim.forged_headers().at(1) == sim.chain().block_at(1).header_hash);

    sim.submit_claim(2, claimant_key.pubkey, I("0.5"));
    sim.produce_block(forge_workload(sim, sim.next_poe_params()));  // block 2: assigned
    REQUIRE(sim.log().count("claim_assigned") == 1);

    // Payment during block 3 lands at alien height 6; height 6's record is
    // the one corrupted below.
    sim.submit_alien_tx(make_alien_transfer(provider_key, claimant_key.pubkey,
                                            AlienCoin::from_string("0.5"), 1));
    sim.corrupt_forge(6);
    for (uint64_t b = 3; b <= 6; ++b) {
        auto r = sim.produce_block(forge_workload(sim, sim.next_poe_params()));
        REQUIRE_FALSE(r.forge_failed);
    }
    CHECK(sim.forged_headers().at(5) == sim.chain().block_at(5).header_hash);
    CHECK(sim.forged_headers().at(6) != sim.chain().block_at(6).header_hash);

    // The honest proof now disagrees with the corrupted record: one alarm,
    // and the block-7 batch re-forges height 6 alongside height 7.
    SpvProof proof = make_spv_proof(sim.chain().block_at(6), 0);
    sim.submit_burn_proof(1, proof);
    PoeParams catch_up;
    catch_up.hash_bits = p.hash_bits;
    catch_up.bits_per_tx = p.bits_per_tx * 2;
    catch_up.target_hashes = {sim.chain().block_at(6).header_hash,
                              sim.chain().block_at(7).header_hash};
    catch_up.booster_pubkey = sim.booster_pubkey();
    catch_up.min_batch = 0;
    auto r7 = sim.produce_block(forge_workload(sim, catch_up));
    REQUIRE_FALSE(r7.forge_failed);
    CHECK(sim.log().count("forgery_alarm") == 1);
    CHECK(sim.log().count("burn_settled") == 0);
    CHECK(sim.forged_headers().at(6) == sim.chain().block_at(6).header_hash);
    CHECK(sim.forged_headers().at(7) == sim.chain().block_at(7).header_hash);
    CHECK_FALSE(sim.repair_height());
    REQUIRE(r7.forged_heights == std::vector<int64_t>{6, 7});

    // The same proof settles once the record is repaired.
    sim.submit_burn_proof(1, proof);
    sim.produce_block(forge_workload(sim, sim.next_poe_params()));  // block 8
    CHECK(sim.log().count("burn_settled") == 1);
    CHECK(sim.log().count("forgery_alarm") == 1);
    auto settled = sim.log().of_kind("burn_settled");
    CHECK(settled[0]->block == 8);
    CHECK(settled[0]->fields.at("collateral_released") == "1.25");
    sim.audit();
}

TEST_CASE("invariants hold through a randomized mix of operations") {
    Simulation sim(plain_params());
    std::vector<KeyPair> keys;
    for (uint64_t id = 1; id <= 3; ++id) {
        keys.push_back(keypair_from_seed(100 + id));
        sim.register_alien_identity(keys.back());
        sim.credit_native(id, N("100"));
        sim.join_provider(id, id == 3 ? ProviderKind::full : ProviderKind::regular,
                          Native::from_int(int64_t(10 * id)));
        sim.register_provider_alien_key(id, keys.back().pubkey);
    }
    KeyPair claimant_key = keypair_from_seed(55);
    for (uint64_t t = 4; t <= 6; ++t) {
        sim.credit_native(t, N("500"));
        sim.credit_intertoken(t, I("20"));
    }

    uint64_t rng = 0x5eedf00dULL;
    auto next = [&rng]() {
        rng += 0x9e3779b97f4a7c15ULL;
        uint64_t z = rng;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };

    for (uint64_t b = 1; b <= 40; ++b) {
        std::vector<MainnetTx> txs;
        for (int k = 0; k < 2; ++k) {
            uint64_t trader = 4 + next() % 3;
            int128 vol = int128(next() % 2'000'000'000'000ULL) + 100'000'000'000LL;
            bool tight = next() % 4 == 0;
            const char* lo = tight ? "2.4" : "0";
            const char* hi = tight ? "2.6" : "1000";
            if (next() % 2 == 0)
                txs.push_back(make_exchange_tx(trader, sim.next_nonce(trader), R("0.001"),
                                               GasAmount::from_int(1),
                                               ExchangeDirection::buy_intertoken, vol, R(lo),
                                               R(hi)));
            else
                txs.push_back(make_exchange_tx(trader, sim.next_nonce(trader), R("0.001"),
                                               GasAmount::from_int(1),
                                               ExchangeDirection::sell_intertoken, vol, R(lo),
                                               R(hi)));
        }
        if (b % 5 == 0) {
            uint64_t claimant = 4 + next() % 3;
            Intertoken amount = Intertoken::from_mantissa(int128(next() % 400'000'000'000ULL) +
                                                          100'000'000'000LL);
            if (sim.wallet(claimant).intertoken >= amount)
                sim.submit_claim(claimant, claimant_key.pubkey, amount);
        }
        if (b % 7 == 0) sim.inject_collateral(1 + next() % 3, N("0.5"));
        if (b == 30) sim.request_exit(3);
        sim.produce_block(std::move(txs));  // audits internally
    }

    // Escrow backs exactly the claims still pending resolution.
    Intertoken pending;
    for (const auto& [id, claim] : sim.burn().claims())
        if (claim.state == ClaimState::open || claim.state == ClaimState::assigned)
            pending += claim.amount;
    CHECK(sim.escrow() == pending);
    CHECK(sim.pool().supply.burned_total <= sim.pool().supply.minted_total);
    CHECK(sim.log().count("claim_defaulted") > 0);
    sim.audit();
}
