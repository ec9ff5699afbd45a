#pragma once

// Whole-deployment simulation: one native-chain pool with its risk book,
// liquidity buffer and burn coordinator, one alien chain advancing in
// lockstep, per-account wallets, and a structured event log.
//
// Each produced block runs a fixed pipeline:
//   1. settle   — key updates, provider joins, collateral injections, claim
//                 intake + assignment, burn-proof settlement, voluntary exits
//   2. expire   — overdue burn assignments time out and slash
//   3. risk     — the collateral pass flags, clears or liquidates positions
//   4. buffer   — volatility tracking, deployments, fee-method switch,
//                 epoch payouts
//   5. batch    — the transaction batch is ordered (forging the committed
//                 alien header bits into the hash prefix when enabled) and
//                 executed against the pool and wallets
// and ends by recording the alien header commitment, paying the booster,
// and mining the next alien block. The commitment recorded at the end of
// block B is therefore visible to proofs from block B+1 onward.
//
// Conservation is checked after every block: native coin moves only between
// wallets, pool, buffer stack and collateral; intertokens obey
//   minted - burned + burn_debt =
//       pool + wallets + claim escrow + buffer stack.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "interpool/amm.hpp"
#include "interpool/amount.hpp"
#include "interpool/buffer.hpp"
#include "interpool/burncycle.hpp"
#include "interpool/chain.hpp"
#include "interpool/events.hpp"
#include "interpool/hash.hpp"
#include "interpool/keys.hpp"
#include "interpool/poe.hpp"
#include "interpool/risk.hpp"
#include "interpool/tx.hpp"

namespace interpool {

using poe::OptimizedBatch;
using poe::PoeParams;
using poe::Score;
using poe::SearchOptions;
using poe::dedupe_mempool;
using poe::gas_descending;
using poe::infeasible_error;
using poe::optimize_batch;

struct SimParams {
    // Forging. When disabled the batch is plain gas ordering and the header
    // commitment is recorded directly.
    bool poe_enabled = true;
    int hash_bits = 32;
    int bits_per_tx = 1;
    size_t min_batch = 0;
    bool booster_enabled = true;
    uint64_t booster_key_seed = 0xb0057e12u;
    SearchOptions search{};

    // Pool economics.
    FeePolicy fee_policy{};
    Native min_volume_threshold{};
    std::optional<Ratio> bootstrap_ratio;
    RiskParams risk{};
    BufferParams buffer{};
    BurncycleParams burncycle{};

    // Chain timing: the alien chain is pre-mined to `premine_height` and
    // gains one block per mainnet block; the height committed at the end of
    // mainnet block B is premine_height + B - 1 - finality_depth.
    int64_t finality_depth = 2;
    int64_t premine_height = 3;

    uint64_t miner_account = 900;
    uint64_t booster_account = 901;
    bool audit_every_block = true;

    void validate() const {
        if (finality_depth < 0) throw std::invalid_argument("finality_depth must be >= 0");
        if (premine_height < finality_depth)
            throw std::invalid_argument("premine must reach the finality depth");
        if (hash_bits < 0 || bits_per_tx < 1)
            throw std::invalid_argument("bad forging parameters");
    }
};

struct Wallet {
    Native native;
    Intertoken intertoken;
};

struct SkippedTx {
    uint64_t sender = 0;
    uint64_t nonce = 0;
    std::string reason;
};

struct BlockReport {
    uint64_t block = 0;
    size_t submitted = 0;
    size_t executed = 0;
    std::vector<SkippedTx> skipped;
    Score score;                        // realized miner gas and volume
    std::vector<int64_t> forged_heights;
    std::vector<std::vector<int>> forged_bits;  // per lane, when forging ran
    std::vector<int> booster_bits;
    std::vector<MainnetTx> ordered_batch;  // executed sequence, forging order when forged
    bool forge_failed = false;
    std::optional<Ratio> end_ratio;
};

class Simulation {
  public:
    explicit Simulation(SimParams params = {})
        : params_(params),
          chain_(&registry_),
          alien_params_{params.finality_depth, 1},
          buffer_(params.buffer),
          risk_(params.risk),
          burn_(params.burncycle),
          booster_key_(keypair_from_seed(params.booster_key_seed)) {
        params_.validate();
        pool_.fee_policy = params_.fee_policy;
        pool_.min_volume_threshold = params_.min_volume_threshold;
        pool_.bootstrap_ratio = params_.bootstrap_ratio;
        registry_.register_key(booster_key_);
        for (int64_t h = 0; h <= params_.premine_height; ++h) chain_.mine_block({});
    }

    // ---- driver surface (call between blocks) ----

    // Faucets. Credited native raises the conservation baseline; credited
    // intertokens count as pre-minted supply.
    void credit_native(uint64_t account, Native amount) {
        wallets_[account].native += amount;
        native_baseline_ += amount;
    }
    void credit_intertoken(uint64_t account, Intertoken amount) {
        wallets_[account].intertoken += amount;
        pool_.supply.minted_total += amount;
    }

    const Wallet& wallet(uint64_t account) const {
        static const Wallet empty{};
        auto it = wallets_.find(account);
        return it == wallets_.end() ? empty : it->second;
    }

    uint64_t next_nonce(uint64_t account) const {
        auto it = last_nonce_.find(account);
        return (it == last_nonce_.end() ? 0 : it->second) + 1;
    }

    // Queued inputs, all processed in the next block's settle step.
    void join_provider(uint64_t id, ProviderKind kind, Native deposit) {
        join_inbox_.push_back({id, kind, deposit});
    }
    void register_provider_alien_key(uint64_t provider, const Hash256& key) {
        key_inbox_.push_back({provider, key});
    }
    void inject_collateral(uint64_t provider, Native amount) {
        injection_inbox_.push_back({provider, amount});
    }
    void submit_claim(uint64_t claimant, const Hash256& claimant_alien_key, Intertoken amount) {
        claim_inbox_.push_back({claimant, claimant_alien_key, amount});
    }
    void submit_burn_proof(uint64_t claim_id, const SpvProof& proof) {
        proof_inbox_.push_back({claim_id, proof});
    }
    void request_exit(uint64_t provider) { exit_inbox_.push_back(provider); }

    // Alien-side transfer, mined into the alien block appended at the end of
    // the current mainnet block.
    void submit_alien_tx(const AlienTx& tx) { alien_inbox_.push_back(tx); }

    // Make an alien keypair known to the signature scheme both chains share.
    void register_alien_identity(const KeyPair& kp) { registry_.register_key(kp); }

    // Mark a future block whose end-of-block header commitment is recorded
    // with a flipped bit, for exercising the forgery alarm path.
    void corrupt_forge(uint64_t block) { corrupt_blocks_.insert(block); }

    BlockReport produce_block(std::vector<MainnetTx> mempool) {
        ++block_;
        BlockReport report;
        report.block = block_;
        report.submitted = mempool.size();

        step_settle();
        step_expire();
        step_risk();
        step_buffer();
        step_batch(std::move(mempool), report);
        mine_alien();

        if (pool_.has_liquidity()) report.end_ratio = pool_ratio(pool_);
        json f;
        f["executed"] = report.executed;
        f["skipped"] = report.skipped.size();
        f["miner_score"] = jstr(report.score.miner_score);
        f["volume_score"] = jstr(report.score.volume_score);
        if (report.end_ratio) f["ratio"] = jstr(*report.end_ratio);
        f["fee_method"] = fee_method_label(buffer_.fee_method());
        log_.emit(block_, "block", std::move(f));

        if (params_.audit_every_block) audit();
        return report;
    }

    // ---- inspection ----

    const SimParams& params() const { return params_; }
    uint64_t current_block() const { return block_; }
    const PoolState& pool() const { return pool_; }
    const LiquidityBuffer& buffer() const { return buffer_; }
    const RiskManager& risk_book() const { return risk_; }
    const BurnCoordinator& burn() const { return burn_; }
    const AlienChain& chain() const { return chain_; }
    const KeyRegistry& registry() const { return registry_; }
    const EventLog& log() const { return log_; }
    const std::map<int64_t, Hash256>& forged_headers() const { return forged_headers_; }
    Intertoken escrow() const { return escrow_; }
    const Hash256& booster_pubkey() const { return booster_key_.pubkey; }

    std::vector<PositionValuation> valuations() const { return risk_.value_all(pool_); }

    // Alien height whose header is committed at the end of the given block.
    int64_t commit_height_of(uint64_t block) const {
        return params_.premine_height + int64_t(block) - 1 - params_.finality_depth;
    }

    // The forging parameters the next produced block will use; lets a driver
    // build a workload whose hash classes can fill every locked slot.
    PoeParams next_poe_params() const { return forge_plan(block_ + 1).first; }
    std::optional<int64_t> repair_height() const { return repair_height_; }

    // Sanity check, also run automatically after every block.
    void audit() const {
        int128 wallet_native = 0, wallet_inter = 0;
        for (const auto& [id, w] : wallets_) {
            wallet_native += w.native.mantissa();
            wallet_inter += w.intertoken.mantissa();
        }
        int128 native_total = wallet_native + pool_.native_inventory.mantissa() +
                              buffer_.native_stack().mantissa() +
                              risk_.collateral_total().mantissa();
        if (native_total != native_baseline_.mantissa())
            throw std::logic_error("native conservation violated at block " +
                                   std::to_string(block_));
        int128 lhs = pool_.supply.minted_total.mantissa() -
                     pool_.supply.burned_total.mantissa() + buffer_.burn_debt().mantissa();
        int128 rhs = pool_.intertoken_inventory.mantissa() + wallet_inter + escrow_.mantissa() +
                     buffer_.intertoken_stack().mantissa();
        if (lhs != rhs)
            throw std::logic_error("intertoken supply identity violated at block " +
                                   std::to_string(block_));
    }

  private:
    struct PendingJoin {
        uint64_t id;
        ProviderKind kind;
        Native deposit;
    };
    struct PendingKey {
        uint64_t provider;
        Hash256 key;
    };
    struct PendingInjection {
        uint64_t provider;
        Native amount;
    };
    struct PendingClaim {
        uint64_t claimant;
        Hash256 alien_key;
        Intertoken amount;
    };
    struct PendingProof {
        uint64_t claim_id;
        SpvProof proof;
    };

    static const char* fee_method_label(FeeMethod m) {
        return m == FeeMethod::native ? "native" : "intertoken";
    }

    // Target heights and parameters for the batch forged in `block`: the
    // pending repair height rides in lane 0 ahead of the current commitment,
    // with the per-transaction bit budget doubled to carry both lanes.
    std::pair<PoeParams, std::vector<int64_t>> forge_plan(uint64_t block) const {
        PoeParams poe;
        poe.hash_bits = params_.hash_bits;
        poe.bits_per_tx = params_.bits_per_tx;
        poe.min_batch = params_.min_batch;
        if (params_.booster_enabled) poe.booster_pubkey = booster_key_.pubkey;
        const int64_t now_h = commit_height_of(block);
        std::vector<int64_t> heights;
        if (repair_height_ && *repair_height_ < now_h) {
            heights = {*repair_height_, now_h};
            poe.bits_per_tx = params_.bits_per_tx * 2;
        } else {
            heights = {now_h};
        }
        for (int64_t h : heights) poe.target_hashes.push_back(chain_.block_at(h).header_hash);
        return {poe, heights};
    }

    uint64_t last_nonce(uint64_t sender) const {
        auto it = last_nonce_.find(sender);
        return it == last_nonce_.end() ? 0 : it->second;
    }

    void log_burn_event(const BurnEvent& e) {
        json f;
        const char* kind = nullptr;
        switch (e.kind) {
            case BurnEvent::Kind::claim_opened:
                kind = "claim_opened";
                f["claim_id"] = e.claim_id;
                f["claimant"] = e.claimant;
                f["amount"] = jstr(e.amount);
                break;
            case BurnEvent::Kind::claim_assigned:
                kind = "claim_assigned";
                f["claim_id"] = e.claim_id;
                f["provider"] = e.provider_id;
                f["deadline"] = e.deadline;
                break;
            case BurnEvent::Kind::claim_escalated:
                kind = "claim_escalated";
                f["claim_id"] = e.claim_id;
                break;
            case BurnEvent::Kind::burn_settled:
                kind = "burn_settled";
                f["claim_id"] = e.claim_id;
                f["provider"] = e.provider_id;
                f["claimant"] = e.claimant;
                f["amount"] = jstr(e.amount);
                f["collateral_released"] = jstr(e.collateral_released);
                break;
            case BurnEvent::Kind::proof_rejected:
                kind = "proof_rejected";
                f["claim_id"] = e.claim_id;
                f["provider"] = e.provider_id;
                f["reason"] = e.reason;
                break;
            case BurnEvent::Kind::forgery_alarm:
                kind = "forgery_alarm";
                f["claim_id"] = e.claim_id;
                f["provider"] = e.provider_id;
                break;
            case BurnEvent::Kind::claim_defaulted:
                kind = "claim_defaulted";
                f["claim_id"] = e.claim_id;
                f["provider"] = e.provider_id;
                f["claimant"] = e.claimant;
                f["amount"] = jstr(e.amount);
                f["claimant_paid"] = jstr(e.claimant_paid);
                f["slashed"] = jstr(e.slashed);
                f["buffer_draw"] = jstr(e.buffer_draw);
                f["shortfall"] = jstr(e.shortfall);
                break;
            case BurnEvent::Kind::key_updated:
                kind = "key_updated";
                f["provider"] = e.provider_id;
                break;
            case BurnEvent::Kind::key_update_late:
                kind = "key_update_late";
                f["provider"] = e.provider_id;
                f["claim_id"] = e.claim_id;
                break;
        }
        log_.emit(block_, kind, std::move(f));
    }

    void log_risk_event(const RiskEvent& e) {
        json f;
        const char* kind = nullptr;
        switch (e.kind) {
            case RiskEvent::Kind::flagged:
                kind = "provider_flagged";
                f["provider"] = e.provider_id;
                f["injection_request"] = jstr(e.injection_request);
                if (e.deadline) f["deadline"] = *e.deadline;
                break;
            case RiskEvent::Kind::flag_cleared:
                kind = "flag_cleared";
                f["provider"] = e.provider_id;
                break;
            case RiskEvent::Kind::injected:
                kind = "collateral_injected";
                f["provider"] = e.provider_id;
                break;
            case RiskEvent::Kind::liquidated:
                kind = "provider_liquidated";
                f["provider"] = e.provider_id;
                f["reason"] = e.reason;
                f["refund"] = jstr(e.refund);
                f["forfeit"] = jstr(e.forfeit);
                f["own_burned"] = jstr(e.own_burned);
                f["risky_burned"] = jstr(e.risky_burned);
                break;
        }
        log_.emit(block_, kind, std::move(f));
    }

    void step_settle() {
        for (const auto& pk : key_inbox_) log_burn_event(burn_.register_alien_key(pk.provider, pk.key, block_));
        key_inbox_.clear();

        for (const auto& j : join_inbox_) {
            const ProviderPosition* pos = risk_.find(j.id);
            if (pos && pos->open()) {
                log_.emit(block_, "join_rejected",
                          {{"provider", j.id}, {"reason", "already_provider"}});
                continue;
            }
            if (wallets_[j.id].native < j.deposit) {
                log_.emit(block_, "join_rejected",
                          {{"provider", j.id}, {"reason", "insufficient_funds"}});
                continue;
            }
            try {
                JoinOutcome out = risk_.join(j.id, j.kind, j.deposit, pool_, block_);
                wallets_[j.id].native -= j.deposit;
                log_.emit(block_, "provider_joined",
                          {{"provider", j.id},
                           {"provider_kind", provider_kind_name(j.kind)},
                           {"deposit", jstr(j.deposit)},
                           {"minted", jstr(out.minted)},
                           {"coins", jstr(out.coins)}});
            } catch (const std::exception& ex) {
                log_.emit(block_, "join_rejected", {{"provider", j.id}, {"reason", ex.what()}});
            }
        }
        join_inbox_.clear();

        for (const auto& inj : injection_inbox_) {
            if (wallets_[inj.provider].native < inj.amount) {
                log_.emit(block_, "injection_rejected",
                          {{"provider", inj.provider}, {"reason", "insufficient_funds"}});
                continue;
            }
            try {
                RiskEvent e = risk_.inject(inj.provider, inj.amount, pool_, block_);
                wallets_[inj.provider].native -= inj.amount;
                json f;
                f["provider"] = inj.provider;
                f["amount"] = jstr(inj.amount);
                log_.emit(block_, "collateral_injected", std::move(f));
                (void)e;
            } catch (const std::exception& ex) {
                log_.emit(block_, "injection_rejected",
                          {{"provider", inj.provider}, {"reason", ex.what()}});
            }
        }
        injection_inbox_.clear();

        for (const auto& c : claim_inbox_) {
            if (wallets_[c.claimant].intertoken < c.amount) {
                log_.emit(block_, "claim_rejected",
                          {{"claimant", c.claimant}, {"reason", "insufficient_funds"}});
                continue;
            }
            wallets_[c.claimant].intertoken -= c.amount;
            escrow_ += c.amount;
            log_burn_event(burn_.submit_claim(c.claimant, c.alien_key, c.amount, block_));
        }
        claim_inbox_.clear();
        for (const auto& e : burn_.assign_open_claims(risk_, block_)) log_burn_event(e);

        for (const auto& p : proof_inbox_) {
            auto events = burn_.settle_burn_proof(p.claim_id, p.proof, forged_headers_,
                                                  registry_, risk_, pool_.supply, block_);
            for (const auto& e : events) {
                log_burn_event(e);
                if (e.kind == BurnEvent::Kind::burn_settled) {
                    escrow_ -= e.amount;
                    wallets_[e.provider_id].native += e.collateral_released;
                } else if (e.kind == BurnEvent::Kind::forgery_alarm) {
                    if (!repair_height_) repair_height_ = p.proof.block_height;
                }
            }
        }
        proof_inbox_.clear();

        for (uint64_t id : exit_inbox_) {
            const ProviderPosition* pos = risk_.find(id);
            if (!pos || !pos->open()) {
                log_.emit(block_, "exit_rejected",
                          {{"provider", id}, {"reason", "no_open_position"}});
                continue;
            }
            Native penalty = burn_.exit_penalty(risk_, id, block_);
            WithdrawOutcome out;
            try {
                out = risk_.withdraw(id, pool_, buffer_, block_);
            } catch (const std::exception& ex) {
                log_.emit(block_, "exit_rejected", {{"provider", id}, {"reason", ex.what()}});
                continue;
            }
            if (out.liquidated) {
                log_risk_event(out.closure);
                wallets_[id].native += out.refund;
            } else {
                Native charged = amount_min(penalty, out.refund);
                wallets_[id].native += out.refund - charged;
                buffer_.accrue_native(charged);
                log_.emit(block_, "provider_exited",
                          {{"provider", id},
                           {"refund", jstr(out.refund - charged)},
                           {"penalty", jstr(charged)}});
            }
        }
        exit_inbox_.clear();
    }

    void step_expire() {
        for (const auto& e : burn_.expire_assignments(risk_, buffer_, pool_, block_)) {
            log_burn_event(e);
            escrow_ -= e.amount;
            wallets_[e.claimant].native += e.claimant_paid;
        }
    }

    void step_risk() {
        for (const auto& e : risk_.risk_pass(pool_, buffer_, block_)) {
            log_risk_event(e);
            if (e.kind == RiskEvent::Kind::liquidated) wallets_[e.provider_id].native += e.refund;
        }
    }

    void step_buffer() {
        if (pool_.has_liquidity()) buffer_.observe_ratio(pool_ratio(pool_));
        if (auto dep = buffer_.deploy_on_volatility(pool_)) {
            log_.emit(block_, "buffer_deployed",
                      {{"native_added", jstr(dep->native_added)},
                       {"intertoken_added", jstr(dep->intertoken_added)},
                       {"variance", dep->variance}});
        }
        FeeMethod before = buffer_.fee_method();
        FeeMethod after = buffer_.update_fee_method();
        if (before != after)
            log_.emit(block_, "fee_method_changed", {{"method", fee_method_label(after)}});
        if (buffer_.payout_due(block_)) {
            for (const auto& p : buffer_.pay_providers(risk_.payable_holders())) {
                wallets_[p.provider_id].native += p.amount;
                log_.emit(block_, "provider_payout",
                          {{"provider", p.provider_id}, {"amount", jstr(p.amount)}});
            }
        }
    }

    void step_batch(std::vector<MainnetTx> mempool, BlockReport& report) {
        std::vector<MainnetTx> deduped = dedupe_mempool(mempool);
        std::vector<MainnetTx> live;
        live.reserve(deduped.size());
        for (auto& tx : deduped) {
            if (tx.nonce <= last_nonce(tx.sender))
                report.skipped.push_back({tx.sender, tx.nonce, "stale_nonce"});
            else
                live.push_back(std::move(tx));
        }

        const int64_t now_h = commit_height_of(block_);
        std::vector<int64_t> heights;
        std::vector<MainnetTx> ordered;
        bool forged = false;
        if (params_.poe_enabled) {
            auto [poe, plan_heights] = forge_plan(block_);
            heights = std::move(plan_heights);
            try {
                OptimizedBatch opt = optimize_batch(live, pool_, poe, params_.search);
                ordered = std::move(opt.ordered_txs);
                report.forged_bits = std::move(opt.forged_hash_bits);
                report.booster_bits = std::move(opt.booster_key_bits);
                forged = true;
            } catch (const infeasible_error& e) {
                log_.emit(block_, "forge_infeasible", {{"slot", e.slot}});
                ordered = gas_descending(std::move(live));
            } catch (const std::invalid_argument&) {
                log_.emit(block_, "forge_infeasible", {{"reason", "short_batch"}});
                ordered = gas_descending(std::move(live));
            }
        } else {
            heights = {now_h};
            ordered = gas_descending(std::move(live));
        }

        execute_batch(ordered, report);
        report.ordered_batch = std::move(ordered);

        if (forged || !params_.poe_enabled) {
            for (int64_t h : heights) {
                const Hash256& real = chain_.block_at(h).header_hash;
                bool corrupt = h == now_h && corrupt_blocks_.count(block_) > 0;
                Hash256 recorded = corrupt ? real.with_flipped_bit(0) : real;
                forged_headers_[h] = recorded;
                json f;
                f["height"] = h;
                f["header"] = jstr(recorded);
                if (corrupt) f["corrupted"] = true;
                log_.emit(block_, params_.poe_enabled ? "forged" : "header_recorded",
                          std::move(f));
            }
            if (repair_height_ &&
                std::find(heights.begin(), heights.end(), *repair_height_) != heights.end())
                repair_height_.reset();
            report.forged_heights = heights;
        } else {
            report.forge_failed = true;
            if (!repair_height_)
                repair_height_ = now_h;
            else if (*repair_height_ != now_h)
                log_.emit(block_, "commitment_missed", {{"height", now_h}});
        }

        if (pool_.has_liquidity()) {
            BoosterPayment bp = buffer_.pay_booster(report.score.volume_score, pool_ratio(pool_));
            if (bp.paid.mantissa() > 0) {
                wallets_[params_.booster_account].intertoken += bp.paid;
                log_.emit(block_, "booster_paid",
                          {{"paid", jstr(bp.paid)}, {"still_owed", jstr(bp.still_owed)}});
            }
        }
    }

    void execute_batch(const std::vector<MainnetTx>& ordered, BlockReport& report) {
        for (const auto& tx : ordered) {
            // Nonces are replay protection, not an ordering constraint: the
            // forged ordering may interleave a sender's transactions freely.
            last_nonce_[tx.sender] = std::max(last_nonce_[tx.sender], tx.nonce);
            Wallet& w = wallets_[tx.sender];
            const Native gas = tx.gas_fee();
            if (tx.is_exchange()) {
                const auto& e = tx.exchange();
                if (!pool_.has_liquidity()) {
                    report.skipped.push_back({tx.sender, tx.nonce, "insufficient_liquidity"});
                    continue;
                }
                Ratio pre = pool_ratio(pool_);
                if (pre < e.ratio_min || pre > e.ratio_max) {
                    report.skipped.push_back({tx.sender, tx.nonce, "ratio_out_of_range"});
                    continue;
                }
                SwapQuote q;
                try {
                    q = quote_swap(pool_, e.direction, e.volume_in, buffer_.fee_method());
                } catch (const insufficient_liquidity&) {
                    report.skipped.push_back({tx.sender, tx.nonce, "insufficient_liquidity"});
                    continue;
                }
                int128 need_native = gas.mantissa();
                int128 need_inter = 0;
                if (e.direction == ExchangeDirection::buy_intertoken) {
                    need_native += e.volume_in;
                    if (q.fee_unit == Unit::native) need_native += q.fee;
                } else {
                    need_inter += e.volume_in;
                    if (q.fee_unit == Unit::intertoken) need_inter += q.fee;
                }
                if (w.native.mantissa() < need_native || w.intertoken.mantissa() < need_inter) {
                    report.skipped.push_back({tx.sender, tx.nonce, "insufficient_funds"});
                    continue;
                }
                pool_.intertoken_inventory = q.new_intertoken;
                pool_.native_inventory = q.new_native;
                w.native -= Native::from_mantissa(need_native);
                w.intertoken -= Intertoken::from_mantissa(need_inter);
                if (e.direction == ExchangeDirection::buy_intertoken) {
                    w.intertoken += Intertoken::from_mantissa(q.volume_out);
                    report.score.volume_score += Native::from_mantissa(e.volume_in);
                } else {
                    w.native += Native::from_mantissa(q.volume_out);
                    report.score.volume_score +=
                        to_native(Intertoken::from_mantissa(e.volume_in), pre);
                }
                wallets_[params_.miner_account].native += gas;
                report.score.miner_score += gas;
                route_fee(q);
                ++report.executed;
            } else {
                const Native dep = tx.liquidity().deposit;
                if (pool_.has_liquidity()) {
                    if (pool_.native_inventory < pool_.min_volume_threshold) {
                        report.skipped.push_back({tx.sender, tx.nonce, "below_threshold"});
                        continue;
                    }
                } else if (!(pool_.bootstrap_ratio && pool_.min_volume_threshold.is_zero())) {
                    report.skipped.push_back({tx.sender, tx.nonce, "insufficient_liquidity"});
                    continue;
                }
                const ProviderPosition* pos = risk_.find(tx.sender);
                if (pos && pos->open()) {
                    report.skipped.push_back({tx.sender, tx.nonce, "already_provider"});
                    continue;
                }
                if (w.native.mantissa() < dep.mantissa() + gas.mantissa()) {
                    report.skipped.push_back({tx.sender, tx.nonce, "insufficient_funds"});
                    continue;
                }
                JoinOutcome out;
                try {
                    out = risk_.join(tx.sender, ProviderKind::regular, dep, pool_, block_);
                } catch (const insufficient_liquidity&) {
                    report.skipped.push_back({tx.sender, tx.nonce, "below_threshold"});
                    continue;
                } catch (const std::invalid_argument&) {
                    report.skipped.push_back({tx.sender, tx.nonce, "dust_deposit"});
                    continue;
                }
                w.native -= dep + gas;
                wallets_[params_.miner_account].native += gas;
                report.score.miner_score += gas;
                report.score.volume_score += dep;
                log_.emit(block_, "provider_joined",
                          {{"provider", tx.sender},
                           {"provider_kind", provider_kind_name(ProviderKind::regular)},
                           {"deposit", jstr(dep)},
                           {"minted", jstr(out.minted)},
                           {"coins", jstr(out.coins)}});
                ++report.executed;
            }
        }
    }

    void route_fee(const SwapQuote& q) {
        if (q.fee <= 0) return;
        if (q.fee_unit == Unit::native) {
            buffer_.accrue_native(Native::from_mantissa(q.fee));
        } else {
            AccrualSplit split = buffer_.accrue_intertoken(Intertoken::from_mantissa(q.fee));
            if (split.to_booster.mantissa() > 0) {
                wallets_[params_.booster_account].intertoken += split.to_booster;
                log_.emit(block_, "booster_paid",
                          {{"paid", jstr(split.to_booster)},
                           {"still_owed", jstr(buffer_.booster_owed())}});
            }
        }
    }

    void mine_alien() {
        std::vector<TxRejection> rejected;
        chain_.mine_block(alien_inbox_, &rejected);
        alien_inbox_.clear();
        for (const auto& r : rejected)
            log_.emit(block_, "alien_tx_rejected",
                      {{"from", jstr(r.tx.from_pubkey)}, {"nonce", r.tx.nonce},
                       {"reason", r.reason}});
    }

    SimParams params_;
    KeyRegistry registry_;
    AlienChain chain_;
    AlienChainParams alien_params_;
    PoolState pool_;
    LiquidityBuffer buffer_;
    RiskManager risk_;
    BurnCoordinator burn_;
    KeyPair booster_key_;
    EventLog log_;

    std::map<uint64_t, Wallet> wallets_;
    std::map<uint64_t, uint64_t> last_nonce_;
    std::map<int64_t, Hash256> forged_headers_;
    Intertoken escrow_;
    Native native_baseline_;
    uint64_t block_ = 0;
    std::optional<int64_t> repair_height_;
    std::set<uint64_t> corrupt_blocks_;

    std::vector<PendingJoin> join_inbox_;
    std::vector<PendingKey> key_inbox_;
    std::vector<PendingInjection> injection_inbox_;
    std::vector<PendingClaim> claim_inbox_;
    std::vector<PendingProof> proof_inbox_;
    std::vector<uint64_t> exit_inbox_;
    std::vector<AlienTx> alien_inbox_;
};

}  // namespace interpool
