#pragma once

// The burn cycle turns intertokens back into alien coins. A holder escrows
// intertokens as a claim; the coordinator assigns the claim to a liquidity
// provider, who must pay the claimant on the alien chain (one intertoken per
// alien coin) and prove the payment with an inclusion proof against the
// forged headers. A proven payment burns the escrow, shrinks the provider's
// obligation and releases collateral pro rata; a missed deadline settles the
// claimant in native coin out of the provider's collateral (buffer-backed)
// instead.
//
// Assignment priority: first regulars that have waited past the starvation
// limit without ever being assigned, then providers fully committed to
// serving their obligation, then the regular rotation in join order.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "interpool/buffer.hpp"
#include "interpool/chain.hpp"
#include "interpool/keys.hpp"
#include "interpool/listrack.hpp"
#include "interpool/risk.hpp"

namespace interpool {

struct BurncycleParams {
    int transfer_window = 6;        // blocks an assignee has to prove the alien payment
    int cycle_length = 16;          // rotation period used by the exit penalty
    Ratio exit_penalty_max = Ratio::from_string("0.05");
    int never_liquidity_limit = 32; // idle blocks before an unassigned regular gets priority

    void validate() const {
        if (transfer_window < 1) throw std::invalid_argument("transfer_window must be >= 1");
        if (cycle_length < 1) throw std::invalid_argument("cycle_length must be >= 1");
        if (exit_penalty_max.mantissa() < 0 || exit_penalty_max.mantissa() > kScale)
            throw std::invalid_argument("exit_penalty_max out of range");
        if (never_liquidity_limit < 0)
            throw std::invalid_argument("never_liquidity_limit must be non-negative");
    }
};

enum class ClaimState { open, assigned, settled, defaulted };

inline const char* claim_state_name(ClaimState s) {
    switch (s) {
        case ClaimState::open: return "open";
        case ClaimState::assigned: return "assigned";
        case ClaimState::settled: return "settled";
        case ClaimState::defaulted: return "defaulted";
    }
    return "?";
}

struct BurnClaim {
    uint64_t claim_id = 0;
    uint64_t claimant = 0;            // mainnet account that escrowed the tokens
    Hash256 claimant_alien_pubkey;    // where the alien payment must arrive
    Intertoken amount;
    uint64_t submitted_block = 0;
    ClaimState state = ClaimState::open;
    bool escalated = false;           // an assignment attempt already failed once

    std::optional<uint64_t> provider_id;
    uint64_t assigned_block = 0;
    uint64_t deadline = 0;
    Hash256 expected_signer;          // provider's alien key on file at assignment
};

struct BurnEvent {
    enum class Kind {
        claim_opened,
        claim_assigned,
        claim_escalated,   // no eligible provider
        burn_settled,
        proof_rejected,
        forgery_alarm,     // consistent proof, wrong forged header
        claim_defaulted,
        key_updated,
        key_update_late,   // key changed in the assignment block; old key stays expected
    };
    Kind kind;
    uint64_t block = 0;
    uint64_t claim_id = 0;
    uint64_t provider_id = 0;
    uint64_t claimant = 0;
    Intertoken amount;            // claim size
    Native collateral_released;   // burn_settled
    Native claimant_paid;         // claim_defaulted
    Native slashed;               // claim_defaulted: taken from collateral
    Native buffer_draw;           // claim_defaulted: taken from the buffer stack
    Native shortfall;             // claim_defaulted: left unpaid
    uint64_t deadline = 0;        // claim_assigned
    std::string reason;           // proof_rejected
};

class BurnCoordinator {
  public:
    explicit BurnCoordinator(BurncycleParams params = {}) : params_(params) {
        params_.validate();
    }

    const BurncycleParams& params() const { return params_; }
    const std::map<uint64_t, BurnClaim>& claims() const { return claims_; }

    const BurnClaim& claim(uint64_t id) const {
        auto it = claims_.find(id);
        if (it == claims_.end()) throw std::out_of_range("no claim " + std::to_string(id));
        return it->second;
    }

    // Providers announce the alien key they will pay claimants from. The
    // first key takes effect immediately; a replacement only binds
    // assignments made in later blocks.
    BurnEvent register_alien_key(uint64_t provider, const Hash256& key, uint64_t block) {
        auto it = keys_.find(provider);
        if (it == keys_.end()) {
            keys_[provider] = key;
        } else {
            pending_keys_[provider] = {key, block};
        }
        BurnEvent e{};
        e.kind = BurnEvent::Kind::key_updated;
        e.block = block;
        e.provider_id = provider;
        return e;
    }

    std::optional<Hash256> key_on_file(uint64_t provider) const {
        auto it = keys_.find(provider);
        if (it == keys_.end()) return std::nullopt;
        return it->second;
    }

    // The claimant escrows `amount` intertokens (the caller moves the
    // tokens); the claim queues for assignment.
    BurnEvent submit_claim(uint64_t claimant, const Hash256& claimant_alien_pubkey,
                           Intertoken amount, uint64_t block) {
        if (amount.mantissa() <= 0) throw std::invalid_argument("claim must be positive");
        BurnClaim c;
        c.claim_id = next_claim_id_++;
        c.claimant = claimant;
        c.claimant_alien_pubkey = claimant_alien_pubkey;
        c.amount = amount;
        c.submitted_block = block;
        claims_[c.claim_id] = c;
        BurnEvent e{};
        e.kind = BurnEvent::Kind::claim_opened;
        e.block = block;
        e.claim_id = c.claim_id;
        e.claimant = claimant;
        e.amount = amount;
        return e;
    }

    // Assign every open claim it can, oldest first.
    std::vector<BurnEvent> assign_open_claims(RiskManager& risk, uint64_t block) {
        std::vector<BurnEvent> events;
        for (auto& [id, claim] : claims_) {
            if (claim.state != ClaimState::open) continue;
            auto pick = choose_provider(risk, claim.amount, block);
            if (!pick) {
                if (!claim.escalated) {
                    claim.escalated = true;
                    BurnEvent e{};
                    e.kind = BurnEvent::Kind::claim_escalated;
                    e.block = block;
                    e.claim_id = id;
                    e.claimant = claim.claimant;
                    e.amount = claim.amount;
                    events.push_back(e);
                }
                continue;
            }

            promote_pending_key(*pick, block);
            auto pending = pending_keys_.find(*pick);
            if (pending != pending_keys_.end() && pending->second.second == block) {
                BurnEvent late{};
                late.kind = BurnEvent::Kind::key_update_late;
                late.block = block;
                late.claim_id = id;
                late.provider_id = *pick;
                events.push_back(late);
            }

            claim.state = ClaimState::assigned;
            claim.provider_id = *pick;
            claim.assigned_block = block;
            claim.deadline = block + uint64_t(params_.transfer_window);
            claim.expected_signer = keys_.at(*pick);
            risk.set_status(*pick, ProviderStatus::burn_pending);
            last_assigned_[*pick] = block;

            BurnEvent e{};
            e.kind = BurnEvent::Kind::claim_assigned;
            e.block = block;
            e.claim_id = id;
            e.provider_id = *pick;
            e.claimant = claim.claimant;
            e.amount = claim.amount;
            e.deadline = claim.deadline;
            events.push_back(e);
        }
        return events;
    }

    // Verify a provider's payment proof and settle the claim. The proof must
    // be internally consistent, signed by the key on file at assignment, pay
    // the claimant's alien key the full claim, and reconstruct the forged
    // header for its height. A proof that passes everything except the
    // forged-header comparison raises the forgery alarm.
    std::vector<BurnEvent> settle_burn_proof(uint64_t claim_id, const SpvProof& proof,
                                             const std::map<int64_t, Hash256>& forged_headers,
                                             const SignatureScheme& scheme, RiskManager& risk,
                                             SupplyLedger& supply, uint64_t block) {
        std::vector<BurnEvent> events;
        auto it = claims_.find(claim_id);
        if (it == claims_.end() || it->second.state != ClaimState::assigned) {
            events.push_back(rejection(claim_id, block, "not_assigned"));
            return events;
        }
        BurnClaim& claim = it->second;

        Hash256 folded = fold_merkle_path(proof.tx.leaf_hash(), proof.path);
        if (folded != proof.merkle_root) {
            events.push_back(rejection(claim_id, block, "bad_path"));
            return events;
        }
        if (!scheme.verify(proof.tx.from_pubkey, proof.tx.serialize_unsigned(),
                           proof.tx.signature)) {
            events.push_back(rejection(claim_id, block, "bad_signature"));
            return events;
        }
        if (proof.tx.from_pubkey != claim.expected_signer) {
            events.push_back(rejection(claim_id, block, "wrong_signer"));
            return events;
        }
        if (proof.tx.to_pubkey != claim.claimant_alien_pubkey) {
            events.push_back(rejection(claim_id, block, "wrong_recipient"));
            return events;
        }
        if (from_alien(proof.tx.amount) < claim.amount) {
            events.push_back(rejection(claim_id, block, "short_amount"));
            return events;
        }
        auto forged = forged_headers.find(proof.block_height);
        if (forged == forged_headers.end()) {
            events.push_back(rejection(claim_id, block, "unknown_height"));
            return events;
        }
        Hash256 header =
            alien_header_hash(proof.prev_hash, proof.merkle_root, proof.block_height);
        if (header != forged->second) {
            // Everything checks out against the proof's own story, but the
            // story disagrees with what was forged on-chain.
            events.push_back(rejection(claim_id, block, "forged_header_mismatch"));
            BurnEvent alarm{};
            alarm.kind = BurnEvent::Kind::forgery_alarm;
            alarm.block = block;
            alarm.claim_id = claim_id;
            alarm.provider_id = *claim.provider_id;
            events.push_back(alarm);
            return events;
        }

        uint64_t provider = *claim.provider_id;
        Native released = risk.serve_claim(provider, claim.amount);
        supply.burned_total += claim.amount;  // the escrowed tokens
        if (risk.find(provider)->status == ProviderStatus::burn_pending)
            risk.set_status(provider, ProviderStatus::active);
        claim.state = ClaimState::settled;

        BurnEvent e{};
        e.kind = BurnEvent::Kind::burn_settled;
        e.block = block;
        e.claim_id = claim_id;
        e.provider_id = provider;
        e.claimant = claim.claimant;
        e.amount = claim.amount;
        e.collateral_released = released;
        events.push_back(e);
        return events;
    }

    // Time out overdue assignments: the claimant is made whole in native
    // coin — collateral first, buffer stack for any shortfall — and the
    // escrow burns. The obligation counts as settled for the provider, with
    // nothing released.
    std::vector<BurnEvent> expire_assignments(RiskManager& risk, LiquidityBuffer& buffer,
                                              PoolState& pool, uint64_t block) {
        std::vector<BurnEvent> events;
        for (auto& [id, claim] : claims_) {
            if (claim.state != ClaimState::assigned || block <= claim.deadline) continue;
            uint64_t provider = *claim.provider_id;

            Native owed;
            if (pool.has_liquidity())
                owed = to_native(claim.amount, pool_ratio(pool));
            else if (pool.bootstrap_ratio)
                owed = to_native(claim.amount, *pool.bootstrap_ratio);
            Native slashed = risk.slash_collateral(provider, owed);
            Native draw = buffer.draw_native(owed - slashed);

            pool.supply.burned_total += claim.amount;
            risk.absorb_claim(provider, claim.amount);
            if (risk.find(provider)->status == ProviderStatus::burn_pending)
                risk.set_status(provider, ProviderStatus::active);
            claim.state = ClaimState::defaulted;

            BurnEvent e{};
            e.kind = BurnEvent::Kind::claim_defaulted;
            e.block = block;
            e.claim_id = id;
            e.provider_id = provider;
            e.claimant = claim.claimant;
            e.amount = claim.amount;
            e.slashed = slashed;
            e.buffer_draw = draw;
            e.claimant_paid = slashed + draw;
            e.shortfall = owed - slashed - draw;
            events.push_back(e);
        }
        return events;
    }

    // Blocks until the provider's next expected assignment. Zero for fully
    // committed providers and for one currently serving a claim; regulars
    // wait out their rotation rank.
    uint64_t delay_for(const RiskManager& risk, uint64_t provider, uint64_t block) const {
        const ProviderPosition* pos = risk.find(provider);
        if (!pos || !pos->open()) throw std::invalid_argument("unknown provider");
        if (pos->kind == ProviderKind::full || pos->status == ProviderStatus::burn_pending)
            return 0;
        auto order = rotation_order(risk);
        uint64_t rank = 0;
        for (size_t i = 0; i < order.size(); ++i) {
            if (order[i] == provider) {
                rank = (i + order.size() - next_rotation_index(risk, order)) % order.size();
                break;
            }
        }
        const uint64_t w = uint64_t(params_.cycle_length);
        return rank * w + (w - block % w);
    }

    // Exit penalty rate: maximal when the provider's turn is imminent,
    // fading linearly to zero one full cycle out.
    Ratio penalty_for_delay(uint64_t delay_blocks) const {
        const int128 w = int128(params_.cycle_length);
        const int128 d = int128(delay_blocks);
        if (d >= w) return Ratio();
        // p_max * (1 - d/w)
        return Ratio::from_mantissa(
            detail::muldiv(params_.exit_penalty_max.mantissa(), (w - d) * kScale / w, kScale));
    }

    Native exit_penalty(const RiskManager& risk, uint64_t provider, uint64_t block) const {
        const ProviderPosition* pos = risk.find(provider);
        if (!pos || !pos->open()) throw std::invalid_argument("unknown provider");
        if (pos->status == ProviderStatus::completed) return Native();
        return mul(pos->deposit, penalty_for_delay(delay_for(risk, provider, block)));
    }

  private:
    BurnEvent rejection(uint64_t claim_id, uint64_t block, const std::string& reason) {
        BurnEvent e{};
        e.kind = BurnEvent::Kind::proof_rejected;
        e.block = block;
        e.claim_id = claim_id;
        auto it = claims_.find(claim_id);
        if (it != claims_.end() && it->second.provider_id) e.provider_id = *it->second.provider_id;
        e.reason = reason;
        return e;
    }

    void promote_pending_key(uint64_t provider, uint64_t block) {
        auto it = pending_keys_.find(provider);
        if (it != pending_keys_.end() && it->second.second < block) {
            keys_[provider] = it->second.first;
            pending_keys_.erase(it);
        }
    }

    // Regular providers in join order (the rotation ring).
    std::vector<uint64_t> rotation_order(const RiskManager& risk) const {
        std::vector<std::pair<std::pair<uint64_t, uint64_t>, uint64_t>> keyed;
        for (const auto& [id, pos] : risk.positions())
            if (pos.open() && pos.kind == ProviderKind::regular)
                keyed.push_back({{pos.joined_block, id}, id});
        std::sort(keyed.begin(), keyed.end());
        std::vector<uint64_t> out;
        for (auto& [_, id] : keyed) out.push_back(id);
        return out;
    }

    // Index of the next rotation turn: the first ring slot after the last
    // assigned rotation key.
    size_t next_rotation_index(const RiskManager& risk, const std::vector<uint64_t>& order) const {
        if (!last_rotation_key_) return 0;
        for (size_t i = 0; i < order.size(); ++i) {
            const ProviderPosition* pos = risk.find(order[i]);
            if (std::pair<uint64_t, uint64_t>{pos->joined_block, pos->id} > *last_rotation_key_)
                return i;
        }
        return 0;  // wrapped
    }

    bool eligible(const ProviderPosition& pos, Intertoken claim) const {
        if (pos.status != ProviderStatus::active && pos.status != ProviderStatus::flagged)
            return false;
        if (pos.outstanding() < claim) return false;
        return keys_.count(pos.id) > 0;
    }

    std::optional<uint64_t> choose_provider(RiskManager& risk, Intertoken claim, uint64_t block) {
        // 1. starved regulars: never assigned, idle past the limit
        std::optional<std::pair<std::pair<uint64_t, uint64_t>, uint64_t>> starved;
        for (const auto& [id, pos] : risk.positions()) {
            if (!pos.open() || pos.kind != ProviderKind::regular) continue;
            if (last_assigned_.count(id)) continue;
            if (block - pos.joined_block <= uint64_t(params_.never_liquidity_limit)) continue;
            if (!eligible(pos, claim)) continue;
            std::pair<uint64_t, uint64_t> key{pos.joined_block, id};
            if (!starved || key < starved->first) starved = {{key, id}};
        }
        if (starved) return starved->second;

        // 2. fully committed providers, oldest first
        std::optional<std::pair<std::pair<uint64_t, uint64_t>, uint64_t>> full;
        for (const auto& [id, pos] : risk.positions()) {
            if (!pos.open() || pos.kind != ProviderKind::full) continue;
            if (!eligible(pos, claim)) continue;
            std::pair<uint64_t, uint64_t> key{pos.joined_block, id};
            if (!full || key < full->first) full = {{key, id}};
        }
        if (full) return full->second;

        // 3. regular rotation from the cursor
        auto order = rotation_order(risk);
        if (order.empty()) return std::nullopt;
        size_t start = next_rotation_index(risk, order);
        for (size_t k = 0; k < order.size(); ++k) {
            uint64_t id = order[(start + k) % order.size()];
            const ProviderPosition* pos = risk.find(id);
            if (!eligible(*pos, claim)) continue;
            last_rotation_key_ = {pos->joined_block, id};
            return id;
        }
        return std::nullopt;
    }

    BurncycleParams params_;
    std::map<uint64_t, BurnClaim> claims_;
    uint64_t next_claim_id_ = 1;
    std::map<uint64_t, Hash256> keys_;
    std::map<uint64_t, std::pair<Hash256, uint64_t>> pending_keys_;  // key, update block
    std::map<uint64_t, uint64_t> last_assigned_;
    std::optional<std::pair<uint64_t, uint64_t>> last_rotation_key_;
};

}  // namespace interpool
