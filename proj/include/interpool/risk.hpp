#pragma once

// Collateralized liquidity provision. A provider's deposit splits into a
// twin pool deposit (half native, half converted to freshly minted
// intertokens at the pool ratio) and a native collateral half held outside
// the pool. The minted intertokens are the provider's debt to the protocol;
// whatever part of that debt their pool share no longer covers is "risky"
// and must be backed by collateral at the current ratio. Positions whose
// remaining collateral falls below the injection margin are flagged with a
// collateral call and a grace deadline; positions underwater or past the
// deadline are liquidated, with the buffer absorbing the burn obligation.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "interpool/amm.hpp"
#include "interpool/amount.hpp"
#include "interpool/buffer.hpp"

namespace interpool {

enum class ProviderKind { regular, full };
enum class ProviderStatus { active, flagged, burn_pending, completed, liquidated, exited };

inline const char* provider_kind_name(ProviderKind k) {
    return k == ProviderKind::regular ? "regular" : "full";
}

inline const char* provider_status_name(ProviderStatus s) {
    switch (s) {
        case ProviderStatus::active: return "active";
        case ProviderStatus::flagged: return "flagged";
        case ProviderStatus::burn_pending: return "burn_pending";
        case ProviderStatus::completed: return "completed";
        case ProviderStatus::liquidated: return "liquidated";
        case ProviderStatus::exited: return "exited";
    }
    return "?";
}

struct RiskParams {
    Ratio injection_margin = Ratio::from_int(1);  // flag while remaining < margin * risky
    int flag_grace_blocks = 3;                    // blocks allowed to cure a flag

    void validate() const {
        if (injection_margin.mantissa() < 0)
            throw std::invalid_argument("injection_margin must be non-negative");
        if (flag_grace_blocks < 0)
            throw std::invalid_argument("flag_grace_blocks must be non-negative");
    }
};

struct ProviderPosition {
    uint64_t id = 0;
    ProviderKind kind = ProviderKind::regular;
    ProviderStatus status = ProviderStatus::active;
    Native deposit;            // original stake
    Native collateral;         // native half, shrinks with releases and slashes
    Intertoken minted;         // intertokens created at join
    Intertoken served;         // burn obligations already settled
    PoolCoins coins;           // constant-product share
    uint64_t joined_block = 0;
    std::optional<uint64_t> flag_deadline;
    Native last_injection_request;

    Intertoken outstanding() const { return minted - served; }
    bool open() const {
        return status != ProviderStatus::liquidated && status != ProviderStatus::exited;
    }
};

// Mark-to-market view of one position at the current pool state.
struct PositionValuation {
    uint64_t id = 0;
    ProviderStatus status = ProviderStatus::active;
    Intertoken current_intertoken;  // pro-rata share of the pool intertoken side
    Native current_native;          // pro-rata share of the pool native side
    Intertoken risky_intertoken;    // outstanding debt the pool share no longer covers
    Native risky_native;            // same, valued at the pool ratio
    Native collateral;
    Native remaining;               // collateral - risky_native (may be negative)
    Native injection_request;       // zero unless flagged
};

struct RiskEvent {
    enum class Kind { flagged, flag_cleared, injected, liquidated };
    Kind kind;
    uint64_t provider_id = 0;
    uint64_t block = 0;
    Native injection_request;          // flagged
    std::optional<uint64_t> deadline;  // flagged
    Native refund;                     // liquidated: native returned to the provider
    Native forfeit;                    // liquidated: native surrendered to the buffer
    Intertoken own_burned;             // liquidated: pool-share intertokens retired
    Intertoken risky_burned;           // liquidated: debt handed to the buffer to retire
    std::string reason;                // liquidated: "underwater" | "flag_expired" | "withdrawal"
};

struct JoinOutcome {
    Intertoken minted;
    Native pool_leg;  // native half added to the pool
    PoolCoins coins;
};

struct WithdrawOutcome {
    bool liquidated = false;  // true when the position was underwater and force-closed
    Native refund;            // before any early-exit penalty
    RiskEvent closure;        // the liquidation record when liquidated
};

class RiskManager {
  public:
    explicit RiskManager(RiskParams params = {}) : params_(params) { params_.validate(); }

    const RiskParams& params() const { return params_; }
    const std::map<uint64_t, ProviderPosition>& positions() const { return positions_; }
    PoolCoins total_coins() const { return total_coins_; }

    const ProviderPosition* find(uint64_t id) const {
        auto it = positions_.find(id);
        return it == positions_.end() ? nullptr : &it->second;
    }

    // Twin deposit: half the stake enters the pool as native inventory, the
    // same half again as newly minted intertokens at the join ratio; the
    // other half is locked as collateral. Coins are the product of the two
    // pool legs.
    JoinOutcome join(uint64_t id, ProviderKind kind, Native deposit, PoolState& pool,
                     uint64_t block) {
        if (deposit.mantissa() <= 0) throw std::invalid_argument("deposit must be positive");
        if (positions_.count(id) && positions_.at(id).open())
            throw std::invalid_argument("provider already has an open position");

        Ratio r;
        if (pool.has_liquidity()) {
            if (pool.native_inventory < pool.min_volume_threshold)
                throw insufficient_liquidity("pool below its volume threshold");
            r = pool_ratio(pool);
        } else if (pool.bootstrap_ratio && pool.min_volume_threshold.is_zero()) {
            r = *pool.bootstrap_ratio;
        } else {
            throw insufficient_liquidity("empty pool without a bootstrap ratio");
        }

        JoinOutcome out;
        out.pool_leg = Native::from_mantissa(deposit.mantissa() / 2);
        out.minted = to_intertoken(out.pool_leg, r);
        if (out.minted.mantissa() <= 0)
            throw std::invalid_argument("deposit too small to mint intertokens");
        out.coins = coins_of(out.minted, out.pool_leg);

        pool.native_inventory += out.pool_leg;
        pool.intertoken_inventory += out.minted;
        pool.supply.minted_total += out.minted;
        total_coins_ += out.coins;

        ProviderPosition pos;
        pos.id = id;
        pos.kind = kind;
        pos.deposit = deposit;
        pos.collateral = deposit - out.pool_leg;  // odd mantissa tick stays in collateral
        pos.minted = out.minted;
        pos.coins = out.coins;
        pos.joined_block = block;
        positions_[id] = pos;
        return out;
    }

    // Every position is its own constant-product curve: its current pool
    // legs are the ones implied by its coins at the pool-wide ratio. Summed
    // over equal-ratio joins this reproduces the pool inventories exactly
    // (up to rounding dust, which stays in the pool).
    PositionValuation value_position(const ProviderPosition& pos, const PoolState& pool) const {
        PositionValuation v;
        v.id = pos.id;
        v.status = pos.status;
        v.collateral = pos.collateral;
        if (pos.open()) {
            if (pool.has_liquidity()) {
                Ratio r = pool_ratio(pool);
                PositionLegs legs = position_at_ratio(pos.coins, r);
                v.current_intertoken = legs.intertoken;
                v.current_native = legs.native;
                v.risky_intertoken =
                    amount_max(Intertoken(), pos.outstanding() - v.current_intertoken);
                v.risky_native = to_native(v.risky_intertoken, r);
            } else {
                // Degenerate: a drained pool leaves the whole obligation
                // uncovered; without a price only the bootstrap ratio can
                // value it.
                v.risky_intertoken = amount_max(Intertoken(), pos.outstanding());
                if (pool.bootstrap_ratio)
                    v.risky_native = to_native(v.risky_intertoken, *pool.bootstrap_ratio);
            }
        }
        v.remaining = v.collateral - v.risky_native;
        if (pos.status == ProviderStatus::flagged) v.injection_request = pos.last_injection_request;
        return v;
    }

    std::vector<PositionValuation> value_all(const PoolState& pool) const {
        std::vector<PositionValuation> out;
        for (const auto& [id, pos] : positions_) out.push_back(value_position(pos, pool));
        return out;
    }

    // Per-block collateral sweep. Underwater positions liquidate on the
    // spot; thin ones get flagged with a full collateral call and a grace
    // deadline; flagged positions that healed are cleared; flagged positions
    // past their deadline liquidate.
    std::vector<RiskEvent> risk_pass(PoolState& pool, LiquidityBuffer& buffer, uint64_t block) {
        std::vector<RiskEvent> events;
        for (auto& [id, pos] : positions_) {
            if (pos.status != ProviderStatus::active && pos.status != ProviderStatus::flagged)
                continue;
            PositionValuation v = value_position(pos, pool);
            if (v.remaining.mantissa() < 0) {
                events.push_back(close_position(pos, pool, buffer, block, "underwater"));
                continue;
            }
            bool thin = v.risky_native.mantissa() > 0 &&
                        v.remaining < mul(v.risky_native, params_.injection_margin);
            if (thin) {
                if (pos.status == ProviderStatus::flagged) {
                    pos.last_injection_request = v.risky_native;
                    if (block > *pos.flag_deadline)
                        events.push_back(close_position(pos, pool, buffer, block, "flag_expired"));
                } else {
                    pos.status = ProviderStatus::flagged;
                    pos.flag_deadline = block + uint64_t(params_.flag_grace_blocks);
                    pos.last_injection_request = v.risky_native;
                    RiskEvent e;
                    e.kind = RiskEvent::Kind::flagged;
                    e.provider_id = id;
                    e.block = block;
                    e.injection_request = v.risky_native;
                    e.deadline = pos.flag_deadline;
                    events.push_back(e);
                }
            } else if (pos.status == ProviderStatus::flagged) {
                pos.status = ProviderStatus::active;
                pos.flag_deadline.reset();
                pos.last_injection_request = Native();
                RiskEvent e;
                e.kind = RiskEvent::Kind::flag_cleared;
                e.provider_id = id;
                e.block = block;
                events.push_back(e);
            }
        }
        return events;
    }

    // Top up collateral. Returns the event; clears the flag when the
    // position is healthy again under the margin rule.
    RiskEvent inject(uint64_t id, Native amount, const PoolState& pool, uint64_t block) {
        if (amount.mantissa() <= 0) throw std::invalid_argument("injection must be positive");
        ProviderPosition& pos = open_position(id);
        pos.collateral += amount;
        RiskEvent e;
        e.kind = RiskEvent::Kind::injected;
        e.provider_id = id;
        e.block = block;
        PositionValuation v = value_position(pos, pool);
        bool healthy = v.remaining.mantissa() >= 0 &&
                       (v.risky_native.mantissa() == 0 ||
                        v.remaining >= mul(v.risky_native, params_.injection_margin));
        if (pos.status == ProviderStatus::flagged && healthy) {
            pos.status = ProviderStatus::active;
            pos.flag_deadline.reset();
            pos.last_injection_request = Native();
        }
        return e;
    }

    // Voluntary close. A position whose debt exceeds its whole backing is
    // routed through liquidation instead; otherwise the provider takes back
    // their pool-share native plus whatever collateral the risky debt does
    // not consume. Any early-exit penalty is applied by the caller.
    WithdrawOutcome withdraw(uint64_t id, PoolState& pool, LiquidityBuffer& buffer,
                             uint64_t block) {
        ProviderPosition& pos = open_position(id);
        if (pos.status == ProviderStatus::burn_pending)
            throw std::invalid_argument("cannot withdraw while a burn claim is assigned");
        PositionValuation v = value_position(pos, pool);
        WithdrawOutcome out;
        if (v.remaining.mantissa() < 0) {
            out.liquidated = true;
            out.closure = close_position(pos, pool, buffer, block, "withdrawal");
            out.refund = out.closure.refund;
            return out;
        }
        remove_from_pool(pos, v, pool);
        pool.supply.burned_total += v.current_intertoken;
        if (v.risky_intertoken.mantissa() > 0) {
            buffer.settle_burn(v.risky_intertoken, v.risky_native);
            pool.supply.burned_total += v.risky_intertoken;
        }
        pos.status = ProviderStatus::exited;
        pos.collateral = Native();
        out.refund = v.current_native + v.remaining;
        return out;
    }

    // A settled burn claim: the obligation shrinks and collateral is
    // released in proportion to the obligation just served.
    Native serve_claim(uint64_t id, Intertoken claim) {
        ProviderPosition& pos = open_position(id);
        if (claim.mantissa() <= 0 || claim > pos.outstanding())
            throw std::invalid_argument("claim exceeds the outstanding obligation");
        Native release = Native::from_mantissa(detail::muldiv(
            pos.collateral.mantissa(), claim.mantissa(), pos.outstanding().mantissa()));
        pos.collateral -= release;
        pos.served += claim;
        if (pos.outstanding().mantissa() == 0 && pos.status != ProviderStatus::liquidated)
            pos.status = ProviderStatus::completed;
        return release;
    }

    // A defaulted burn assignment: the slash settles the obligation, so it
    // shrinks like a served claim but releases nothing.
    void absorb_claim(uint64_t id, Intertoken claim) {
        ProviderPosition& pos = open_position(id);
        if (claim.mantissa() <= 0 || claim > pos.outstanding())
            throw std::invalid_argument("claim exceeds the outstanding obligation");
        pos.served += claim;
        if (pos.outstanding().mantissa() == 0) pos.status = ProviderStatus::completed;
    }

    // Collateral seized after a failed burn assignment; capped by what the
    // position holds.
    Native slash_collateral(uint64_t id, Native want) {
        ProviderPosition& pos = open_position(id);
        Native got = amount_min(want, pos.collateral);
        pos.collateral -= got;
        return got;
    }

    void set_status(uint64_t id, ProviderStatus status) { open_position(id).status = status; }

    // Coin holders eligible for buffer payouts: every open position.
    std::vector<std::pair<uint64_t, PoolCoins>> payable_holders() const {
        std::vector<std::pair<uint64_t, PoolCoins>> out;
        for (const auto& [id, pos] : positions_)
            if (pos.open()) out.emplace_back(id, pos.coins);
        return out;
    }

    // Sum of all open collateral, for conservation checks.
    Native collateral_total() const {
        Native total;
        for (const auto& [id, pos] : positions_)
            if (pos.open()) total += pos.collateral;
        return total;
    }

  private:
    ProviderPosition& open_position(uint64_t id) {
        auto it = positions_.find(id);
        if (it == positions_.end() || !it->second.open())
            throw std::invalid_argument("no open position for provider " + std::to_string(id));
        return it->second;
    }

    void remove_from_pool(ProviderPosition& pos, const PositionValuation& v, PoolState& pool) {
        pool.intertoken_inventory -= v.current_intertoken;
        pool.native_inventory -= v.current_native;
        total_coins_ -= pos.coins;
        pos.coins = PoolCoins();
    }

    // Forced close: the whole backing (pool-share native plus collateral)
    // covers the risky debt first; the provider keeps any excess. The
    // pool-share intertokens burn directly; the risky debt goes to the
    // buffer together with the forfeited native.
    RiskEvent close_position(ProviderPosition& pos, PoolState& pool, LiquidityBuffer& buffer,
                             uint64_t block, const std::string& reason) {
        PositionValuation v = value_position(pos, pool);
        remove_from_pool(pos, v, pool);
        pool.supply.burned_total += v.current_intertoken;

        Native backing = v.current_native + pos.collateral;
        Native forfeit = amount_min(v.risky_native, backing);
        Native refund = backing - forfeit;
        if (v.risky_intertoken.mantissa() > 0) {
            buffer.settle_burn(v.risky_intertoken, forfeit);
            pool.supply.burned_total += v.risky_intertoken;
        }

        pos.status = ProviderStatus::liquidated;
        pos.collateral = Native();
        pos.flag_deadline.reset();
        pos.last_injection_request = Native();

        RiskEvent e;
        e.kind = RiskEvent::Kind::liquidated;
        e.provider_id = pos.id;
        e.block = block;
        e.refund = refund;
        e.forfeit = forfeit;
        e.own_burned = v.current_intertoken;
        e.risky_burned = v.risky_intertoken;
        e.reason = reason;
        return e;
    }

    RiskParams params_;
    std::map<uint64_t, ProviderPosition> positions_;
    PoolCoins total_coins_;
};

}  // namespace interpool
