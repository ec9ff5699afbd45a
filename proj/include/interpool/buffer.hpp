#pragma once

// Protocol-owned liquidity buffer. Swap fees accrue here; the buffer retires
// intertokens left behind by liquidated providers (carrying any shortfall as
// burn debt), pays the booster reward, distributes the native stack to
// providers every payout epoch, steers the fee collection side toward
// whichever stack is thin, and deploys two-sided liquidity into the pool when
// the ratio turns volatile.
//
// Accrued intertokens are consumed in priority order: burn debt first, then
// outstanding booster reward, then the stack. Native accruals only stack.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "interpool/amm.hpp"
#include "interpool/amount.hpp"

namespace interpool {

struct BufferParams {
    Ratio booster_rate = Ratio::from_string("0.001");  // share of executed native volume
    int payout_interval = 16;                          // blocks between provider payouts
    int volatility_window = 16;                        // ratio observations kept
    double volatility_threshold = 0.001;               // variance of ln(ratio)
    Ratio deploy_fraction = Ratio::from_string("0.5"); // stack share deployable at once
    Native native_floor = Native::from_int(1);
    Intertoken intertoken_floor = Intertoken::from_int(1);

    void validate() const {
        if (payout_interval < 1) throw std::invalid_argument("payout_interval must be >= 1");
        if (volatility_window < 2) throw std::invalid_argument("volatility_window must be >= 2");
        if (volatility_threshold < 0)
            throw std::invalid_argument("volatility_threshold must be non-negative");
        if (booster_rate.mantissa() < 0 || booster_rate.mantissa() > kScale)
            throw std::invalid_argument("booster_rate out of range");
        if (deploy_fraction.mantissa() < 0 || deploy_fraction.mantissa() > kScale)
            throw std::invalid_argument("deploy_fraction out of range");
    }
};

// How an intertoken accrual was consumed.
struct AccrualSplit {
    Intertoken to_debt;
    Intertoken to_booster;
    Intertoken to_stack;
};

struct BurnSettlement {
    Intertoken burned_from_stack;
    Intertoken added_debt;
};

struct BoosterPayment {
    Intertoken paid;
    Intertoken still_owed;
};

struct ProviderPayout {
    uint64_t provider_id = 0;
    Native amount;
};

struct Deployment {
    Native native_added;
    Intertoken intertoken_added;
    double variance = 0.0;
};

namespace detail_buffer {

inline uint128 gcd_u128(uint128 a, uint128 b) {
    while (b != 0) {
        uint128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

}  // namespace detail_buffer

class LiquidityBuffer {
  public:
    explicit LiquidityBuffer(BufferParams params = {}) : params_(params) { params_.validate(); }

    const BufferParams& params() const { return params_; }
    Native native_stack() const { return native_stack_; }
    Intertoken intertoken_stack() const { return intertoken_stack_; }
    Intertoken burn_debt() const { return burn_debt_; }
    Intertoken booster_owed() const { return booster_owed_; }
    FeeMethod fee_method() const { return fee_method_; }

    // Intertoken income: repay burn debt, then the booster, then stack the
    // rest. The booster slice is returned to the caller for crediting; debt
    // repayments retire tokens that were already counted as burned.
    AccrualSplit accrue_intertoken(Intertoken amount) {
        if (amount.mantissa() < 0) throw std::invalid_argument("negative accrual");
        AccrualSplit split;
        split.to_debt = amount_min(amount, burn_debt_);
        burn_debt_ -= split.to_debt;
        amount -= split.to_debt;
        if (burn_debt_.is_zero()) {
            split.to_booster = amount_min(amount, booster_owed_);
            booster_owed_ -= split.to_booster;
            amount -= split.to_booster;
        }
        split.to_stack = amount;
        intertoken_stack_ += amount;
        return split;
    }

    void accrue_native(Native amount) {
        if (amount.mantissa() < 0) throw std::invalid_argument("negative accrual");
        native_stack_ += amount;
    }

    // Retire intertokens a closed provider position left in circulation. The
    // stack covers what it can; the rest becomes burn debt. The provider's
    // forfeited collateral compensates the buffer in native coin.
    BurnSettlement settle_burn(Intertoken risky, Native forfeit) {
        if (risky.mantissa() < 0 || forfeit.mantissa() < 0)
            throw std::invalid_argument("negative burn settlement");
        BurnSettlement out;
        out.burned_from_stack = amount_min(risky, intertoken_stack_);
        intertoken_stack_ -= out.burned_from_stack;
        out.added_debt = risky - out.burned_from_stack;
        burn_debt_ += out.added_debt;
        native_stack_ += forfeit;
        return out;
    }

    // Owe the booster its share of the block's executed native volume,
    // converted at the current pool ratio, and pay what the stack covers.
    // Payment is deferred entirely while burn debt is outstanding.
    BoosterPayment pay_booster(Native executed_volume, Ratio pool_r) {
        if (executed_volume.mantissa() < 0) throw std::invalid_argument("negative volume");
        booster_owed_ += to_intertoken(mul(executed_volume, params_.booster_rate), pool_r);
        BoosterPayment out;
        if (burn_debt_.is_zero()) {
            out.paid = amount_min(booster_owed_, intertoken_stack_);
            intertoken_stack_ -= out.paid;
            booster_owed_ -= out.paid;
        }
        out.still_owed = booster_owed_;
        return out;
    }

    bool payout_due(uint64_t block) const {
        return block > 0 && block % uint64_t(params_.payout_interval) == 0;
    }

    // Distribute the whole native stack pro-rata by held interpool coins,
    // exact to the last mantissa tick (largest-remainder rounding, earlier
    // holders win ties).
    std::vector<ProviderPayout> pay_providers(
        const std::vector<std::pair<uint64_t, PoolCoins>>& holders) {
        std::vector<ProviderPayout> payouts;
        const int128 stack = native_stack_.mantissa();
        uint128 total = 0;
        for (const auto& [id, coins] : holders) {
            if (coins.mantissa() < 0) throw std::invalid_argument("negative coin balance");
            total += uint128(coins.mantissa());
        }
        if (stack <= 0 || total == 0) return payouts;

        struct Cut {
            size_t pos;
            uint128 base;
            uint128 rem;
        };
        std::vector<Cut> cuts;
        uint128 paid = 0;
        for (size_t i = 0; i < holders.size(); ++i) {
            detail::U256 rem;
            detail::U256 q = detail::divmod_u256(
                detail::mul_u128(uint128(stack), uint128(holders[i].second.mantissa())),
                detail::U256::from(total), &rem);
            cuts.push_back({i, q.lo, rem.lo});
            paid += q.lo;
        }
        uint128 leftover = uint128(stack) - paid;
        std::vector<size_t> order(cuts.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&](size_t a, size_t b) { return cuts[a].rem > cuts[b].rem; });
        for (size_t i = 0; leftover > 0 && i < order.size(); ++i) {
            ++cuts[order[i]].base;
            --leftover;
        }
        for (const auto& cut : cuts) {
            if (cut.base == 0) continue;
            payouts.push_back(
                {holders[cut.pos].first, Native::from_mantissa(int128(cut.base))});
        }
        native_stack_ = Native();
        return payouts;
    }

    // Collect fees on the side whose stack is under its floor; intertokens
    // take priority because burn obligations can only be met in intertokens.
    FeeMethod update_fee_method() {
        if (intertoken_stack_ < params_.intertoken_floor ||
            burn_debt_.mantissa() > 0) {
            fee_method_ = FeeMethod::intertoken;
        } else if (native_stack_ < params_.native_floor) {
            fee_method_ = FeeMethod::native;
        }
        return fee_method_;
    }

    void observe_ratio(Ratio r) {
        if (r.mantissa() <= 0) return;
        window_.push_back(std::log(r.to_double()));
        while (window_.size() > size_t(params_.volatility_window)) window_.pop_front();
    }

    double ratio_variance() const {
        if (window_.size() < 2) return 0.0;
        double mean = 0.0;
        for (double x : window_) mean += x;
        mean /= double(window_.size());
        double var = 0.0;
        for (double x : window_) var += (x - mean) * (x - mean);
        return var / double(window_.size());
    }

    // When the observed ratio variance crosses the threshold, add two-sided
    // liquidity at the pool's exact ratio: with inventories g*(n', i') in
    // lowest terms, deploy k*(n', i') for the largest k the deployable stack
    // share allows. No coins are minted; the deposit deepens the pool for
    // every holder.
    std::optional<Deployment> deploy_on_volatility(PoolState& pool) {
        double var = ratio_variance();
        if (window_.size() < size_t(params_.volatility_window) ||
            var < params_.volatility_threshold)
            return std::nullopt;
        if (!pool.has_liquidity()) return std::nullopt;

        const uint128 n_m = uint128(pool.native_inventory.mantissa());
        const uint128 i_m = uint128(pool.intertoken_inventory.mantissa());
        const uint128 g = detail_buffer::gcd_u128(n_m, i_m);
        const uint128 n_unit = n_m / g, i_unit = i_m / g;
        const uint128 cap_n = uint128(mul(native_stack_, params_.deploy_fraction).mantissa());
        const uint128 cap_i = uint128(mul(intertoken_stack_, params_.deploy_fraction).mantissa());
        const uint128 k = std::min(cap_n / n_unit, cap_i / i_unit);
        if (k == 0) return std::nullopt;

        Deployment d;
        d.native_added = Native::from_mantissa(int128(k * n_unit));
        d.intertoken_added = Intertoken::from_mantissa(int128(k * i_unit));
        d.variance = var;
        native_stack_ -= d.native_added;
        intertoken_stack_ -= d.intertoken_added;
        pool.native_inventory += d.native_added;
        pool.intertoken_inventory += d.intertoken_added;
        window_.clear();  // rearm after acting
        return d;
    }

    // Drain up to `want` from the native stack (slash shortfalls).
    Native draw_native(Native want) {
        if (want.mantissa() < 0) throw std::invalid_argument("negative draw");
        Native got = amount_min(want, native_stack_);
        native_stack_ -= got;
        return got;
    }

  private:
    BufferParams params_;
    Native native_stack_;
    Intertoken intertoken_stack_;
    Intertoken burn_debt_;
    Intertoken booster_owed_;
    FeeMethod fee_method_ = FeeMethod::intertoken;
    std::deque<double> window_;
};

}  // namespace interpool
