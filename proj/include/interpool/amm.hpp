#pragma once

// Constant-product pool over the twin inventories. Fees live outside the
// curve: the inbound leg is grossed up (or the outbound leg skimmed) and the
// fee routed to the liquidity buffer, so the product identity stays exact up
// to one mantissa unit of rounding on the computed leg.

#include <cstdint>
#include <optional>
#include <stdexcept>

#include "interpool/amount.hpp"
#include "interpool/tx.hpp"

namespace interpool {

enum class FeeMethod : uint8_t { native, intertoken };

struct FeePolicy {
    Ratio fee_min = Ratio::from_string("0.0005");
    Ratio fee_max = Ratio::from_string("0.03");
    Ratio rate = Ratio::from_string("0.003");
    Native target_liquidity;

    void validate() const {
        if (rate < fee_min || rate > fee_max)
            throw std::invalid_argument("fee rate outside [fee_min, fee_max]");
    }
};

struct SupplyLedger {
    Intertoken minted_total;
    Intertoken burned_total;
};

struct PoolState {
    Intertoken intertoken_inventory;
    Native native_inventory;
    SupplyLedger supply;
    FeePolicy fee_policy;
    Native min_volume_threshold;
    // Price used by the first join when both inventories are still empty.
    std::optional<Ratio> bootstrap_ratio;

    bool has_liquidity() const {
        return intertoken_inventory.mantissa() > 0 && native_inventory.mantissa() > 0;
    }
};

inline Ratio pool_ratio(const PoolState& pool) {
    if (!pool.has_liquidity()) throw std::domain_error("pool ratio undefined: empty inventory");
    return ratio_of(pool.native_inventory, pool.intertoken_inventory);
}

inline PoolCoins pool_product(const PoolState& pool) {
    return coins_of(pool.intertoken_inventory, pool.native_inventory);
}

struct insufficient_liquidity : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SwapQuote {
    ExchangeDirection direction = ExchangeDirection::buy_intertoken;
    int128 volume_in = 0;    // net curve input, inbound coin
    int128 volume_out = 0;   // paid to the trader, outbound coin
    int128 fee = 0;
    Unit fee_unit = Unit::native;
    Intertoken new_intertoken;
    Native new_native;
};

// volume_in is the net amount entering the curve. When the configured fee
// coin matches the inbound leg the trader is charged volume_in * f / (1 - f)
// on top; otherwise the fee is skimmed off the outbound leg.
inline SwapQuote quote_swap(const PoolState& pool, ExchangeDirection direction, int128 volume_in,
                            FeeMethod fee_method) {
    if (volume_in <= 0) throw std::invalid_argument("swap volume must be positive");
    if (!pool.has_liquidity()) throw insufficient_liquidity("pool has no liquidity");

    const int128 i = pool.intertoken_inventory.mantissa();
    const int128 n = pool.native_inventory.mantissa();
    const int128 f = pool.fee_policy.rate.mantissa();

    SwapQuote q;
    q.direction = direction;
    q.volume_in = volume_in;

    const bool inbound_is_native = direction == ExchangeDirection::buy_intertoken;
    const Unit inbound_unit = inbound_is_native ? Unit::native : Unit::intertoken;
    q.fee_unit = fee_method == FeeMethod::native ? Unit::native : Unit::intertoken;

    int128 new_in_side, new_out_side, out;
    if (inbound_is_native) {
        new_in_side = detail::checked_add(n, volume_in);
        new_out_side = detail::muldiv_ceil(i, n, new_in_side);
        out = i - new_out_side;
        q.new_native = Native::from_mantissa(new_in_side);
        q.new_intertoken = Intertoken::from_mantissa(new_out_side);
    } else {
        new_in_side = detail::checked_add(i, volume_in);
        new_out_side = detail::muldiv_ceil(i, n, new_in_side);
        out = n - new_out_side;
        q.new_intertoken = Intertoken::from_mantissa(new_in_side);
        q.new_native = Native::from_mantissa(new_out_side);
    }
    if (out < 0) throw insufficient_liquidity("swap would drain the pool");

    if (q.fee_unit == inbound_unit) {
        // gross-up: trader pays volume_in / (1 - f), fee is the difference
        q.fee = detail::muldiv(volume_in, f, kScale - f);
        q.volume_out = out;
    } else {
        q.fee = detail::muldiv(out, f, kScale);
        q.volume_out = out - q.fee;
    }
    return q;
}

enum class SkipReason : uint8_t {
    none,
    ratio_out_of_range,
    insufficient_liquidity,
    below_threshold,
    insufficient_funds,
};

inline const char* skip_reason_name(SkipReason r) {
    switch (r) {
        case SkipReason::none: return "none";
        case SkipReason::ratio_out_of_range: return "ratio_out_of_range";
        case SkipReason::insufficient_liquidity: return "insufficient_liquidity";
        case SkipReason::below_threshold: return "below_threshold";
        case SkipReason::insufficient_funds: return "insufficient_funds";
    }
    return "?";
}

struct SwapResult {
    bool executed = false;
    SkipReason reason = SkipReason::none;
    Ratio pre_ratio;
    SwapQuote quote;
};

// Ratio bounds are checked against the pre-trade ratio only; the fill itself
// is the exact curve solution. Skips are results, not errors.
inline SwapResult execute_swap(PoolState& pool, const ExchangeOrder& order, FeeMethod fee_method) {
    SwapResult r;
    if (!pool.has_liquidity()) {
        r.reason = SkipReason::insufficient_liquidity;
        return r;
    }
    r.pre_ratio = pool_ratio(pool);
    if (r.pre_ratio < order.ratio_min || r.pre_ratio > order.ratio_max) {
        r.reason = SkipReason::ratio_out_of_range;
        return r;
    }
    try {
        r.quote = quote_swap(pool, order.direction, order.volume_in, fee_method);
    } catch (const insufficient_liquidity&) {
        r.reason = SkipReason::insufficient_liquidity;
        return r;
    }
    pool.intertoken_inventory = r.quote.new_intertoken;
    pool.native_inventory = r.quote.new_native;
    r.executed = true;
    return r;
}

struct PositionLegs {
    Intertoken intertoken;
    Native native;
};

// Position implied by a constant product C at pool ratio r:
// intertoken = sqrt(C / r), native = sqrt(C * r). Both floor-rounded.
inline PositionLegs position_at_ratio(PoolCoins coins, Ratio r) {
    if (coins.mantissa() < 0) throw std::domain_error("negative position product");
    if (r.mantissa() <= 0) throw std::domain_error("ratio must be positive");
    const uint128 c = uint128(coins.mantissa());
    const uint128 rm = uint128(r.mantissa());
    const uint128 scale = uint128(kScale);

    // intertoken mantissa = floor(sqrt(c * scale^2 / rm))
    detail::U256 num = detail::mul_u128(c, scale * scale);
    detail::U256 quotient = detail::divmod_u256(num, detail::U256::from(rm), nullptr);
    uint128 i_m = detail::isqrt_u256(quotient);

    // native mantissa = floor(sqrt(c * rm))
    uint128 n_m = detail::isqrt_u256(detail::mul_u128(c, rm));

    if (i_m > detail::kMaxMantissaMag || n_m > detail::kMaxMantissaMag)
        throw std::overflow_error("amount overflow");
    return PositionLegs{Intertoken::from_mantissa(int128(i_m)), Native::from_mantissa(int128(n_m))};
}

// 0 when the post state is the exactly rounded curve solution for the pre
// state, otherwise the mantissa error on the computed leg.
inline uint128 curve_error_ulps(const PoolState& pre, const PoolState& post) {
    const int128 i0 = pre.intertoken_inventory.mantissa();
    const int128 n0 = pre.native_inventory.mantissa();
    const int128 i1 = post.intertoken_inventory.mantissa();
    const int128 n1 = post.native_inventory.mantissa();
    int128 expected;
    if (n1 > n0) {
        expected = detail::muldiv_ceil(i0, n0, n1);
        return detail::mag(i1 - expected);
    }
    expected = detail::muldiv_ceil(i0, n0, i1);
    return detail::mag(n1 - expected);
}

}  // namespace interpool
