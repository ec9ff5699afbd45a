#pragma once

// Transaction types for both chains. Mainnet transactions are the raw
// material of forged batches; their hash over the canonical serialization is
// what carries the locked leading/trailing bits. Alien transactions are plain
// signed transfers that end up under SPV proofs.

#include <cstdint>
#include <stdexcept>
#include <variant>

#include "interpool/amount.hpp"
#include "interpool/hash.hpp"
#include "interpool/keys.hpp"
#include "interpool/serial.hpp"

namespace interpool {

enum class ExchangeDirection : uint8_t { buy_intertoken, sell_intertoken };

struct ExchangeOrder {
    ExchangeDirection direction = ExchangeDirection::buy_intertoken;
    // Denominated in the inbound coin: native when buying intertoken,
    // intertoken when selling it.
    int128 volume_in = 0;
    Ratio ratio_min;
    Ratio ratio_max;
};

struct LiquidityOrder {
    Native deposit;
};

struct MainnetTx {
    uint64_t sender = 0;
    uint64_t nonce = 0;
    Ratio gas_price;     // native per gas unit
    GasAmount gas_limit;
    std::variant<ExchangeOrder, LiquidityOrder> order;
    Hash256 tx_hash;     // over the canonical serialization of the fields above

    bool is_exchange() const { return std::holds_alternative<ExchangeOrder>(order); }
    const ExchangeOrder& exchange() const { return std::get<ExchangeOrder>(order); }
    const LiquidityOrder& liquidity() const { return std::get<LiquidityOrder>(order); }

    Native gas_fee() const { return fee_value(gas_limit, gas_price); }

    void serialize(ByteWriter& w) const {
        w.put_u64(sender);
        w.put_u64(nonce);
        w.put_ratio(gas_price);
        w.put_amount(gas_limit);
        if (is_exchange()) {
            const auto& e = exchange();
            w.put_u8(0);
            w.put_u8(uint8_t(e.direction));
            w.put_i128(e.volume_in);
            w.put_ratio(e.ratio_min);
            w.put_ratio(e.ratio_max);
        } else {
            w.put_u8(1);
            w.put_amount(liquidity().deposit);
        }
    }

    void rehash() {
        ByteWriter w;
        serialize(w);
        tx_hash = hash256(w.bytes());
    }
};

inline MainnetTx make_exchange_tx(uint64_t sender, uint64_t nonce, Ratio gas_price,
                                  GasAmount gas_limit, ExchangeDirection direction,
                                  int128 volume_in, Ratio ratio_min, Ratio ratio_max) {
    if (volume_in <= 0) throw std::invalid_argument("exchange volume must be positive");
    if (ratio_min > ratio_max) throw std::invalid_argument("ratio window is inverted");
    if (gas_limit.mantissa() <= 0) throw std::invalid_argument("gas limit must be positive");
    MainnetTx tx{sender, nonce, gas_price, gas_limit,
                 ExchangeOrder{direction, volume_in, ratio_min, ratio_max}, {}};
    tx.rehash();
    return tx;
}

inline MainnetTx make_liquidity_tx(uint64_t sender, uint64_t nonce, Ratio gas_price,
                                   GasAmount gas_limit, Native deposit) {
    if (deposit.mantissa() <= 0) throw std::invalid_argument("deposit must be positive");
    if (gas_limit.mantissa() <= 0) throw std::invalid_argument("gas limit must be positive");
    MainnetTx tx{sender, nonce, gas_price, gas_limit, LiquidityOrder{deposit}, {}};
    tx.rehash();
    return tx;
}

struct AlienTx {
    Hash256 from_pubkey;
    Hash256 to_pubkey;
    AlienCoin amount;
    uint64_t nonce = 0;
    Hash256 signature;

    std::vector<uint8_t> serialize_unsigned() const {
        ByteWriter w;
        w.put_hash(from_pubkey);
        w.put_hash(to_pubkey);
        w.put_amount(amount);
        w.put_u64(nonce);
        return w.take();
    }

    std::vector<uint8_t> serialize() const {
        ByteWriter w;
        w.put_hash(from_pubkey);
        w.put_hash(to_pubkey);
        w.put_amount(amount);
        w.put_u64(nonce);
        w.put_hash(signature);
        return w.take();
    }

    Hash256 leaf_hash() const { return hash256(serialize()); }
};

inline AlienTx make_alien_transfer(const KeyPair& from, const Hash256& to, AlienCoin amount,
                                   uint64_t nonce) {
    if (amount.mantissa() <= 0) throw std::invalid_argument("transfer amount must be positive");
    AlienTx tx{from.pubkey, to, amount, nonce, Hash256{}};
    auto payload = tx.serialize_unsigned();
    tx.signature = sign_message(from.secret, payload);
    return tx;
}

}  // namespace interpool
