#pragma once

// Light verification of alien-chain payments against forged headers, and the
// two-party cross-chain swap built on it. A swap fixes terms between a
// native-coin buyer (the alien-side payer) and a native-coin seller: the
// seller escrows the native payment, the buyer bonds native collateral, and
// the buyer's alien transfer — proven by an inclusion proof whose
// reconstructed header matches the hash forged into a transaction batch —
// releases the escrow. A missed deadline forfeits the bond to the seller.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>

#include "interpool/chain.hpp"
#include "interpool/hash.hpp"
#include "interpool/merkle.hpp"
#include "interpool/tx.hpp"

namespace interpool {
namespace listrack {

enum class SpvFailure { none, wrong_root, wrong_header };

struct SpvCheck {
    bool ok = false;
    SpvFailure failure = SpvFailure::none;
};

inline const char* spv_failure_name(SpvFailure f) {
    switch (f) {
        case SpvFailure::none: return "none";
        case SpvFailure::wrong_root: return "wrong_root";
        case SpvFailure::wrong_header: return "wrong_header";
    }
    return "?";
}

// The whole trust chain of a light client: the transaction's leaf hash must
// fold up the sibling path to the claimed merkle root, and the header built
// from that root must be the hash that batch ordering forged.
inline SpvCheck verify_spv(const SpvProof& proof, const Hash256& forged_header) {
    SpvCheck out;
    Hash256 folded = fold_merkle_path(proof.tx.leaf_hash(), proof.path);
    if (folded != proof.merkle_root) {
        out.failure = SpvFailure::wrong_root;
        return out;
    }
    Hash256 header = alien_header_hash(proof.prev_hash, proof.merkle_root, proof.block_height);
    if (header != forged_header) {
        out.failure = SpvFailure::wrong_header;
        return out;
    }
    out.ok = true;
    return out;
}

// Minimal native-coin account book for swap demos and tests.
class MainnetLedger {
  public:
    Native balance(uint64_t account) const {
        auto it = balances_.find(account);
        return it == balances_.end() ? Native() : it->second;
    }

    void credit(uint64_t account, Native amount) {
        if (amount.mantissa() < 0) throw std::invalid_argument("negative credit");
        balances_[account] += amount;
    }

    void debit(uint64_t account, Native amount) {
        if (amount.mantissa() < 0) throw std::invalid_argument("negative debit");
        Native& bal = balances_[account];
        if (bal < amount)
            throw std::invalid_argument("account " + std::to_string(account) +
                                        " cannot cover " + amount.to_string());
        bal -= amount;
    }

    Native total() const {
        Native sum;
        for (const auto& [_, bal] : balances_) sum += bal;
        return sum;
    }

  private:
    std::map<uint64_t, Native> balances_;
};

struct SwapTerms {
    uint64_t buyer_account = 0;     // receives native, pays on the alien chain
    uint64_t seller_account = 0;    // pays native
    Hash256 seller_alien_pubkey;    // where the alien payment must arrive
    AlienCoin alien_amount;         // minimum alien payment
    Native native_amount;           // escrowed native payment
    Ratio collateral_rate = Ratio::from_int(1);  // buyer bond, share of native_amount
    uint64_t deadline_block = 0;    // last mainnet block a proof may settle in

    Native collateral() const { return mul(native_amount, collateral_rate); }

    void validate() const {
        if (alien_amount.mantissa() <= 0 || native_amount.mantissa() <= 0)
            throw std::invalid_argument("swap amounts must be positive");
        if (collateral_rate.mantissa() < 0)
            throw std::invalid_argument("collateral rate must be non-negative");
    }
};

enum class SwapState { agreed, locked, completed, failed };

inline const char* swap_state_name(SwapState s) {
    switch (s) {
        case SwapState::agreed: return "agreed";
        case SwapState::locked: return "locked";
        case SwapState::completed: return "completed";
        case SwapState::failed: return "failed";
    }
    return "?";
}

enum class SettleResult {
    completed,
    wrong_state,
    expired,
    wrong_root,
    wrong_header,
    wrong_recipient,
    short_amount,
};

inline const char* settle_result_name(SettleResult r) {
    switch (r) {
        case SettleResult::completed: return "completed";
        case SettleResult::wrong_state: return "wrong_state";
        case SettleResult::expired: return "expired";
        case SettleResult::wrong_root: return "wrong_root";
        case SettleResult::wrong_header: return "wrong_header";
        case SettleResult::wrong_recipient: return "wrong_recipient";
        case SettleResult::short_amount: return "short_amount";
    }
    return "?";
}

class SwapContract {
  public:
    explicit SwapContract(SwapTerms terms) : terms_(terms) { terms_.validate(); }

    const SwapTerms& terms() const { return terms_; }
    SwapState state() const { return state_; }
    Native escrowed() const { return escrow_; }

    // Both parties fund the contract: the seller's payment and the buyer's
    // bond move out of their accounts.
    void lock(MainnetLedger& ledger) {
        if (state_ != SwapState::agreed) throw std::logic_error("swap is not open for locking");
        if (ledger.balance(terms_.seller_account) < terms_.native_amount)
            throw std::invalid_argument("seller cannot fund the swap");
        if (ledger.balance(terms_.buyer_account) < terms_.collateral())
            throw std::invalid_argument("buyer cannot post the bond");
        ledger.debit(terms_.seller_account, terms_.native_amount);
        ledger.debit(terms_.buyer_account, terms_.collateral());
        escrow_ = terms_.native_amount + terms_.collateral();
        state_ = SwapState::locked;
    }

    // A proof of the buyer's alien payment releases the escrow: payment to
    // the buyer, bond back to the buyer. The proof must verify against the
    // forged header for its height, pay the seller's alien key at least the
    // agreed amount, and arrive no later than the deadline block.
    SettleResult settle(const SpvProof& proof, const Hash256& forged_header,
                        MainnetLedger& ledger, uint64_t block) {
        if (state_ != SwapState::locked) return SettleResult::wrong_state;
        if (block > terms_.deadline_block) return SettleResult::expired;
        SpvCheck check = verify_spv(proof, forged_header);
        if (!check.ok)
            return check.failure == SpvFailure::wrong_root ? SettleResult::wrong_root
                                                           : SettleResult::wrong_header;
        if (proof.tx.to_pubkey != terms_.seller_alien_pubkey)
            return SettleResult::wrong_recipient;
        if (proof.tx.amount < terms_.alien_amount) return SettleResult::short_amount;

        ledger.credit(terms_.buyer_account, terms_.native_amount + terms_.collateral());
        escrow_ = Native();
        state_ = SwapState::completed;
        return SettleResult::completed;
    }

    // Past the deadline the bond forfeits to the seller and the payment
    // returns. Settlement always gets the deadline block itself; expiry
    // starts one block later.
    bool expire(MainnetLedger& ledger, uint64_t block) {
        if (state_ != SwapState::locked || block <= terms_.deadline_block) return false;
        ledger.credit(terms_.seller_account, terms_.native_amount + terms_.collateral());
        escrow_ = Native();
        state_ = SwapState::failed;
        return true;
    }

  private:
    SwapTerms terms_;
    SwapState state_ = SwapState::agreed;
    Native escrow_;
};

}  // namespace listrack
}  // namespace interpool
