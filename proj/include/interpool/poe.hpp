#pragma once

// Proof-of-efficiency batch ordering. The first prefix_length() transactions
// of an ordered batch carry, in their leading and trailing hash bits, the
// header hash of the alien finality block and the booster's public key; the
// optimizer searches the orderings that satisfy those bit constraints for the
// one with the best (miner gas, executed volume) score.
//
// Bit layout, with b = bits_per_tx per side and m = |target_hashes|:
// for prefix slot i and side-local bit j, the global stream index is
// g = i * b + j. The leading side must equal bit (g / m) of
// target_hashes[g mod m]; the trailing side must equal bit (g / m) of the
// booster key. With m = 1 this is the one-bit-per-side forging schema; with
// m = 2 (catch-up) stream lane 0 carries the older missed hash.

#include <algorithm>
#include <cstdint>
#include <future>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "interpool/amm.hpp"
#include "interpool/hash.hpp"
#include "interpool/tx.hpp"

namespace interpool {
namespace poe {

struct PoeParams {
    int hash_bits = 256;
    int bits_per_tx = 1;                  // per side
    std::vector<Hash256> target_hashes;   // 1 normally, 2 in catch-up mode
    std::optional<Hash256> booster_pubkey;  // disabled -> no trailing-bit locks
    size_t min_batch = 256;

    int prefix_length() const {
        if (target_hashes.empty()) return 0;
        const int m = int(target_hashes.size());
        if (hash_bits < 0 || hash_bits > 256) throw std::invalid_argument("hash_bits out of range");
        if (bits_per_tx < 1) throw std::invalid_argument("bits_per_tx must be >= 1");
        if (bits_per_tx % m != 0)
            throw std::invalid_argument("bits_per_tx must be a multiple of the target count");
        if ((hash_bits * m) % bits_per_tx != 0)
            throw std::invalid_argument("hash_bits not divisible by per-target bits per tx");
        return hash_bits * m / bits_per_tx;
    }
};

struct SearchOptions {
    uint64_t seed = 0;
    int move_budget = 2000;   // accepted-or-rejected local moves per restart
    int restarts = 2;
    int threads = 1;
};

// (miner gas revenue, executed native volume), compared lexicographically.
struct Score {
    Native miner_score;
    Native volume_score;

    auto operator<=>(const Score&) const = default;
};

struct OptimizedBatch {
    std::vector<MainnetTx> ordered_txs;
    Score score;
    std::vector<std::vector<int>> forged_hash_bits;  // one bit vector per target
    std::vector<int> booster_key_bits;
};

struct infeasible_error : std::runtime_error {
    size_t slot;
    explicit infeasible_error(size_t s)
        : std::runtime_error("no transaction can fill forging slot " + std::to_string(s)),
          slot(s) {}
};

namespace detail_poe {

inline uint64_t splitmix(uint64_t& s) {
    s += 0x9e3779b97f4a7c15ULL;
    uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Packed (leading bits, trailing bits) pattern; trailing part is zero when
// key forging is off.
inline uint32_t tx_bit_class(const Hash256& h, const PoeParams& p) {
    uint32_t cls = 0;
    for (int j = 0; j < p.bits_per_tx; ++j) cls = cls << 1 | uint32_t(h.bit(size_t(j)));
    if (p.booster_pubkey) {
        for (int j = 0; j < p.bits_per_tx; ++j)
            cls = cls << 1 | uint32_t(h.bit(size_t(256 - p.bits_per_tx + j)));
    }
    return cls;
}

inline uint32_t slot_bit_class(size_t slot, const PoeParams& p) {
    const int m = int(p.target_hashes.size());
    uint32_t cls = 0;
    for (int j = 0; j < p.bits_per_tx; ++j) {
        size_t g = slot * size_t(p.bits_per_tx) + size_t(j);
        cls = cls << 1 | uint32_t(p.target_hashes[g % size_t(m)].bit(g / size_t(m)));
    }
    if (p.booster_pubkey) {
        for (int j = 0; j < p.bits_per_tx; ++j) {
            size_t g = slot * size_t(p.bits_per_tx) + size_t(j);
            cls = cls << 1 | uint32_t(p.booster_pubkey->bit(g / size_t(m)));
        }
    }
    return cls;
}

}  // namespace detail_poe

// True when every forging slot's bit pattern matches the transaction placed
// in it.
inline bool ordering_is_feasible(const std::vector<MainnetTx>& ordered, const PoeParams& p) {
    const size_t prefix = size_t(p.prefix_length());
    if (ordered.size() < prefix || ordered.size() < p.min_batch) return false;
    for (size_t i = 0; i < prefix; ++i)
        if (detail_poe::tx_bit_class(ordered[i].tx_hash, p) != detail_poe::slot_bit_class(i, p))
            return false;
    return true;
}

// Replays the ordering against a copy of the pool. Exchange transactions
// execute only when the pre-trade ratio sits inside their window; liquidity
// deposits execute when the pool volume threshold is met. Executed
// transactions contribute gas_limit * gas_price to the miner score and their
// native-equivalent volume to the volume score; skipped transactions
// contribute nothing. Fees never touch the curve so they are ignored here.
inline Score score_ordering(const std::vector<MainnetTx>& ordered, const PoolState& snapshot) {
    PoolState pool = snapshot;
    Score s;
    for (const auto& tx : ordered) {
        if (tx.is_exchange()) {
            const auto& e = tx.exchange();
            auto r = execute_swap(pool, e, FeeMethod::native);
            if (!r.executed) continue;
            s.miner_score += tx.gas_fee();
            if (e.direction == ExchangeDirection::buy_intertoken)
                s.volume_score += Native::from_mantissa(e.volume_in);
            else
                s.volume_score += to_native(Intertoken::from_mantissa(e.volume_in), r.pre_ratio);
        } else {
            const auto& dep = tx.liquidity().deposit;
            Ratio r;
            if (pool.has_liquidity()) {
                if (pool.native_inventory < pool.min_volume_threshold) continue;
                r = pool_ratio(pool);
            } else if (pool.bootstrap_ratio && pool.min_volume_threshold.is_zero()) {
                r = *pool.bootstrap_ratio;
            } else {
                continue;
            }
            Native half = Native::from_mantissa(dep.mantissa() / 2);
            pool.intertoken_inventory += to_intertoken(half, r);
            pool.native_inventory += half;
            s.miner_score += tx.gas_fee();
            s.volume_score += dep;
        }
    }
    return s;
}

struct ForgedBits {
    std::vector<std::vector<int>> target_bits;  // per target, hash_bits long
    std::vector<int> key_bits;
};

// Reassembles the forged bit streams from an ordered batch.
inline ForgedBits reconstruct_forged(const std::vector<MainnetTx>& ordered, const PoeParams& p) {
    const size_t prefix = size_t(p.prefix_length());
    if (ordered.size() < prefix)
        throw std::invalid_argument("batch shorter than the forging prefix");
    const size_t m = p.target_hashes.size();
    ForgedBits out;
    out.target_bits.assign(m, std::vector<int>(size_t(p.hash_bits), 0));
    if (p.booster_pubkey) out.key_bits.assign(size_t(p.hash_bits), 0);
    for (size_t i = 0; i < prefix; ++i) {
        for (int j = 0; j < p.bits_per_tx; ++j) {
            size_t g = i * size_t(p.bits_per_tx) + size_t(j);
            out.target_bits[g % m][g / m] = ordered[i].tx_hash.bit(size_t(j));
            if (p.booster_pubkey)
                out.key_bits[g / m] = ordered[i].tx_hash.bit(size_t(256 - p.bits_per_tx + j));
        }
    }
    return out;
}

inline std::vector<int> hash_prefix_bits(const Hash256& h, int nbits) {
    std::vector<int> bits(static_cast<size_t>(nbits));
    for (int b = 0; b < nbits; ++b) bits[size_t(b)] = h.bit(size_t(b));
    return bits;
}

// Bits -> Hash256, remaining bits zero. Only meaningful for full-width
// forging (hash_bits == 256).
inline Hash256 bits_to_hash(const std::vector<int>& bits) {
    Hash256 h;
    for (size_t b = 0; b < bits.size() && b < 256; ++b) h.set_bit(b, bits[b]);
    return h;
}

// Highest-gas-fee-first ordering; ties broken by tx hash for determinism.
inline std::vector<MainnetTx> gas_descending(std::vector<MainnetTx> txs) {
    std::stable_sort(txs.begin(), txs.end(), [](const MainnetTx& a, const MainnetTx& b) {
        if (a.gas_fee() != b.gas_fee()) return a.gas_fee() > b.gas_fee();
        return a.tx_hash < b.tx_hash;
    });
    return txs;
}

// Keeps the highest-gas-price copy of each (sender, nonce) pair.
inline std::vector<MainnetTx> dedupe_mempool(const std::vector<MainnetTx>& mempool) {
    std::map<std::pair<uint64_t, uint64_t>, size_t> best;
    for (size_t i = 0; i < mempool.size(); ++i) {
        auto key = std::make_pair(mempool[i].sender, mempool[i].nonce);
        auto it = best.find(key);
        if (it == best.end() || mempool[i].gas_price > mempool[it->second].gas_price)
            best[key] = i;
    }
    std::vector<MainnetTx> out;
    out.reserve(best.size());
    std::vector<size_t> keep;
    for (auto& [_, idx] : best) keep.push_back(idx);
    std::sort(keep.begin(), keep.end());
    for (size_t idx : keep) out.push_back(mempool[idx]);
    return out;
}

namespace detail_poe {

struct Candidate {
    Score score;
    std::vector<size_t> order;  // indexes into the mempool

    // Higher score wins; among equals the lexicographically smaller index
    // sequence wins, which makes parallel reduction order-independent.
    bool better_than(const Candidate& other) const {
        if (score != other.score) return score > other.score;
        return order < other.order;
    }
};

struct SearchContext {
    const std::vector<MainnetTx>* mempool;
    const PoolState* snapshot;
    const PoeParams* params;
    std::vector<uint32_t> tx_class;
    std::vector<uint32_t> slot_class;
};

inline Score score_indices(const SearchContext& ctx, const std::vector<size_t>& order) {
    std::vector<MainnetTx> seq;
    seq.reserve(order.size());
    for (size_t idx : order) seq.push_back((*ctx.mempool)[idx]);
    return score_ordering(seq, *ctx.snapshot);
}

// Greedy slot filling: per class, richest gas fees go into the forging
// prefix first; leftovers follow in gas-descending order.
inline std::vector<size_t> greedy_order(const SearchContext& ctx, uint64_t* shuffle_seed) {
    const auto& mempool = *ctx.mempool;
    std::map<uint32_t, std::vector<size_t>> by_class;
    std::vector<size_t> all(mempool.size());
    std::iota(all.begin(), all.end(), size_t(0));
    auto gas_pref = [&](size_t a, size_t b) {
        Native fa = mempool[a].gas_fee(), fb = mempool[b].gas_fee();
        if (fa != fb) return fa > fb;
        return mempool[a].tx_hash < mempool[b].tx_hash;
    };
    std::sort(all.begin(), all.end(), gas_pref);
    for (size_t idx : all) by_class[ctx.tx_class[idx]].push_back(idx);

    if (shuffle_seed) {
        // mild perturbation for restarts: swap random neighbours inside a class
        for (auto& [_, bucket] : by_class) {
            if (bucket.size() < 2) continue;
            for (size_t k = 0; k + 1 < bucket.size(); ++k) {
                if (splitmix(*shuffle_seed) % 3 == 0) std::swap(bucket[k], bucket[k + 1]);
            }
        }
    }

    std::vector<size_t> order;
    order.reserve(mempool.size());
    std::map<uint32_t, size_t> cursor;
    for (uint32_t cls : ctx.slot_class) {
        auto& bucket = by_class[cls];
        size_t& cur = cursor[cls];
        if (cur >= bucket.size()) throw infeasible_error(order.size());
        order.push_back(bucket[cur++]);
    }
    std::vector<char> used(mempool.size(), 0);
    for (size_t idx : order) used[idx] = 1;
    for (size_t idx : all)
        if (!used[idx]) order.push_back(idx);
    return order;
}

// Feasibility-preserving hill climb: swaps inside a bit class (prefix with
// prefix or prefix with suffix) and free swaps within the suffix.
inline Candidate hill_climb(const SearchContext& ctx, std::vector<size_t> order, uint64_t seed,
                            int move_budget) {
    const size_t n = order.size();
    const size_t prefix = ctx.slot_class.size();
    Candidate best{score_indices(ctx, order), order};
    if (n < 2) return best;
    for (int move = 0; move < move_budget; ++move) {
        size_t a = splitmix(seed) % n;
        size_t b = splitmix(seed) % n;
        if (a == b) continue;
        bool a_in = a < prefix, b_in = b < prefix;
        if ((a_in || b_in) && ctx.tx_class[order[a]] != ctx.tx_class[order[b]])
            continue;  // would break a locked slot
        std::swap(order[a], order[b]);
        Candidate cand{score_indices(ctx, order), order};
        if (cand.better_than(best)) {
            best = std::move(cand);
        } else {
            std::swap(order[a], order[b]);
        }
    }
    return best;
}

inline Candidate search_one(const SearchContext& ctx, uint64_t seed, int move_budget,
                            bool perturb) {
    uint64_t s = seed;
    std::vector<size_t> start = greedy_order(ctx, perturb ? &s : nullptr);
    return hill_climb(ctx, std::move(start), seed ^ 0xa5a5a5a5a5a5a5a5ULL, move_budget);
}

}  // namespace detail_poe

// Orders the whole mempool so the forging prefix spells out the target bit
// slices, maximizing (miner gas, volume). Exact for batches of up to eight
// transactions, heuristic above that. Deterministic for a given seed,
// independent of thread count: candidate results are reduced by
// (score, permutation key).
inline OptimizedBatch brute_force_optimize(const std::vector<MainnetTx>& mempool,
                                           const PoolState& snapshot, const PoeParams& params);

inline OptimizedBatch optimize_batch(const std::vector<MainnetTx>& mempool,
                                     const PoolState& snapshot, const PoeParams& params,
                                     const SearchOptions& opts = {}) {
    const size_t prefix = size_t(params.prefix_length());
    if (mempool.size() < prefix || mempool.size() < params.min_batch)
        throw std::invalid_argument("mempool smaller than the required batch");

    // Small batches are solved exactly; the heuristic search is for mempools
    // where enumeration is out of reach.
    if (mempool.size() <= 8) return brute_force_optimize(mempool, snapshot, params);

    detail_poe::SearchContext ctx;
    ctx.mempool = &mempool;
    ctx.snapshot = &snapshot;
    ctx.params = &params;
    ctx.tx_class.reserve(mempool.size());
    for (const auto& tx : mempool)
        ctx.tx_class.push_back(detail_poe::tx_bit_class(tx.tx_hash, params));
    ctx.slot_class.reserve(prefix);
    for (size_t i = 0; i < prefix; ++i)
        ctx.slot_class.push_back(detail_poe::slot_bit_class(i, params));

    // Fail fast naming the first slot whose class pool runs dry.
    {
        std::map<uint32_t, long> avail;
        for (uint32_t c : ctx.tx_class) ++avail[c];
        for (size_t i = 0; i < prefix; ++i) {
            if (--avail[ctx.slot_class[i]] < 0) throw infeasible_error(i);
        }
    }

    std::vector<detail_poe::Candidate> candidates;

    // The plain gas-descending ordering is kept when it happens to satisfy
    // the bit constraints, so the optimizer never scores below it.
    {
        std::vector<size_t> order(mempool.size());
        std::iota(order.begin(), order.end(), size_t(0));
        std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
            Native fa = mempool[a].gas_fee(), fb = mempool[b].gas_fee();
            if (fa != fb) return fa > fb;
            return mempool[a].tx_hash < mempool[b].tx_hash;
        });
        bool fits = true;
        for (size_t i = 0; i < prefix && fits; ++i)
            fits = ctx.tx_class[order[i]] == ctx.slot_class[i];
        if (fits)
            candidates.push_back({detail_poe::score_indices(ctx, order), std::move(order)});
    }

    const int restarts = std::max(1, opts.restarts);
    auto run_restart = [&](int r) {
        uint64_t seed = opts.seed;
        for (int k = 0; k <= r; ++k) seed = detail_poe::splitmix(seed);
        return detail_poe::search_one(ctx, seed, opts.move_budget, r > 0);
    };

    if (opts.threads > 1) {
        std::vector<std::future<detail_poe::Candidate>> futs;
        for (int r = 0; r < restarts; ++r)
            futs.push_back(std::async(std::launch::async, run_restart, r));
        for (auto& f : futs) candidates.push_back(f.get());
    } else {
        for (int r = 0; r < restarts; ++r) candidates.push_back(run_restart(r));
    }

    const detail_poe::Candidate* best = &candidates[0];
    for (const auto& c : candidates)
        if (c.better_than(*best)) best = &c;

    OptimizedBatch out;
    out.ordered_txs.reserve(mempool.size());
    for (size_t idx : best->order) out.ordered_txs.push_back(mempool[idx]);
    out.score = best->score;
    auto forged = reconstruct_forged(out.ordered_txs, params);
    out.forged_hash_bits = std::move(forged.target_bits);
    out.booster_key_bits = std::move(forged.key_bits);
    for (size_t t = 0; t < params.target_hashes.size(); ++t) {
        if (out.forged_hash_bits[t] !=
            hash_prefix_bits(params.target_hashes[t], params.hash_bits))
            throw std::logic_error("optimizer produced a non-forging ordering");
    }
    return out;
}

// Exhaustive reference: scores every feasible permutation, ties broken by the
// smallest permutation index under the input order. n <= 10.
inline OptimizedBatch brute_force_optimize(const std::vector<MainnetTx>& mempool,
                                           const PoolState& snapshot, const PoeParams& params) {
    if (mempool.size() > 10)
        throw std::invalid_argument("brute force capped at 10 transactions");
    const size_t prefix = size_t(params.prefix_length());
    if (mempool.size() < prefix || mempool.size() < params.min_batch)
        throw std::invalid_argument("mempool smaller than the required batch");

    std::vector<size_t> perm(mempool.size());
    std::iota(perm.begin(), perm.end(), size_t(0));

    bool found = false;
    Score best_score;
    std::vector<size_t> best_perm;
    std::vector<MainnetTx> seq(mempool.size());
    do {
        bool ok = true;
        for (size_t i = 0; i < prefix && ok; ++i)
            ok = detail_poe::tx_bit_class(mempool[perm[i]].tx_hash, params) ==
                 detail_poe::slot_bit_class(i, params);
        if (!ok) continue;
        for (size_t i = 0; i < perm.size(); ++i) seq[i] = mempool[perm[i]];
        Score s = score_ordering(seq, snapshot);
        if (!found || s > best_score) {  // strict: first (smallest) permutation wins ties
            found = true;
            best_score = s;
            best_perm = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));

    if (!found) {
        std::map<uint32_t, long> avail;
        for (const auto& tx : mempool) ++avail[detail_poe::tx_bit_class(tx.tx_hash, params)];
        for (size_t i = 0; i < prefix; ++i)
            if (--avail[detail_poe::slot_bit_class(i, params)] < 0) throw infeasible_error(i);
        throw infeasible_error(0);
    }

    OptimizedBatch out;
    for (size_t idx : best_perm) out.ordered_txs.push_back(mempool[idx]);
    out.score = best_score;
    auto forged = reconstruct_forged(out.ordered_txs, params);
    out.forged_hash_bits = std::move(forged.target_bits);
    out.booster_key_bits = std::move(forged.key_bits);
    return out;
}

}  // namespace poe
}  // namespace interpool
