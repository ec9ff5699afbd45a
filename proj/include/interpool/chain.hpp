#pragma once

// Deterministic single-fork model of the external ("alien") chain: append-only
// blocks, no reorgs, finality is a fixed depth below the tip. The header hash
// of the finality block is the value boosters must forge on mainnet.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "interpool/hash.hpp"
#include "interpool/keys.hpp"
#include "interpool/merkle.hpp"
#include "interpool/serial.hpp"
#include "interpool/tx.hpp"

namespace interpool {

struct AlienChainParams {
    int64_t finality_depth = 6;           // F: tip - F is final
    int64_t blocks_per_mainnet_block = 1;
};

struct AlienBlock {
    int64_t height = 0;
    Hash256 prev_hash;
    Hash256 merkle_root;
    Hash256 header_hash;
    std::vector<AlienTx> txs;
};

inline Hash256 alien_header_hash(const Hash256& prev, const Hash256& root, int64_t height) {
    ByteWriter w;
    w.put_hash(prev);
    w.put_hash(root);
    w.put_i64(height);
    return hash256(w.bytes());
}

struct SpvProof {
    AlienTx tx;
    size_t leaf_index = 0;
    std::vector<MerkleStep> path;
    int64_t block_height = 0;
    Hash256 prev_hash;
    Hash256 merkle_root;
};

struct TxRejection {
    AlienTx tx;
    std::string reason;
};

struct not_final_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class AlienChain {
  public:
    explicit AlienChain(const SignatureScheme* scheme) : scheme_(scheme) {
        if (!scheme) throw std::invalid_argument("alien chain needs a signature scheme");
    }

    // Validates pending transfers, drops invalid ones into `rejected`, and
    // appends one block. An empty block carries a single all-zero leaf.
    AlienBlock mine_block(const std::vector<AlienTx>& pending,
                          std::vector<TxRejection>* rejected = nullptr) {
        AlienBlock block;
        block.height = int64_t(blocks_.size());
        block.prev_hash = blocks_.empty() ? Hash256::zero() : blocks_.back().header_hash;

        for (const auto& tx : pending) {
            auto payload = tx.serialize_unsigned();
            if (!scheme_->verify(tx.from_pubkey, payload, tx.signature)) {
                if (rejected) rejected->push_back({tx, "bad_signature"});
                continue;
            }
            auto it = last_nonce_.find(tx.from_pubkey);
            if (it != last_nonce_.end() && tx.nonce <= it->second) {
                if (rejected) rejected->push_back({tx, "stale_nonce"});
                continue;
            }
            last_nonce_[tx.from_pubkey] = tx.nonce;
            block.txs.push_back(tx);
        }

        block.merkle_root = build_merkle_root(leaves_of(block));
        block.header_hash = alien_header_hash(block.prev_hash, block.merkle_root, block.height);
        blocks_.push_back(std::move(block));
        return blocks_.back();
    }

    int64_t tip_height() const {
        if (blocks_.empty()) throw std::out_of_range("empty chain");
        return blocks_.back().height;
    }
    size_t size() const { return blocks_.size(); }

    const AlienBlock& block_at(int64_t height) const {
        if (height < 0 || size_t(height) >= blocks_.size())
            throw std::out_of_range("no alien block at height " + std::to_string(height));
        return blocks_[size_t(height)];
    }

    int64_t finality_height(const AlienChainParams& params) const {
        int64_t h = tip_height() - params.finality_depth;
        if (h < 0)
            throw not_final_error("chain too short: tip " + std::to_string(tip_height()) +
                                  ", finality depth " + std::to_string(params.finality_depth));
        return h;
    }

    Hash256 finality_hash(const AlienChainParams& params) const {
        return block_at(finality_height(params)).header_hash;
    }

    static std::vector<Hash256> leaves_of(const AlienBlock& block) {
        if (block.txs.empty()) return {Hash256::zero()};
        std::vector<Hash256> leaves;
        leaves.reserve(block.txs.size());
        for (const auto& tx : block.txs) leaves.push_back(tx.leaf_hash());
        return leaves;
    }

  private:
    const SignatureScheme* scheme_;
    std::vector<AlienBlock> blocks_;
    std::map<Hash256, uint64_t> last_nonce_;
};

inline SpvProof make_spv_proof(const AlienBlock& block, size_t leaf_index) {
    if (leaf_index >= block.txs.size()) throw std::out_of_range("no tx at leaf index");
    auto leaves = AlienChain::leaves_of(block);
    return SpvProof{block.txs[leaf_index], leaf_index, merkle_path(leaves, leaf_index),
                    block.height, block.prev_hash, block.merkle_root};
}

}  // namespace interpool
