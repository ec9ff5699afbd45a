#include <catch2/catch_amalgamated.hpp>

#include "interpool/chain.hpp"
#include "interpool/merkle.hpp"

using namespace interpool;

namespace {

std::vector<Hash256> sample_leaves(size_t n) {
    std::vector<Hash256> leaves;
    for (size_t i = 0; i < n; ++i) leaves.push_back(hash256("leaf " + std::to_string(i)));
    return leaves;
}

}  // namespace

TEST_CASE("three leaf root duplicates the odd node") {
    auto leaves = sample_leaves(3);
    Hash256 expected =
        merkle_parent(merkle_parent(leaves[0], leaves[1]), merkle_parent(leaves[2], leaves[2]));
    CHECK(build_merkle_root(leaves) == expected);
}

TEST_CASE("single leaf is its own root") {
    auto leaves = sample_leaves(1);
    CHECK(build_merkle_root(leaves) == leaves[0]);
    CHECK(merkle_path(leaves, 0).empty());
    CHECK_THROWS_AS(build_merkle_root(std::vector<Hash256>{}), std::invalid_argument);
}

TEST_CASE("paths fold back to the root for every size and index") {
    for (size_t n = 1; n <= 9; ++n) {
        auto leaves = sample_leaves(n);
        auto root = build_merkle_root(leaves);
        for (size_t i = 0; i < n; ++i) {
            auto path = merkle_path(leaves, i);
            CHECK(fold_merkle_path(leaves[i], path) == root);
        }
    }
    // depth is ceil(log2(n)) with duplication
    CHECK(merkle_path(sample_leaves(3), 2).size() == 2);
    CHECK(merkle_path(sample_leaves(8), 0).size() == 3);
}

TEST_CASE("alien chain mines, validates and finalizes") {
    KeyRegistry reg;
    auto a = keypair_from_seed(10);
    auto b = keypair_from_seed(11);
    reg.register_key(a);
    reg.register_key(b);

    AlienChain chain(&reg);

    // empty block: single zero leaf, root is that leaf
    const auto genesis = chain.mine_block({});
    CHECK(genesis.height == 0);
    CHECK(genesis.merkle_root == Hash256::zero());
    CHECK(genesis.prev_hash == Hash256::zero());
    CHECK(genesis.header_hash ==
          alien_header_hash(Hash256::zero(), Hash256::zero(), 0));

    auto t1 = make_alien_transfer(a, b.pubkey, AlienCoin::from_int(5), 1);
    auto t2 = make_alien_transfer(b, a.pubkey, AlienCoin::from_int(2), 1);
    std::vector<TxRejection> rejected;
    const auto blk1 = chain.mine_block({t1, t2}, &rejected);
    CHECK(rejected.empty());
    CHECK(blk1.txs.size() == 2);
    CHECK(blk1.prev_hash == genesis.header_hash);
    CHECK(blk1.header_hash == alien_header_hash(blk1.prev_hash, blk1.merkle_root, 1));

    // replayed nonce and forged signature are rejected, gaps are fine
    auto t3 = make_alien_transfer(a, b.pubkey, AlienCoin::from_int(1), 1);
    auto t4 = make_alien_transfer(a, b.pubkey, AlienCoin::from_int(1), 7);
    auto t5 = make_alien_transfer(b, a.pubkey, AlienCoin::from_int(1), 2);
    t5.signature = t5.signature.with_flipped_bit(0);
    rejected.clear();
    const auto blk2 = chain.mine_block({t3, t4, t5}, &rejected);
    CHECK(blk2.txs.size() == 1);
    CHECK(blk2.txs[0].nonce == 7);
    REQUIRE(rejected.size() == 2);
    CHECK(rejected[0].reason == "stale_nonce");
    CHECK(rejected[1].reason == "bad_signature");

    AlienChainParams params{2, 1};
    CHECK(chain.finality_height(params) == 0);
    CHECK(chain.finality_hash(params) == genesis.header_hash);
    CHECK_THROWS_AS(chain.finality_hash(AlienChainParams{6, 1}), not_final_error);
}

TEST_CASE("spv proof construction matches the block") {
    KeyRegistry reg;
    auto a = keypair_from_seed(20);
    auto b = keypair_from_seed(21);
    reg.register_key(a);
    reg.register_key(b);

    AlienChain chain(&reg);
    std::vector<AlienTx> txs;
    for (uint64_t n = 1; n <= 3; ++n)
        txs.push_back(make_alien_transfer(a, b.pubkey, AlienCoin::from_int(int64_t(n)), n));
    const auto blk = chain.mine_block(txs);

    auto proof = make_spv_proof(blk, 2);
    CHECK(proof.block_height == 0);
    CHECK(proof.merkle_root == blk.merkle_root);
    CHECK(proof.prev_hash == blk.prev_hash);
    CHECK(fold_merkle_path(proof.tx.leaf_hash(), proof.path) == blk.merkle_root);
    CHECK_THROWS_AS(make_spv_proof(blk, 3), std::out_of_range);
}
