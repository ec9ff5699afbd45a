#pragma once

// Binary merkle tree over 32-byte leaves. A level with an odd node count
// duplicates its last node as its own sibling; a single leaf is its own root.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "interpool/hash.hpp"

namespace interpool {

// Which side the sibling hash sits on when folding upward.
enum class Side : uint8_t { left, right };

struct MerkleStep {
    Hash256 sibling;
    Side side = Side::right;
};

inline Hash256 merkle_parent(const Hash256& left, const Hash256& right) {
    return hash256_concat(std::span<const uint8_t>(left.bytes.data(), 32),
                          std::span<const uint8_t>(right.bytes.data(), 32));
}

inline Hash256 build_merkle_root(std::span<const Hash256> leaves) {
    if (leaves.empty()) throw std::invalid_argument("merkle tree needs at least one leaf");
    std::vector<Hash256> level(leaves.begin(), leaves.end());
    while (level.size() > 1) {
        std::vector<Hash256> next;
        next.reserve((level.size() + 1) / 2);
        for (size_t i = 0; i < level.size(); i += 2) {
            const Hash256& l = level[i];
            const Hash256& r = i + 1 < level.size() ? level[i + 1] : level[i];
            next.push_back(merkle_parent(l, r));
        }
        level = std::move(next);
    }
    return level[0];
}

inline std::vector<MerkleStep> merkle_path(std::span<const Hash256> leaves, size_t index) {
    if (index >= leaves.size()) throw std::out_of_range("merkle leaf index");
    std::vector<MerkleStep> path;
    std::vector<Hash256> level(leaves.begin(), leaves.end());
    size_t pos = index;
    while (level.size() > 1) {
        size_t sib = pos ^ 1;
        if (sib >= level.size()) sib = pos;  // odd node paired with itself
        path.push_back(MerkleStep{level[sib], pos % 2 == 0 ? Side::right : Side::left});
        std::vector<Hash256> next;
        next.reserve((level.size() + 1) / 2);
        for (size_t i = 0; i < level.size(); i += 2) {
            const Hash256& l = level[i];
            const Hash256& r = i + 1 < level.size() ? level[i + 1] : level[i];
            next.push_back(merkle_parent(l, r));
        }
        level = std::move(next);
        pos /= 2;
    }
    return path;
}

inline Hash256 fold_merkle_path(const Hash256& leaf, std::span<const MerkleStep> path) {
    Hash256 h = leaf;
    for (const auto& step : path)
        h = step.side == Side::right ? merkle_parent(h, step.sibling)
                                     : merkle_parent(step.sibling, h);
    return h;
}

}  // namespace interpool
