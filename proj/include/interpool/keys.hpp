#pragma once

// Hash-based stand-in for a signature scheme. pubkey = hash256(secret) and
// sign(secret, msg) = hash256(secret || msg); verification replays the
// signature from a secret registry, so it only works inside the simulation.
// The verifier interface is virtual so a real scheme can slot in.

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>

#include "interpool/hash.hpp"
#include "interpool/serial.hpp"

namespace interpool {

struct SecretKey {
    std::array<uint8_t, 32> bytes{};
};

struct KeyPair {
    Hash256 pubkey;
    SecretKey secret;
};

inline Hash256 pubkey_of(const SecretKey& secret) {
    return hash256(std::span<const uint8_t>(secret.bytes.data(), secret.bytes.size()));
}

inline KeyPair derive_keypair(const SecretKey& secret) {
    return KeyPair{pubkey_of(secret), secret};
}

// Deterministic keys for scenarios and tests.
inline KeyPair keypair_from_seed(uint64_t seed) {
    ByteWriter w;
    w.put_u64(seed);
    Hash256 h = hash256(w.bytes());
    SecretKey s;
    s.bytes = h.bytes;
    return derive_keypair(s);
}

inline Hash256 sign_message(const SecretKey& secret, std::span<const uint8_t> message) {
    detail::Sha256 h;
    h.update(secret.bytes.data(), secret.bytes.size());
    h.update(message.data(), message.size());
    return h.finalize();
}

class SignatureScheme {
  public:
    virtual ~SignatureScheme() = default;
    virtual bool verify(const Hash256& pubkey, std::span<const uint8_t> message,
                        const Hash256& signature) const = 0;
};

class KeyRegistry : public SignatureScheme {
  public:
    void register_key(const KeyPair& kp) {
        if (pubkey_of(kp.secret) != kp.pubkey)
            throw std::invalid_argument("pubkey does not match secret");
        secrets_[kp.pubkey] = kp.secret;
    }

    bool known(const Hash256& pubkey) const { return secrets_.count(pubkey) > 0; }

    bool verify(const Hash256& pubkey, std::span<const uint8_t> message,
                const Hash256& signature) const override {
        auto it = secrets_.find(pubkey);
        if (it == secrets_.end()) return false;
        return sign_message(it->second, message) == signature;
    }

  private:
    std::map<Hash256, SecretKey> secrets_;
};

}  // namespace interpool
