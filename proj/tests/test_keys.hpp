#pragma once

#include <keyauth/crypto.hpp>

#include <deque>

namespace keyauth::test {

/// RSA generation is slow; tests share a few pairs across the binary.
/// A deque, so references stay valid as pairs are added.
inline const SharingKeyPair& rsa_pair(std::size_t index)
{
    static std::deque<SharingKeyPair> pairs;
    while (pairs.size() <= index)
        pairs.push_back(generate_sharing_keypair(system_entropy()));
    return pairs[index];
}

class FailingEntropy final : public EntropySource
{
  public:
    bool fill(std::span<std::uint8_t>) override { return false; }
};

inline Bytes to_bytes(const std::array<std::uint8_t, 32>& a)
{
    return Bytes(a.begin(), a.end());
}

} // namespace keyauth::test
