#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "roboecon/account.hpp"

namespace roboecon {

using Digest = std::array<std::uint8_t, 32>;
using Bytes = std::vector<std::uint8_t>;

Digest sha256(std::string_view data);

std::string to_hex(std::span<const std::uint8_t> bytes);
/// Lowercase or uppercase hex; throws std::invalid_argument on odd length or bad digits.
Bytes from_hex(std::string_view hex);
Digest digest_from_hex(std::string_view hex);

/// Number of leading zero bits, 0..256.
int leading_zero_bits(const Digest& digest);

/// Incremental SHA-256. Copyable so a shared prefix can be hashed once and
/// forked per nonce while mining.
class Sha256Stream {
 public:
  Sha256Stream();
  Sha256Stream(const Sha256Stream& other);
  Sha256Stream& operator=(const Sha256Stream& other);
  Sha256Stream(Sha256Stream&&) noexcept;
  Sha256Stream& operator=(Sha256Stream&&) noexcept;
  ~Sha256Stream();

  void update(std::string_view data);
  Digest finish();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Detached-signature scheme over arbitrary messages. Implementations must be
/// deterministic for a fixed key set so simulation traces are reproducible.
class SignatureScheme {
 public:
  virtual ~SignatureScheme() = default;
  virtual std::string name() const = 0;
  virtual Bytes sign(const AccountId& signer, std::string_view message) const = 0;
  virtual bool verify(const AccountId& signer, std::string_view message,
                      std::span<const std::uint8_t> signature) const = 0;
};

/// HMAC-SHA256 with per-account keys derived from a registry secret. Anyone
/// holding the secret (the simulation, or an offline verifier given the seed)
/// can both sign and verify, which is fine for a test scheme.
class KeyedDigestScheme final : public SignatureScheme {
 public:
  explicit KeyedDigestScheme(std::uint64_t registry_seed);

  std::string name() const override { return "keyed-digest-sha256"; }
  Bytes sign(const AccountId& signer, std::string_view message) const override;
  bool verify(const AccountId& signer, std::string_view message,
              std::span<const std::uint8_t> signature) const override;

  Digest key_for(const AccountId& account) const;

 private:
  std::uint64_t seed_;
};

}  // namespace roboecon
