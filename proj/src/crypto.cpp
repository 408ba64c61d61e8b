#include "roboecon/crypto.hpp"

#include <openssl/evp.h>
#include <openssl/hmac.h>

#include <bit>
#include <stdexcept>

namespace roboecon {

std::string_view to_string(AccountKind kind) {
  switch (kind) {
    case AccountKind::Human: return "Human";
    case AccountKind::Robot: return "Robot";
    case AccountKind::Contract: return "Contract";
  }
  return "Human";
}

AccountKind account_kind_from_string(std::string_view name) {
  if (name == "Human") return AccountKind::Human;
  if (name == "Robot") return AccountKind::Robot;
  if (name == "Contract") return AccountKind::Contract;
  throw std::invalid_argument("unknown account kind: " + std::string(name));
}

std::string to_string(const AccountId& id) {
  return std::string(to_string(id.kind)) + ":" + id.label;
}

struct Sha256Stream::Impl {
  EVP_MD_CTX* ctx = nullptr;
  Impl() : ctx(EVP_MD_CTX_new()) {
    if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1)
      throw std::runtime_error("sha256: context init failed");
  }
  ~Impl() { EVP_MD_CTX_free(ctx); }
  Impl(const Impl& other) : ctx(EVP_MD_CTX_new()) {
    if (ctx == nullptr || EVP_MD_CTX_copy_ex(ctx, other.ctx) != 1)
      throw std::runtime_error("sha256: context copy failed");
  }
};

Sha256Stream::Sha256Stream() : impl_(std::make_unique<Impl>()) {}
Sha256Stream::Sha256Stream(const Sha256Stream& other)
    : impl_(std::make_unique<Impl>(*other.impl_)) {}
Sha256Stream& Sha256Stream::operator=(const Sha256Stream& other) {
  if (this != &other) impl_ = std::make_unique<Impl>(*other.impl_);
  return *this;
}
Sha256Stream::Sha256Stream(Sha256Stream&&) noexcept = default;
Sha256Stream& Sha256Stream::operator=(Sha256Stream&&) noexcept = default;
Sha256Stream::~Sha256Stream() = default;

void Sha256Stream::update(std::string_view data) {
  EVP_DigestUpdate(impl_->ctx, data.data(), data.size());
}

Digest Sha256Stream::finish() {
  Digest out{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(impl_->ctx, out.data(), &len);
  return out;
}

Digest sha256(std::string_view data) {
  Sha256Stream s;
  s.update(data);
  return s.finish();
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0x0f]);
  }
  return out;
}

namespace {
int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}
}  // namespace

Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw std::invalid_argument("hex string has odd length");
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int hi = hex_value(hex[2 * i]);
    int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw std::invalid_argument("invalid hex digit");
    out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return out;
}

Digest digest_from_hex(std::string_view hex) {
  auto bytes = from_hex(hex);
  if (bytes.size() != 32) throw std::invalid_argument("digest must be 32 bytes");
  Digest d{};
  std::copy(bytes.begin(), bytes.end(), d.begin());
  return d;
}

int leading_zero_bits(const Digest& digest) {
  int bits = 0;
  for (auto b : digest) {
    if (b == 0) {
      bits += 8;
      continue;
    }
    bits += std::countl_zero(b);
    break;
  }
  return bits;
}

KeyedDigestScheme::KeyedDigestScheme(std::uint64_t registry_seed) : seed_(registry_seed) {}

Digest KeyedDigestScheme::key_for(const AccountId& account) const {
  return sha256("roboecon/key/" + std::to_string(seed_) + "/" + to_string(account));
}

Bytes KeyedDigestScheme::sign(const AccountId& signer, std::string_view message) const {
  auto key = key_for(signer);
  Bytes mac(EVP_MAX_MD_SIZE);
  unsigned int len = 0;
  HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()),
       reinterpret_cast<const unsigned char*>(message.data()), message.size(), mac.data(), &len);
  mac.resize(len);
  return mac;
}

bool KeyedDigestScheme::verify(const AccountId& signer, std::string_view message,
                               std::span<const std::uint8_t> signature) const {
  auto expected = sign(signer, message);
  return expected.size() == signature.size() &&
         std::equal(expected.begin(), expected.end(), signature.begin());
}

}  // namespace roboecon
