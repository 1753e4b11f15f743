#include "twk/prf.hpp"

#include <sodium.h>

#include <cstring>
#include <stdexcept>

namespace twk {

namespace {

void ensureSodium() {
  static const int rc = sodium_init();
  if (rc < 0) {
    throw std::runtime_error("libsodium initialization failed");
  }
}

}  // namespace

Prf::Prf(const std::array<std::uint8_t, 32>& key) {
  ensureSodium();
  static_assert(crypto_shorthash_KEYBYTES == 16);
  std::memcpy(key_.data(), key.data(), key_.size());
}

std::uint64_t Prf::value(std::span<const std::uint64_t> tag) const {
  std::uint8_t msg[24 * 8];
  if (tag.size() > 24) {
    throw std::invalid_argument("Prf: tag tuple too long");
  }
  for (std::size_t i = 0; i < tag.size(); ++i) {
    std::uint64_t v = tag[i];
    for (int b = 0; b < 8; ++b) {
      msg[i * 8 + b] = static_cast<std::uint8_t>(v >> (8 * b));
    }
  }
  std::uint8_t out[crypto_shorthash_BYTES];
  crypto_shorthash(out, msg, tag.size() * 8, key_.data());
  std::uint64_t r = 0;
  for (int b = 7; b >= 0; --b) {
    r = (r << 8) | out[b];
  }
  return r;
}

std::uint64_t Prf::below(std::uint64_t n, std::span<const std::uint64_t> tag) const {
  if (n == 0) {
    throw std::invalid_argument("Prf::below: n must be positive");
  }
  if ((n & (n - 1)) == 0) {
    return value(tag) & (n - 1);
  }
  if (tag.size() > 23) {
    throw std::invalid_argument("Prf::below: tag tuple too long");
  }
  // Largest multiple of n representable in 64 bits; values at or above it
  // are rejected to keep the modulus unbiased.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t extended[24];
  std::copy(tag.begin(), tag.end(), extended);
  for (std::uint64_t attempt = 0;; ++attempt) {
    extended[tag.size()] = attempt;
    const std::uint64_t v =
        value(std::span<const std::uint64_t>(extended, tag.size() + 1));
    if (v < limit) {
      return v % n;
    }
  }
}

double Prf::unitOpen(std::span<const std::uint64_t> tag) const {
  const double u = static_cast<double>(value(tag) >> 11) * 0x1.0p-53;
  return (u < 0x1.0p-53) ? 0x1.0p-53 : u;  // u <= 1 - 2^-53 already holds
}

WatermarkKey::WatermarkKey(const std::array<std::uint8_t, 32>& master)
    : master_(master) {}

WatermarkKey WatermarkKey::fromHex(std::string_view hex) {
  ensureSodium();
  if (hex.size() != 64) {
    throw std::invalid_argument("WatermarkKey: expected 64 hex characters");
  }
  std::array<std::uint8_t, 32> out{};
  std::size_t written = 0;
  if (sodium_hex2bin(out.data(), out.size(), hex.data(), hex.size(), nullptr,
                     &written, nullptr) != 0 ||
      written != out.size()) {
    throw std::invalid_argument("WatermarkKey: invalid hex string");
  }
  return WatermarkKey(out);
}

WatermarkKey WatermarkKey::random() {
  ensureSodium();
  std::array<std::uint8_t, 32> out{};
  randombytes_buf(out.data(), out.size());
  return WatermarkKey(out);
}

std::string WatermarkKey::toHex() const {
  char buf[65];
  sodium_bin2hex(buf, sizeof buf, master_.data(), master_.size());
  return std::string(buf, 64);
}

Prf WatermarkKey::subKey(std::string_view purpose) const {
  ensureSodium();
  std::array<std::uint8_t, 32> derived{};
  crypto_generichash(derived.data(), derived.size(),
                     reinterpret_cast<const unsigned char*>(purpose.data()),
                     purpose.size(), master_.data(), master_.size());
  return Prf(derived);
}

std::vector<std::uint32_t> keyed_permutation(const Prf& prf, std::size_t domain_size,
                                             std::span<const std::uint64_t> tag) {
  if (domain_size < 1) {
    throw std::invalid_argument("keyed_permutation: domain_size must be >= 1");
  }
  std::vector<std::uint32_t> perm(domain_size);
  for (std::size_t i = 0; i < domain_size; ++i) {
    perm[i] = static_cast<std::uint32_t>(i);
  }
  std::vector<std::uint64_t> sub(tag.begin(), tag.end());
  sub.push_back(0);
  for (std::size_t i = domain_size - 1; i > 0; --i) {
    sub.back() = i;
    const auto j = static_cast<std::size_t>(prf.below(i + 1, sub));
    std::swap(perm[i], perm[j]);
  }
  return perm;
}

std::vector<std::uint32_t> keyed_permutation(const Prf& prf, std::size_t domain_size,
                                             std::initializer_list<std::uint64_t> tag) {
  return keyed_permutation(prf, domain_size,
                           std::span<const std::uint64_t>(tag.begin(), tag.size()));
}

std::vector<std::uint32_t> inverse_permutation(std::span<const std::uint32_t> perm) {
  std::vector<std::uint32_t> inv(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    inv[perm[i]] = static_cast<std::uint32_t>(i);
  }
  return inv;
}

}  // namespace twk
