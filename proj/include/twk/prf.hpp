#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace twk {

/// Keyed pseudo-random function family. Stateless: every output is a pure
/// function of (key, index tuple), so evaluation order and thread count can
/// never change results. Backed by SipHash-2-4 over the little-endian
/// encoding of the index tuple.
class Prf {
 public:
  explicit Prf(const std::array<std::uint8_t, 32>& key);

  /// Uniform 64-bit output for the given index tuple.
  std::uint64_t value(std::span<const std::uint64_t> tag) const;
  std::uint64_t value(std::initializer_list<std::uint64_t> tag) const {
    return value(std::span<const std::uint64_t>(tag.begin(), tag.size()));
  }

  /// Uniform draw from {0..n-1}, unbiased via rejection sampling. The
  /// rejection counter is folded into the tag, keeping the result a pure
  /// function of (key, tag).
  std::uint64_t below(std::uint64_t n, std::span<const std::uint64_t> tag) const;
  std::uint64_t below(std::uint64_t n, std::initializer_list<std::uint64_t> tag) const {
    return below(n, std::span<const std::uint64_t>(tag.begin(), tag.size()));
  }

  /// Uniform real strictly inside (0,1), clamped 2^-53 away from the
  /// endpoints so that Phi^-1 stays finite.
  double unitOpen(std::span<const std::uint64_t> tag) const;
  double unitOpen(std::initializer_list<std::uint64_t> tag) const {
    return unitOpen(std::span<const std::uint64_t>(tag.begin(), tag.size()));
  }

 private:
  std::array<std::uint8_t, 16> key_{};
};

/// Master watermark secret plus deterministic sub-key derivation by purpose
/// tag. Sub-keys are derived with keyed BLAKE2b, so the same master and tag
/// always yield the same sub-key and distinct tags yield independent ones.
class WatermarkKey {
 public:
  WatermarkKey() = default;
  explicit WatermarkKey(const std::array<std::uint8_t, 32>& master);

  /// Parses 64 hex characters. Throws std::invalid_argument otherwise.
  static WatermarkKey fromHex(std::string_view hex);
  /// Fresh key from OS entropy. The only non-deterministic entry point.
  static WatermarkKey random();

  std::string toHex() const;
  const std::array<std::uint8_t, 32>& master() const { return master_; }

  Prf subKey(std::string_view purpose) const;

 private:
  std::array<std::uint8_t, 32> master_{};
};

/// Deterministic bijection on {0..domain_size-1}: a Fisher-Yates shuffle
/// whose swap indices come from the PRF stream at the given tag.
std::vector<std::uint32_t> keyed_permutation(const Prf& prf, std::size_t domain_size,
                                             std::span<const std::uint64_t> tag);
std::vector<std::uint32_t> keyed_permutation(const Prf& prf, std::size_t domain_size,
                                             std::initializer_list<std::uint64_t> tag);

std::vector<std::uint32_t> inverse_permutation(std::span<const std::uint32_t> perm);

}  // namespace twk
