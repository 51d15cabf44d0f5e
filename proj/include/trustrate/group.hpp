#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace trustrate::group {

// Fixed domain-separation label registry. Every protocol use of a hash goes
// through one of these labels.
namespace domains {
inline constexpr std::string_view urs_tag   = "urs/tag";
inline constexpr std::string_view urs_fs    = "urs/fs";
inline constexpr std::string_view dlogeq_fs = "dlogeq/fs";
inline constexpr std::string_view vrf       = "vrf";
inline constexpr std::string_view merkle_leaf = "merkle/leaf";
inline constexpr std::string_view merkle_node = "merkle/node";
inline constexpr std::string_view txgroup   = "txgroup";
inline constexpr std::string_view blind_fdh = "blindsig/fdh";
}  // namespace domains

using Bytes = std::vector<std::uint8_t>;
using Bytes32 = std::array<std::uint8_t, 32>;

/// Scalar in Z_q for the prime-order ristretto255 group. Canonical 32-byte
/// little-endian encoding, value < q.
class Scalar {
 public:
  Scalar();  // zero

  static Scalar zero();
  static Scalar one();
  static Scalar from_u64(std::uint64_t v);
  /// Uniform scalar from 64 bytes (reduction mod q).
  static Scalar reduce_from_64(std::span<const std::uint8_t> wide);
  static Scalar random();

  /// Rejects non-canonical encodings.
  static std::optional<Scalar> deserialize(std::span<const std::uint8_t> in);
  const Bytes32& serialize() const { return repr_; }

  Scalar add(const Scalar& o) const;
  Scalar sub(const Scalar& o) const;
  Scalar mul(const Scalar& o) const;
  Scalar negate() const;
  bool is_zero() const;

  bool operator==(const Scalar& o) const { return repr_ == o.repr_; }

 private:
  Bytes32 repr_{};
};

/// Element of the ristretto255 prime-order group, stored as its canonical
/// 32-byte encoding. Encodings round-trip bit-exactly.
class Element {
 public:
  Element();  // identity

  static Element identity();
  static Element base_point();

  /// Rejects encodings that are not valid ristretto255 points.
  static std::optional<Element> deserialize(std::span<const std::uint8_t> in);
  const Bytes32& serialize() const { return repr_; }

  Element add(const Element& o) const;
  Element sub(const Element& o) const;
  bool is_identity() const;

  bool operator==(const Element& o) const { return repr_ == o.repr_; }
  bool operator!=(const Element& o) const { return repr_ != o.repr_; }

 private:
  Bytes32 repr_{};
};

struct HashDomain {
  std::string label;
};

/// SHA-512 based hash-to-group (Elligator-style map via ristretto255
/// from_hash). Deterministic; outputs have unknown dlog relative to any
/// fixed base.
Element hash_to_group(const HashDomain& domain, std::span<const std::uint8_t> data);

/// SHA-512 reduced mod q.
Scalar hash_to_scalar(const HashDomain& domain, std::span<const std::uint8_t> data);

/// SHA-256 of domain-framed data; used for VRF scores, Merkle digests and
/// transaction-group sharding.
Bytes32 hash32(const HashDomain& domain, std::span<const std::uint8_t> data);

Element scalar_exp(const Element& base, const Scalar& e);

/// Product of base^exp over all pairs. Equals the naive per-pair product.
Element multi_exp(std::span<const std::pair<Element, Scalar>> pairs);

/// Deterministic hash-chain RNG; used wherever the protocol needs seeded,
/// reproducible randomness (batch randomizers, simulations).
class SeededRng {
 public:
  explicit SeededRng(std::span<const std::uint8_t> seed);
  explicit SeededRng(std::uint64_t seed);

  void fill(std::span<std::uint8_t> out);
  std::uint64_t next_u64();
  /// Uniform in [0, bound); bound > 0.
  std::uint64_t next_below(std::uint64_t bound);
  double next_unit();  // [0, 1)
  Scalar next_scalar();
  /// Derive an independent stream keyed by a label.
  SeededRng fork(std::string_view label);

 private:
  std::array<std::uint8_t, 64> state_{};
  std::array<std::uint8_t, 64> buf_{};
  std::size_t pos_ = sizeof(buf_);
  std::uint64_t counter_ = 0;
  void refill();
};

Bytes concat(std::initializer_list<std::span<const std::uint8_t>> parts);
inline std::span<const std::uint8_t> as_span(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

}  // namespace trustrate::group
