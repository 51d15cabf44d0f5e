#include "trustrate/group.hpp"

#include <sodium.h>

#include <cstring>
#include <stdexcept>

namespace trustrate::group {

namespace {

void ensure_sodium() {
  static const int rc = sodium_init();
  if (rc < 0) throw std::runtime_error("libsodium initialization failed");
}

// Length-framed domain prefix: len(label) || label || data. Keeps distinct
// labels from colliding on concatenation.
void domain_frame(crypto_hash_sha512_state& st, const HashDomain& domain) {
  const auto len = static_cast<std::uint8_t>(domain.label.size());
  crypto_hash_sha512_update(&st, &len, 1);
  crypto_hash_sha512_update(
      &st, reinterpret_cast<const std::uint8_t*>(domain.label.data()),
      domain.label.size());
}

}  // namespace

Scalar::Scalar() { ensure_sodium(); }

Scalar Scalar::zero() { return Scalar(); }

Scalar Scalar::one() { return from_u64(1); }

Scalar Scalar::from_u64(std::uint64_t v) {
  Scalar s;
  for (int i = 0; i < 8; ++i) s.repr_[i] = static_cast<std::uint8_t>(v >> (8 * i));
  return s;
}

Scalar Scalar::reduce_from_64(std::span<const std::uint8_t> wide) {
  if (wide.size() != 64) throw std::invalid_argument("need 64 bytes");
  Scalar s;
  crypto_core_ristretto255_scalar_reduce(s.repr_.data(), wide.data());
  return s;
}

Scalar Scalar::random() {
  Scalar s;
  crypto_core_ristretto255_scalar_random(s.repr_.data());
  return s;
}

std::optional<Scalar> Scalar::deserialize(std::span<const std::uint8_t> in) {
  if (in.size() != 32) return std::nullopt;
  std::array<std::uint8_t, 64> wide{};
  std::memcpy(wide.data(), in.data(), 32);
  Scalar s;
  crypto_core_ristretto255_scalar_reduce(s.repr_.data(), wide.data());
  // Canonical iff reduction is the identity map.
  if (!std::equal(in.begin(), in.end(), s.repr_.begin())) return std::nullopt;
  return s;
}

Scalar Scalar::add(const Scalar& o) const {
  Scalar r;
  crypto_core_ristretto255_scalar_add(r.repr_.data(), repr_.data(), o.repr_.data());
  return r;
}

Scalar Scalar::sub(const Scalar& o) const {
  Scalar r;
  crypto_core_ristretto255_scalar_sub(r.repr_.data(), repr_.data(), o.repr_.data());
  return r;
}

Scalar Scalar::mul(const Scalar& o) const {
  Scalar r;
  crypto_core_ristretto255_scalar_mul(r.repr_.data(), repr_.data(), o.repr_.data());
  return r;
}

Scalar Scalar::negate() const {
  Scalar r;
  crypto_core_ristretto255_scalar_negate(r.repr_.data(), repr_.data());
  return r;
}

bool Scalar::is_zero() const {
  return sodium_is_zero(repr_.data(), repr_.size()) == 1;
}

Element::Element() { ensure_sodium(); }

Element Element::identity() { return Element(); }

Element Element::base_point() {
  Element e;
  const Scalar one = Scalar::one();
  crypto_scalarmult_ristretto255_base(e.repr_.data(), one.serialize().data());
  return e;
}

std::optional<Element> Element::deserialize(std::span<const std::uint8_t> in) {
  if (in.size() != 32) return std::nullopt;
  Element e;
  std::memcpy(e.repr_.data(), in.data(), 32);
  if (e.is_identity()) return e;
  if (crypto_core_ristretto255_is_valid_point(e.repr_.data()) != 1)
    return std::nullopt;
  return e;
}

Element Element::add(const Element& o) const {
  if (is_identity()) return o;
  if (o.is_identity()) return *this;
  Element r;
  if (crypto_core_ristretto255_add(r.repr_.data(), repr_.data(), o.repr_.data()) != 0)
    throw std::runtime_error("ristretto255 add failed");
  return r;
}

Element Element::sub(const Element& o) const {
  if (o.is_identity()) return *this;
  if (is_identity()) {
    // 0 - P = (-1) * P
    return scalar_exp(o, Scalar::one().negate());
  }
  Element r;
  if (crypto_core_ristretto255_sub(r.repr_.data(), repr_.data(), o.repr_.data()) != 0)
    throw std::runtime_error("ristretto255 sub failed");
  return r;
}

bool Element::is_identity() const {
  return sodium_is_zero(repr_.data(), repr_.size()) == 1;
}

Element hash_to_group(const HashDomain& domain, std::span<const std::uint8_t> data) {
  ensure_sodium();
  crypto_hash_sha512_state st;
  crypto_hash_sha512_init(&st);
  domain_frame(st, domain);
  crypto_hash_sha512_update(&st, data.data(), data.size());
  std::array<std::uint8_t, 64> wide{};
  crypto_hash_sha512_final(&st, wide.data());
  Element e;
  std::array<std::uint8_t, 32> out{};
  crypto_core_ristretto255_from_hash(out.data(), wide.data());
  auto parsed = Element::deserialize(out);
  if (!parsed) throw std::runtime_error("from_hash produced invalid encoding");
  return *parsed;
}

Scalar hash_to_scalar(const HashDomain& domain, std::span<const std::uint8_t> data) {
  ensure_sodium();
  crypto_hash_sha512_state st;
  crypto_hash_sha512_init(&st);
  domain_frame(st, domain);
  crypto_hash_sha512_update(&st, data.data(), data.size());
  std::array<std::uint8_t, 64> wide{};
  crypto_hash_sha512_final(&st, wide.data());
  return Scalar::reduce_from_64(wide);
}

Bytes32 hash32(const HashDomain& domain, std::span<const std::uint8_t> data) {
  ensure_sodium();
  crypto_hash_sha256_state st;
  crypto_hash_sha256_init(&st);
  const auto len = static_cast<std::uint8_t>(domain.label.size());
  crypto_hash_sha256_update(&st, &len, 1);
  crypto_hash_sha256_update(
      &st, reinterpret_cast<const std::uint8_t*>(domain.label.data()),
      domain.label.size());
  crypto_hash_sha256_update(&st, data.data(), data.size());
  Bytes32 out{};
  crypto_hash_sha256_final(&st, out.data());
  return out;
}

Element scalar_exp(const Element& base, const Scalar& e) {
  if (e.is_zero() || base.is_identity()) return Element::identity();
  Element r;
  std::array<std::uint8_t, 32> out{};
  if (crypto_scalarmult_ristretto255(out.data(), e.serialize().data(),
                                     base.serialize().data()) != 0) {
    // Only reachable when the result is the neutral element.
    return Element::identity();
  }
  auto parsed = Element::deserialize(out);
  if (!parsed) throw std::runtime_error("scalarmult produced invalid encoding");
  return *parsed;
}

Element multi_exp(std::span<const std::pair<Element, Scalar>> pairs) {
  Element acc = Element::identity();
  for (const auto& [base, exp] : pairs) acc = acc.add(scalar_exp(base, exp));
  return acc;
}

SeededRng::SeededRng(std::span<const std::uint8_t> seed) {
  ensure_sodium();
  crypto_hash_sha512(state_.data(), seed.data(), seed.size());
}

SeededRng::SeededRng(std::uint64_t seed) {
  ensure_sodium();
  std::array<std::uint8_t, 8> b{};
  for (int i = 0; i < 8; ++i) b[i] = static_cast<std::uint8_t>(seed >> (8 * i));
  crypto_hash_sha512(state_.data(), b.data(), b.size());
}

void SeededRng::refill() {
  crypto_hash_sha512_state st;
  crypto_hash_sha512_init(&st);
  crypto_hash_sha512_update(&st, state_.data(), state_.size());
  std::array<std::uint8_t, 8> ctr{};
  for (int i = 0; i < 8; ++i) ctr[i] = static_cast<std::uint8_t>(counter_ >> (8 * i));
  ++counter_;
  crypto_hash_sha512_update(&st, ctr.data(), ctr.size());
  crypto_hash_sha512_final(&st, buf_.data());
  pos_ = 0;
}

void SeededRng::fill(std::span<std::uint8_t> out) {
  for (auto& b : out) {
    if (pos_ == buf_.size()) refill();
    b = buf_[pos_++];
  }
}

std::uint64_t SeededRng::next_u64() {
  std::array<std::uint8_t, 8> b{};
  fill(b);
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

std::uint64_t SeededRng::next_below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("bound must be positive");
  // Rejection sampling to avoid modulo bias.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t v;
  do {
    v = next_u64();
  } while (v >= limit);
  return v % bound;
}

double SeededRng::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

Scalar SeededRng::next_scalar() {
  std::array<std::uint8_t, 64> wide{};
  fill(wide);
  return Scalar::reduce_from_64(wide);
}

SeededRng SeededRng::fork(std::string_view label) {
  std::vector<std::uint8_t> seed(state_.begin(), state_.end());
  seed.insert(seed.end(), label.begin(), label.end());
  // Advance the parent so successive forks with equal labels differ.
  ++counter_;
  for (int i = 0; i < 8; ++i)
    seed.push_back(static_cast<std::uint8_t>(counter_ >> (8 * i)));
  return SeededRng(std::span<const std::uint8_t>(seed));
}

Bytes concat(std::initializer_list<std::span<const std::uint8_t>> parts) {
  Bytes out;
  std::size_t total = 0;
  for (const auto& p : parts) total += p.size();
  out.reserve(total);
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

}  // namespace trustrate::group
