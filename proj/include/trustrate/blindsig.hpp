#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "trustrate/group.hpp"

namespace trustrate::blindsig {

using group::Bytes;

struct RsaPublicKey {
  mpz_class n;
  unsigned long e = 65537;
  std::size_t bits = 2048;

  std::size_t modulus_bytes() const { return bits / 8; }
};

struct RsaSignerKey {
  RsaPublicKey pub;
  mpz_class d;
};

/// RSA keygen; bits must be 2048, 3072 or 4096. Deterministic given the seed.
RsaSignerKey keygen(std::size_t bits, std::uint64_t seed);

/// Full-domain hash of M into Z_n (MGF1-style counter expansion of SHA-256,
/// reduced mod n, never zero).
mpz_class fdh(const RsaPublicKey& pk, std::span<const std::uint8_t> m);

struct BlindingSession {
  Bytes message;      // M, a URS public key encoding
  mpz_class r;        // blinding factor, coprime to n
  mpz_class blinded;  // M' = H(M) * r^e mod n
};

BlindingSession blind(const RsaPublicKey& pk, std::span<const std::uint8_t> m,
                      group::SeededRng& rng);

mpz_class sign_blinded(const RsaSignerKey& sk, const mpz_class& blinded);

mpz_class unblind(const RsaPublicKey& pk, const mpz_class& s_blinded,
                  const mpz_class& r);

bool verify(const RsaPublicKey& pk, std::span<const std::uint8_t> m,
            const mpz_class& s);

/// Big-endian fixed-width encodings for wire payloads.
Bytes encode_mpz(const mpz_class& v, std::size_t width);
mpz_class decode_mpz(std::span<const std::uint8_t> in);

/// One signing service per admin key; refuses to sign the same blinded
/// message twice. Sessions are serialized by construction.
class SigningService {
 public:
  explicit SigningService(RsaSignerKey key) : key_(std::move(key)) {}

  const RsaPublicKey& public_key() const { return key_.pub; }
  /// nullopt when the blinded message was already signed.
  std::optional<mpz_class> sign(const mpz_class& blinded);
  std::size_t sessions_completed() const { return signed_.size(); }

 private:
  RsaSignerKey key_;
  std::set<mpz_class> signed_;
};

/// role-id (4 bytes, little-endian) || URS pk (32 bytes) || S (modulus bytes).
struct Certificate {
  std::uint32_t role_id = 0;
  group::Bytes32 urs_pk{};
  mpz_class signature;

  Bytes encode(std::size_t modulus_bytes) const;
  static std::optional<Certificate> decode(std::span<const std::uint8_t> in,
                                           std::size_t modulus_bytes);
};

bool verify_certificate(const RsaPublicKey& role_key, const Certificate& cert);

struct CeremonyUser {
  std::uint32_t role_id = 0;
  group::Bytes32 urs_pk{};
};

/// Runs the registration ceremony: every user blinds their URS pk, the
/// per-role service signs it once, the user unblinds. Network cost per
/// exchange is 3 modulus-length values (pk transfer, blinded message,
/// blinded signature).
struct CeremonyResult {
  std::vector<Certificate> certificates;
  std::uint64_t admin_egress_bytes = 0;  // 2 * modulus_bytes per user
};

CeremonyResult registration_ceremony(std::vector<SigningService>& role_services,
                                     std::span<const CeremonyUser> users,
                                     group::SeededRng& rng);

/// Per-exchange wire payload in bytes (3 modulus-length transfers).
inline std::size_t exchange_payload_bytes(std::size_t bits) {
  return 3 * (bits / 8);
}

}  // namespace trustrate::blindsig
