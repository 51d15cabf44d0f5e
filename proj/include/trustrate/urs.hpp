#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "trustrate/group.hpp"

namespace trustrate::urs {

using group::Bytes;
using group::Bytes32;
using group::Element;
using group::Scalar;

/// Public parameters: two generators with no known dlog relation, both
/// derived by hashing a setup seed into the group.
struct UrsParams {
  Element g;  // bit-commitment base
  Element h;  // randomness base; public keys live on this base

  static UrsParams setup(std::string_view seed);
  Bytes serialize() const;
  static std::optional<UrsParams> deserialize(std::span<const std::uint8_t> in);
  bool operator==(const UrsParams&) const = default;
};

struct UrsKeyPair {
  Scalar sk;
  Element pk;  // pk = h^sk
};

UrsKeyPair keygen(const UrsParams& params, group::SeededRng& rng);
UrsKeyPair keygen(const UrsParams& params);  // system randomness

/// Ordered ring of public keys. Members are kept sorted by encoding byte
/// order with duplicates removed; the proof operates on a copy padded to
/// 2^ceil(log2 N) by repeating the last member. Tags bind the unpadded
/// canonical encoding.
class Ring {
 public:
  static constexpr std::size_t kMinSize = 2;

  /// Sorts, deduplicates and validates. Fails when fewer than two distinct
  /// members remain.
  static std::optional<Ring> create(std::vector<Element> members);

  std::size_t size() const { return members_.size(); }
  std::size_t arity() const { return arity_; }          // n = ceil(log2 N)
  std::size_t padded_size() const { return std::size_t{1} << arity_; }
  const std::vector<Element>& members() const { return members_; }
  const Element& padded_member(std::size_t i) const;
  std::optional<std::size_t> index_of(const Element& pk) const;

  /// Canonical unpadded encoding: sorted 32-byte keys concatenated.
  const Bytes& encoding() const { return encoding_; }
  Bytes32 hash() const;

 private:
  std::vector<Element> members_;
  std::size_t arity_ = 0;
  Bytes encoding_;
};

/// Non-interactive proof that tau and nu share a discrete log over bases g2
/// and g3. The challenge is recomputed from the transcript.
struct DlogEqProof {
  Element m1;
  Element m2;
  Scalar z;
};

DlogEqProof dlogeq_prove(const Scalar& x, const Element& g2, const Element& g3,
                         group::SeededRng& rng);
bool dlogeq_verify(const Element& tau, const Element& nu, const Element& g2,
                   const Element& g3, const DlogEqProof& proof);

/// Signature layout, n = ceil(log2 N):
///   elements (5n+4): nu, c_l[n], c_a[n], c_b[n], c_d[n], e_d[n], tau, m1, m2
///   scalars  (3n+2): f[n], z_a[n], z_b[n], z_d, z (dlog_eq response)
/// The challenge X is recomputed via Fiat-Shamir, giving the wire size
/// 32*(8n+6) bytes.
struct UrsSignature {
  Element nu;  // uniqueness tag, H(PID||R)^sk
  std::vector<Element> c_l, c_a, c_b, c_d;
  std::vector<Element> e_d;  // tag-side correction terms, H(PID||R)^rho_j
  std::vector<Scalar> f, z_a, z_b;
  Scalar z_d;
  Element tau;  // vote tag, H(M||R)^sk
  DlogEqProof pi;

  std::size_t arity() const { return c_l.size(); }
  Bytes serialize() const;
  static std::optional<UrsSignature> deserialize(std::span<const std::uint8_t> in);
};

/// Wire size in bytes for a ring of size n_members.
std::size_t signature_size(std::size_t n_members);

enum class VerifyResult { kAccept, kReject, kMalformed };

struct SignError {
  enum Kind { kSignerNotInRing } kind;
};

std::optional<UrsSignature> sign(const UrsParams& params,
                                 std::span<const std::uint8_t> poll_id,
                                 std::span<const std::uint8_t> vote,
                                 const Ring& ring, const Scalar& sk,
                                 group::SeededRng& rng);

VerifyResult verify(const UrsParams& params,
                    std::span<const std::uint8_t> poll_id,
                    std::span<const std::uint8_t> vote, const Ring& ring,
                    const UrsSignature& sig);

/// Uniqueness tag; the ledger keys double-vote detection on this.
inline const Element& tag_of(const UrsSignature& sig) { return sig.nu; }

struct BatchEntry {
  Bytes vote;
  UrsSignature sig;
};

/// Random-linear-combination batch verification over one (poll_id, ring).
/// Returns one verdict per entry, identical to serial verification; on a
/// batch-equation failure every entry is re-verified individually to
/// isolate the offenders. Deterministic given the entries (randomizers come
/// from a transcript-seeded generator).
std::vector<bool> batch_verify(const UrsParams& params,
                               std::span<const std::uint8_t> poll_id,
                               std::span<const BatchEntry> entries,
                               const Ring& ring);

}  // namespace trustrate::urs
