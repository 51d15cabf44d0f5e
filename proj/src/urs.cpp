#include "trustrate/urs.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <stdexcept>

namespace trustrate::urs {

namespace {

using group::HashDomain;
using group::SeededRng;

const HashDomain kTagDomain{std::string(group::domains::urs_tag)};
const HashDomain kFsDomain{std::string(group::domains::urs_fs)};
const HashDomain kDlogFsDomain{std::string(group::domains::dlogeq_fs)};

void append_u64(Bytes& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void append_framed(Bytes& out, std::span<const std::uint8_t> data) {
  append_u64(out, data.size());
  out.insert(out.end(), data.begin(), data.end());
}

void append_bytes(Bytes& out, std::span<const std::uint8_t> data) {
  out.insert(out.end(), data.begin(), data.end());
}

std::size_t arity_for(std::size_t n_members) {
  if (n_members < 2) throw std::invalid_argument("ring size must be >= 2");
  return std::bit_width(n_members - 1);
}

Element nu_base(std::span<const std::uint8_t> poll_id, const Ring& ring) {
  Bytes data;
  append_framed(data, poll_id);
  append_bytes(data, ring.encoding());
  return group::hash_to_group(kTagDomain, data);
}

Element tau_base(std::span<const std::uint8_t> poll_id,
                 std::span<const std::uint8_t> vote, const Ring& ring) {
  Bytes data;
  append_framed(data, poll_id);
  append_framed(data, vote);
  append_bytes(data, ring.encoding());
  return group::hash_to_group(kTagDomain, data);
}

// Fiat-Shamir challenge for the one-out-of-many transcript. Binds the poll,
// the vote, the canonical ring, the uniqueness tag and every commitment.
Scalar fs_challenge(std::span<const std::uint8_t> poll_id,
                    std::span<const std::uint8_t> vote, const Ring& ring,
                    const UrsSignature& sig) {
  Bytes data;
  append_framed(data, poll_id);
  append_framed(data, vote);
  const auto rh = ring.hash();
  append_bytes(data, rh);
  append_bytes(data, sig.nu.serialize());
  for (const auto* vec : {&sig.c_l, &sig.c_a, &sig.c_b, &sig.c_d, &sig.e_d})
    for (const auto& e : *vec) append_bytes(data, e.serialize());
  return group::hash_to_scalar(kFsDomain, data);
}

Scalar dlogeq_challenge(const Element& g2, const Element& g3, const Element& tau,
                        const Element& nu, const Element& m1, const Element& m2) {
  Bytes data;
  for (const Element* e : {&g2, &g3, &tau, &nu, &m1, &m2})
    append_bytes(data, e->serialize());
  return group::hash_to_scalar(kDlogFsDomain, data);
}

// Coefficients of p_i(X) = prod_j f_{j, i_j} for every padded ring index i,
// where f_{j,1} = l_j X + a_j and f_{j,0} = (1 - l_j) X - a_j. The signer
// index l is the only i with a degree-n term, and its coefficient is 1.
std::vector<std::vector<Scalar>> membership_polynomials(
    std::size_t padded, std::size_t n, std::size_t signer_index,
    const std::vector<Scalar>& a) {
  std::vector<std::vector<Scalar>> coeffs(padded);
  for (std::size_t i = 0; i < padded; ++i) {
    std::vector<Scalar> poly = {Scalar::one()};  // constant 1
    for (std::size_t j = 0; j < n; ++j) {
      const bool ij = (i >> j) & 1;
      const bool lj = (signer_index >> j) & 1;
      // f_{j, ij} as (c0, c1) with f = c1*X + c0.
      Scalar c1 = (ij == lj) ? Scalar::one() : Scalar::zero();
      Scalar c0 = ij ? a[j] : a[j].negate();
      std::vector<Scalar> next(poly.size() + 1, Scalar::zero());
      for (std::size_t d = 0; d < poly.size(); ++d) {
        next[d] = next[d].add(poly[d].mul(c0));
        next[d + 1] = next[d + 1].add(poly[d].mul(c1));
      }
      poly = std::move(next);
    }
    coeffs[i] = std::move(poly);
  }
  return coeffs;
}

// Evaluate p_i(X) for every padded index from the response scalars.
std::vector<Scalar> membership_evaluations(std::size_t padded, std::size_t n,
                                           const Scalar& x,
                                           const std::vector<Scalar>& f) {
  std::vector<Scalar> f0(n);
  for (std::size_t j = 0; j < n; ++j) f0[j] = x.sub(f[j]);
  std::vector<Scalar> vals(padded, Scalar::one());
  for (std::size_t i = 0; i < padded; ++i)
    for (std::size_t j = 0; j < n; ++j)
      vals[i] = vals[i].mul(((i >> j) & 1) ? f[j] : f0[j]);
  return vals;
}

std::vector<Scalar> challenge_powers(const Scalar& x, std::size_t count) {
  std::vector<Scalar> pow(count);
  Scalar acc = Scalar::one();
  for (std::size_t j = 0; j < count; ++j) {
    pow[j] = acc;
    acc = acc.mul(x);
  }
  return pow;
}

bool shape_ok(const UrsSignature& sig, std::size_t n) {
  return sig.c_l.size() == n && sig.c_a.size() == n && sig.c_b.size() == n &&
         sig.c_d.size() == n && sig.e_d.size() == n && sig.f.size() == n &&
         sig.z_a.size() == n && sig.z_b.size() == n;
}

}  // namespace

UrsParams UrsParams::setup(std::string_view seed) {
  Bytes data;
  append_framed(data, group::as_span(seed));
  data.push_back('g');
  Element g = group::hash_to_group(kTagDomain, data);
  data.back() = 'h';
  Element h = group::hash_to_group(kTagDomain, data);
  return UrsParams{g, h};
}

Bytes UrsParams::serialize() const {
  Bytes out;
  append_bytes(out, g.serialize());
  append_bytes(out, h.serialize());
  return out;
}

std::optional<UrsParams> UrsParams::deserialize(std::span<const std::uint8_t> in) {
  if (in.size() != 64) return std::nullopt;
  auto g = Element::deserialize(in.subspan(0, 32));
  auto h = Element::deserialize(in.subspan(32, 32));
  if (!g || !h) return std::nullopt;
  return UrsParams{*g, *h};
}

UrsKeyPair keygen(const UrsParams& params, SeededRng& rng) {
  Scalar sk = rng.next_scalar();
  while (sk.is_zero()) sk = rng.next_scalar();
  return {sk, group::scalar_exp(params.h, sk)};
}

UrsKeyPair keygen(const UrsParams& params) {
  Scalar sk = Scalar::random();
  while (sk.is_zero()) sk = Scalar::random();
  return {sk, group::scalar_exp(params.h, sk)};
}

std::optional<Ring> Ring::create(std::vector<Element> members) {
  std::sort(members.begin(), members.end(),
            [](const Element& a, const Element& b) {
              return a.serialize() < b.serialize();
            });
  members.erase(std::unique(members.begin(), members.end()), members.end());
  if (members.size() < kMinSize) return std::nullopt;
  Ring r;
  r.members_ = std::move(members);
  r.arity_ = arity_for(r.members_.size());
  r.encoding_.reserve(32 * r.members_.size());
  for (const auto& m : r.members_) append_bytes(r.encoding_, m.serialize());
  return r;
}

const Element& Ring::padded_member(std::size_t i) const {
  return i < members_.size() ? members_[i] : members_.back();
}

std::optional<std::size_t> Ring::index_of(const Element& pk) const {
  auto it = std::lower_bound(members_.begin(), members_.end(), pk,
                             [](const Element& a, const Element& b) {
                               return a.serialize() < b.serialize();
                             });
  if (it == members_.end() || !(*it == pk)) return std::nullopt;
  return static_cast<std::size_t>(it - members_.begin());
}

Bytes32 Ring::hash() const {
  return group::hash32(HashDomain{std::string(group::domains::merkle_leaf)},
                       encoding_);
}

DlogEqProof dlogeq_prove(const Scalar& x, const Element& g2, const Element& g3,
                         SeededRng& rng) {
  const Scalar r = rng.next_scalar();
  DlogEqProof proof;
  proof.m1 = group::scalar_exp(g2, r);
  proof.m2 = group::scalar_exp(g3, r);
  const Element tau = group::scalar_exp(g2, x);
  const Element nu = group::scalar_exp(g3, x);
  const Scalar h = dlogeq_challenge(g2, g3, tau, nu, proof.m1, proof.m2);
  proof.z = h.mul(x).add(r);
  return proof;
}

bool dlogeq_verify(const Element& tau, const Element& nu, const Element& g2,
                   const Element& g3, const DlogEqProof& proof) {
  const Scalar h = dlogeq_challenge(g2, g3, tau, nu, proof.m1, proof.m2);
  const Element lhs1 = group::scalar_exp(g2, proof.z);
  const Element rhs1 = proof.m1.add(group::scalar_exp(tau, h));
  if (lhs1 != rhs1) return false;
  const Element lhs2 = group::scalar_exp(g3, proof.z);
  const Element rhs2 = proof.m2.add(group::scalar_exp(nu, h));
  return lhs2 == rhs2;
}

std::size_t signature_size(std::size_t n_members) {
  return 32 * (8 * arity_for(n_members) + 6);
}

Bytes UrsSignature::serialize() const {
  Bytes out;
  out.reserve(32 * (8 * arity() + 6));
  append_bytes(out, nu.serialize());
  for (const auto* vec : {&c_l, &c_a, &c_b, &c_d, &e_d})
    for (const auto& e : *vec) append_bytes(out, e.serialize());
  append_bytes(out, tau.serialize());
  append_bytes(out, pi.m1.serialize());
  append_bytes(out, pi.m2.serialize());
  for (const auto* vec : {&f, &z_a, &z_b})
    for (const auto& s : *vec) append_bytes(out, s.serialize());
  append_bytes(out, z_d.serialize());
  append_bytes(out, pi.z.serialize());
  return out;
}

std::optional<UrsSignature> UrsSignature::deserialize(
    std::span<const std::uint8_t> in) {
  if (in.size() % 32 != 0) return std::nullopt;
  const std::size_t words = in.size() / 32;
  if (words < 14 || (words - 6) % 8 != 0) return std::nullopt;
  const std::size_t n = (words - 6) / 8;
  std::size_t off = 0;
  auto take_elem = [&]() -> std::optional<Element> {
    auto e = Element::deserialize(in.subspan(off, 32));
    off += 32;
    return e;
  };
  auto take_scalar = [&]() -> std::optional<Scalar> {
    auto s = Scalar::deserialize(in.subspan(off, 32));
    off += 32;
    return s;
  };
  UrsSignature sig;
  auto nu = take_elem();
  if (!nu) return std::nullopt;
  sig.nu = *nu;
  for (auto* vec : {&sig.c_l, &sig.c_a, &sig.c_b, &sig.c_d, &sig.e_d}) {
    vec->reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
      auto e = take_elem();
      if (!e) return std::nullopt;
      vec->push_back(*e);
    }
  }
  auto tau = take_elem();
  auto m1 = take_elem();
  auto m2 = take_elem();
  if (!tau || !m1 || !m2) return std::nullopt;
  sig.tau = *tau;
  sig.pi.m1 = *m1;
  sig.pi.m2 = *m2;
  for (auto* vec : {&sig.f, &sig.z_a, &sig.z_b}) {
    vec->reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
      auto s = take_scalar();
      if (!s) return std::nullopt;
      vec->push_back(*s);
    }
  }
  auto zd = take_scalar();
  auto z = take_scalar();
  if (!zd || !z) return std::nullopt;
  sig.z_d = *zd;
  sig.pi.z = *z;
  return sig;
}

std::optional<UrsSignature> sign(const UrsParams& params,
                                 std::span<const std::uint8_t> poll_id,
                                 std::span<const std::uint8_t> vote,
                                 const Ring& ring, const Scalar& sk,
                                 SeededRng& rng) {
  const Element pk = group::scalar_exp(params.h, sk);
  const auto index = ring.index_of(pk);
  if (!index) return std::nullopt;
  const std::size_t l = *index;
  const std::size_t n = ring.arity();
  const std::size_t padded = ring.padded_size();

  const Element base_nu = nu_base(poll_id, ring);
  const Element base_tau = tau_base(poll_id, vote, ring);

  UrsSignature sig;
  sig.nu = group::scalar_exp(base_nu, sk);
  sig.tau = group::scalar_exp(base_tau, sk);

  std::vector<Scalar> r(n), a(n), s(n), t(n), rho(n);
  sig.c_l.resize(n);
  sig.c_a.resize(n);
  sig.c_b.resize(n);
  sig.c_d.resize(n);
  sig.e_d.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    r[j] = rng.next_scalar();
    a[j] = rng.next_scalar();
    s[j] = rng.next_scalar();
    t[j] = rng.next_scalar();
    rho[j] = rng.next_scalar();
    const bool lj = (l >> j) & 1;
    const Scalar bit = lj ? Scalar::one() : Scalar::zero();
    sig.c_l[j] = group::scalar_exp(params.g, bit).add(group::scalar_exp(params.h, r[j]));
    sig.c_a[j] = group::scalar_exp(params.g, a[j]).add(group::scalar_exp(params.h, s[j]));
    const Scalar la = lj ? a[j] : Scalar::zero();
    sig.c_b[j] = group::scalar_exp(params.g, la).add(group::scalar_exp(params.h, t[j]));
  }

  const auto coeffs = membership_polynomials(padded, n, l, a);
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<std::pair<Element, Scalar>> terms;
    terms.reserve(padded + 1);
    for (std::size_t i = 0; i < padded; ++i)
      terms.emplace_back(ring.padded_member(i), coeffs[i][j]);
    terms.emplace_back(params.h, rho[j]);
    sig.c_d[j] = group::multi_exp(terms);
    sig.e_d[j] = group::scalar_exp(base_nu, rho[j]);
  }

  const Scalar x = fs_challenge(poll_id, vote, ring, sig);
  const auto xpow = challenge_powers(x, n + 1);

  sig.f.resize(n);
  sig.z_a.resize(n);
  sig.z_b.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const bool lj = (l >> j) & 1;
    sig.f[j] = (lj ? x : Scalar::zero()).add(a[j]);
    sig.z_a[j] = r[j].mul(x).add(s[j]);
    sig.z_b[j] = r[j].mul(x.sub(sig.f[j])).add(t[j]);
  }
  Scalar zd = sk.mul(xpow[n]);
  for (std::size_t j = 0; j < n; ++j) zd = zd.sub(rho[j].mul(xpow[j]));
  sig.z_d = zd;

  // Link tau to nu with the shared exponent sk.
  const Scalar pr = rng.next_scalar();
  sig.pi.m1 = group::scalar_exp(base_tau, pr);
  sig.pi.m2 = group::scalar_exp(base_nu, pr);
  const Scalar h = dlogeq_challenge(base_tau, base_nu, sig.tau, sig.nu,
                                    sig.pi.m1, sig.pi.m2);
  sig.pi.z = h.mul(sk).add(pr);
  return sig;
}

VerifyResult verify(const UrsParams& params,
                    std::span<const std::uint8_t> poll_id,
                    std::span<const std::uint8_t> vote, const Ring& ring,
                    const UrsSignature& sig) {
  const std::size_t n = ring.arity();
  if (!shape_ok(sig, n)) return VerifyResult::kMalformed;
  const std::size_t padded = ring.padded_size();

  const Scalar x = fs_challenge(poll_id, vote, ring, sig);
  const auto xpow = challenge_powers(x, n + 1);

  // Step 3: bit-commitment equations.
  for (std::size_t j = 0; j < n; ++j) {
    const Element lhs1 = group::scalar_exp(sig.c_l[j], x).add(sig.c_a[j]);
    const Element rhs1 = group::scalar_exp(params.g, sig.f[j])
                             .add(group::scalar_exp(params.h, sig.z_a[j]));
    if (lhs1 != rhs1) return VerifyResult::kReject;
    const Element lhs2 =
        group::scalar_exp(sig.c_l[j], x.sub(sig.f[j])).add(sig.c_b[j]);
    const Element rhs2 = group::scalar_exp(params.h, sig.z_b[j]);
    if (lhs2 != rhs2) return VerifyResult::kReject;
  }

  // Step 6: membership equation over the padded ring.
  const auto evals = membership_evaluations(padded, n, x, sig.f);
  std::vector<std::pair<Element, Scalar>> terms;
  terms.reserve(padded + n);
  for (std::size_t i = 0; i < padded; ++i)
    terms.emplace_back(ring.padded_member(i), evals[i]);
  for (std::size_t j = 0; j < n; ++j)
    terms.emplace_back(sig.c_d[j], xpow[j].negate());
  if (group::multi_exp(terms) != group::scalar_exp(params.h, sig.z_d))
    return VerifyResult::kReject;

  // Tag equation: binds nu to the signing key via the same z_d.
  const Element base_nu = nu_base(poll_id, ring);
  terms.clear();
  terms.emplace_back(sig.nu, xpow[n]);
  for (std::size_t j = 0; j < n; ++j)
    terms.emplace_back(sig.e_d[j], xpow[j].negate());
  if (group::multi_exp(terms) != group::scalar_exp(base_nu, sig.z_d))
    return VerifyResult::kReject;

  const Element base_tau = tau_base(poll_id, vote, ring);
  if (!dlogeq_verify(sig.tau, sig.nu, base_tau, base_nu, sig.pi))
    return VerifyResult::kReject;
  return VerifyResult::kAccept;
}

std::vector<bool> batch_verify(const UrsParams& params,
                               std::span<const std::uint8_t> poll_id,
                               std::span<const BatchEntry> entries,
                               const Ring& ring) {
  const std::size_t n = ring.arity();
  const std::size_t padded = ring.padded_size();
  std::vector<bool> verdicts(entries.size(), false);
  if (entries.empty()) return verdicts;

  // Structural screen; malformed entries never join the combined equation.
  std::vector<std::size_t> batch_idx;
  for (std::size_t k = 0; k < entries.size(); ++k)
    if (shape_ok(entries[k].sig, n)) batch_idx.push_back(k);
  if (batch_idx.empty()) return verdicts;

  // Per-batch randomizer seed bound to the full transcript.
  Bytes seed;
  append_framed(seed, poll_id);
  append_bytes(seed, ring.hash());
  for (const auto& e : entries) {
    append_framed(seed, e.vote);
    append_bytes(seed, e.sig.serialize());
  }
  SeededRng rng(seed);

  const Element base_nu = nu_base(poll_id, ring);

  std::vector<std::pair<Element, Scalar>> terms;
  std::vector<Scalar> pk_exp(padded, Scalar::zero());
  Scalar sum_g = Scalar::zero();        // g exponent, step-3 first equation
  Scalar sum_h = Scalar::zero();        // h exponent, all h-sided responses
  Scalar sum_nu_base = Scalar::zero();  // base_nu exponent, tag equation

  for (const std::size_t k : batch_idx) {
    const auto& sig = entries[k].sig;
    const Scalar x = fs_challenge(poll_id, entries[k].vote, ring, sig);
    const auto xpow = challenge_powers(x, n + 1);

    for (std::size_t j = 0; j < n; ++j) {
      const Scalar r1 = rng.next_scalar();
      terms.emplace_back(sig.c_l[j], x.mul(r1));
      terms.emplace_back(sig.c_a[j], r1);
      sum_g = sum_g.add(sig.f[j].mul(r1));
      sum_h = sum_h.add(sig.z_a[j].mul(r1));

      const Scalar r2 = rng.next_scalar();
      terms.emplace_back(sig.c_l[j], x.sub(sig.f[j]).mul(r2));
      terms.emplace_back(sig.c_b[j], r2);
      sum_h = sum_h.add(sig.z_b[j].mul(r2));
    }

    const Scalar r3 = rng.next_scalar();
    const auto evals = membership_evaluations(padded, n, x, sig.f);
    for (std::size_t i = 0; i < padded; ++i)
      pk_exp[i] = pk_exp[i].add(evals[i].mul(r3));
    for (std::size_t j = 0; j < n; ++j)
      terms.emplace_back(sig.c_d[j], xpow[j].mul(r3).negate());
    sum_h = sum_h.add(sig.z_d.mul(r3));

    const Scalar r4 = rng.next_scalar();
    terms.emplace_back(sig.nu, xpow[n].mul(r4));
    for (std::size_t j = 0; j < n; ++j)
      terms.emplace_back(sig.e_d[j], xpow[j].mul(r4).negate());
    sum_nu_base = sum_nu_base.add(sig.z_d.mul(r4));

    // dlog_eq equations folded in with their own randomizers.
    const Element base_tau = tau_base(poll_id, entries[k].vote, ring);
    const Scalar h = dlogeq_challenge(base_tau, base_nu, sig.tau, sig.nu,
                                      sig.pi.m1, sig.pi.m2);
    const Scalar r5 = rng.next_scalar();
    terms.emplace_back(sig.pi.m1, r5);
    terms.emplace_back(sig.tau, h.mul(r5));
    terms.emplace_back(base_tau, sig.pi.z.mul(r5).negate());
    const Scalar r6 = rng.next_scalar();
    terms.emplace_back(sig.pi.m2, r6);
    terms.emplace_back(sig.nu, h.mul(r6));
    sum_nu_base = sum_nu_base.add(sig.pi.z.mul(r6));
  }

  for (std::size_t i = 0; i < padded; ++i)
    terms.emplace_back(ring.padded_member(i), pk_exp[i]);
  terms.emplace_back(params.g, sum_g.negate());
  terms.emplace_back(params.h, sum_h.negate());
  terms.emplace_back(base_nu, sum_nu_base.negate());

  if (group::multi_exp(terms).is_identity()) {
    for (const std::size_t k : batch_idx) verdicts[k] = true;
    return verdicts;
  }

  // Fall back to serial verification to isolate offenders.
  for (const std::size_t k : batch_idx)
    verdicts[k] = verify(params, poll_id, entries[k].vote, ring,
                         entries[k].sig) == VerifyResult::kAccept;
  return verdicts;
}

}  // namespace trustrate::urs
