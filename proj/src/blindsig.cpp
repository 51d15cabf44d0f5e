#include "trustrate/blindsig.hpp"

#include <cstring>
#include <stdexcept>

namespace trustrate::blindsig {

namespace {

const group::HashDomain kFdhDomain{std::string(group::domains::blind_fdh)};

mpz_class random_prime(gmp_randclass& rand, std::size_t bits) {
  while (true) {
    mpz_class cand = rand.get_z_bits(bits);
    // Force the top two bits so p*q reaches the full modulus width.
    mpz_setbit(cand.get_mpz_t(), bits - 1);
    mpz_setbit(cand.get_mpz_t(), bits - 2);
    mpz_setbit(cand.get_mpz_t(), 0);
    mpz_class p;
    mpz_nextprime(p.get_mpz_t(), cand.get_mpz_t());
    if (mpz_sizeinbase(p.get_mpz_t(), 2) == bits) return p;
  }
}

}  // namespace

RsaSignerKey keygen(std::size_t bits, std::uint64_t seed) {
  if (bits != 2048 && bits != 3072 && bits != 4096)
    throw std::invalid_argument("unsupported RSA size");
  gmp_randclass rand(gmp_randinit_mt);
  rand.seed(static_cast<unsigned long>(seed));

  const unsigned long e = 65537;
  while (true) {
    const mpz_class p = random_prime(rand, bits / 2);
    const mpz_class q = random_prime(rand, bits / 2);
    if (p == q) continue;
    const mpz_class n = p * q;
    if (mpz_sizeinbase(n.get_mpz_t(), 2) != bits) continue;
    const mpz_class phi = (p - 1) * (q - 1);
    mpz_class d;
    if (mpz_invert(d.get_mpz_t(), mpz_class(e).get_mpz_t(), phi.get_mpz_t()) == 0)
      continue;
    RsaSignerKey key;
    key.pub.n = n;
    key.pub.e = e;
    key.pub.bits = bits;
    key.d = d;
    return key;
  }
}

mpz_class fdh(const RsaPublicKey& pk, std::span<const std::uint8_t> m) {
  // Counter-mode expansion of a 32-byte hash to modulus length.
  const std::size_t width = pk.modulus_bytes();
  Bytes expanded;
  expanded.reserve(width + 32);
  std::uint32_t counter = 0;
  while (expanded.size() < width) {
    Bytes block(m.begin(), m.end());
    for (int i = 0; i < 4; ++i)
      block.push_back(static_cast<std::uint8_t>(counter >> (8 * i)));
    const auto h = group::hash32(kFdhDomain, block);
    expanded.insert(expanded.end(), h.begin(), h.end());
    ++counter;
  }
  expanded.resize(width);
  mpz_class v = decode_mpz(expanded);
  v %= pk.n;
  if (v == 0) v = 1;
  return v;
}

BlindingSession blind(const RsaPublicKey& pk, std::span<const std::uint8_t> m,
                      group::SeededRng& rng) {
  BlindingSession session;
  session.message.assign(m.begin(), m.end());
  const std::size_t width = pk.modulus_bytes();
  mpz_class r, g;
  do {
    Bytes raw(width);
    rng.fill(raw);
    r = decode_mpz(raw) % pk.n;
    mpz_gcd(g.get_mpz_t(), r.get_mpz_t(), pk.n.get_mpz_t());
  } while (r == 0 || g != 1);
  session.r = r;

  mpz_class re;
  mpz_powm_ui(re.get_mpz_t(), r.get_mpz_t(), pk.e, pk.n.get_mpz_t());
  session.blinded = (fdh(pk, m) * re) % pk.n;
  return session;
}

mpz_class sign_blinded(const RsaSignerKey& sk, const mpz_class& blinded) {
  mpz_class s;
  mpz_powm(s.get_mpz_t(), blinded.get_mpz_t(), sk.d.get_mpz_t(),
           sk.pub.n.get_mpz_t());
  return s;
}

mpz_class unblind(const RsaPublicKey& pk, const mpz_class& s_blinded,
                  const mpz_class& r) {
  mpz_class r_inv;
  if (mpz_invert(r_inv.get_mpz_t(), r.get_mpz_t(), pk.n.get_mpz_t()) == 0)
    throw std::invalid_argument("blinding factor not invertible");
  return (s_blinded * r_inv) % pk.n;
}

bool verify(const RsaPublicKey& pk, std::span<const std::uint8_t> m,
            const mpz_class& s) {
  if (s < 0 || s >= pk.n) return false;
  mpz_class se;
  mpz_powm_ui(se.get_mpz_t(), s.get_mpz_t(), pk.e, pk.n.get_mpz_t());
  return se == fdh(pk, m);
}

Bytes encode_mpz(const mpz_class& v, std::size_t width) {
  Bytes out(width, 0);
  std::size_t count = 0;
  mpz_export(out.data(), &count, 1, 1, 1, 0, v.get_mpz_t());
  if (count > width) throw std::invalid_argument("value wider than field");
  // mpz_export writes from the front; shift into big-endian right alignment.
  std::rotate(out.begin(), out.begin() + count, out.end());
  return out;
}

mpz_class decode_mpz(std::span<const std::uint8_t> in) {
  mpz_class v;
  mpz_import(v.get_mpz_t(), in.size(), 1, 1, 1, 0, in.data());
  return v;
}

std::optional<mpz_class> SigningService::sign(const mpz_class& blinded) {
  if (signed_.contains(blinded)) return std::nullopt;
  signed_.insert(blinded);
  return sign_blinded(key_, blinded);
}

Bytes Certificate::encode(std::size_t modulus_bytes) const {
  Bytes out;
  out.reserve(4 + 32 + modulus_bytes);
  for (int i = 0; i < 4; ++i)
    out.push_back(static_cast<std::uint8_t>(role_id >> (8 * i)));
  out.insert(out.end(), urs_pk.begin(), urs_pk.end());
  const Bytes sig = encode_mpz(signature, modulus_bytes);
  out.insert(out.end(), sig.begin(), sig.end());
  return out;
}

std::optional<Certificate> Certificate::decode(std::span<const std::uint8_t> in,
                                               std::size_t modulus_bytes) {
  if (in.size() != 4 + 32 + modulus_bytes) return std::nullopt;
  Certificate cert;
  for (int i = 0; i < 4; ++i)
    cert.role_id |= static_cast<std::uint32_t>(in[i]) << (8 * i);
  std::memcpy(cert.urs_pk.data(), in.data() + 4, 32);
  cert.signature = decode_mpz(in.subspan(36));
  return cert;
}

bool verify_certificate(const RsaPublicKey& role_key, const Certificate& cert) {
  return verify(role_key, cert.urs_pk, cert.signature);
}

CeremonyResult registration_ceremony(std::vector<SigningService>& role_services,
                                     std::span<const CeremonyUser> users,
                                     group::SeededRng& rng) {
  CeremonyResult result;
  result.certificates.reserve(users.size());
  for (const auto& user : users) {
    if (user.role_id >= role_services.size())
      throw std::invalid_argument("unknown role");
    auto& service = role_services[user.role_id];
    const auto& pk = service.public_key();

    auto session = blind(pk, user.urs_pk, rng);
    auto s_blinded = service.sign(session.blinded);
    if (!s_blinded) continue;  // repeat session refused

    Certificate cert;
    cert.role_id = user.role_id;
    cert.urs_pk = user.urs_pk;
    cert.signature = unblind(pk, *s_blinded, session.r);
    result.certificates.push_back(std::move(cert));
    // Admin sends its public key and the blinded signature.
    result.admin_egress_bytes += 2 * pk.modulus_bytes();
  }
  return result;
}

}  // namespace trustrate::blindsig
