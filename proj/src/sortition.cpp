#include "trustrate/sortition.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace trustrate::sortition {

namespace {

const group::HashDomain kVrfDomain{std::string(group::domains::vrf)};

void append_framed(Bytes& out, std::span<const std::uint8_t> data) {
  const std::uint64_t len = data.size();
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(len >> (8 * i)));
  out.insert(out.end(), data.begin(), data.end());
}

}  // namespace

Bytes32 next_seed(const Bytes32& prev_seed,
                  std::span<const std::uint8_t> proposer_key) {
  Bytes data;
  data.push_back('S');
  append_framed(data, prev_seed);
  append_framed(data, proposer_key);
  return group::hash32(kVrfDomain, data);
}

int compute_bwait(double honest_fraction, double epsilon) {
  if (honest_fraction <= 0.0 || honest_fraction >= 1.0 || epsilon <= 0.0 ||
      epsilon >= 1.0)
    throw std::invalid_argument("need 0 < h < 1 and 0 < epsilon < 1");
  const double h = honest_fraction;
  const double ratio = ((1.0 - h) * (1.0 + h)) / h;
  double term = 1.0 - h;
  for (int k = 1;; ++k) {
    if (term < epsilon) return k;
    term *= ratio;
    if (k > 100000) throw std::runtime_error("bwait did not converge");
  }
}

Bytes32 vrf_score(const Bytes32& seed, std::span<const std::uint8_t> pid,
                  const Element& pk) {
  Bytes data;
  data.push_back('V');
  append_framed(data, seed);
  append_framed(data, pid);
  append_framed(data, pk.serialize());
  return group::hash32(kVrfDomain, data);
}

std::optional<VoterDraw> select_ring(const Bytes32& seed,
                                     std::span<const std::uint8_t> pid,
                                     std::span<const AudienceMember> audience,
                                     std::uint32_t n_req, double w_e) {
  if (audience.empty() || n_req == 0 || w_e <= 0.0) return std::nullopt;

  struct Scored {
    Bytes32 score;
    Bytes32 pk_enc;
    const AudienceMember* member;
  };
  std::vector<Scored> scored;
  scored.reserve(audience.size());
  for (const auto& m : audience)
    scored.push_back({vrf_score(seed, pid, m.pk), m.pk.serialize(), &m});

  // Highest score first; equal scores fall back to pk byte order.
  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.pk_enc < b.pk_enc;
  });

  const auto want = static_cast<std::size_t>(
      std::ceil(w_e * static_cast<double>(n_req)));
  const std::size_t take = std::min(want, scored.size());

  VoterDraw draw;
  draw.pid.assign(pid.begin(), pid.end());
  std::vector<Element> selected_pks;
  for (std::size_t i = 0; i < take; ++i) {
    draw.scores[scored[i].pk_enc] = scored[i].score;
    draw.selected.push_back(scored[i].member->pk);
    selected_pks.push_back(scored[i].member->pk);
  }
  auto ring = urs::Ring::create(std::move(selected_pks));
  if (!ring) return std::nullopt;
  draw.ring = std::move(*ring);
  return draw;
}

EpochThreshold update_threshold(const EpochThreshold& t, ThresholdMode mode) {
  EpochThreshold next = t;
  next.epoch = t.epoch + 1;
  next.v_exp = 0;
  next.v_seen = 0;
  if (mode == ThresholdMode::kAsPublished) {
    if (t.v_exp > 0)
      next.w = t.lambda * t.w * static_cast<double>(t.v_seen) /
               static_cast<double>(t.v_exp);
  } else {
    if (t.v_seen > 0)
      next.w = t.lambda * t.w * static_cast<double>(t.v_exp) /
               static_cast<double>(t.v_seen);
  }
  return next;
}

EpochThreshold update_threshold_normalized(const EpochThreshold& t,
                                           std::span<const PollTurnout> polls,
                                           double n_prime, ThresholdMode mode) {
  double v_exp = 0.0;
  double v_seen = 0.0;
  for (const auto& p : polls) {
    if (p.n_req == 0) continue;
    v_exp += n_prime;
    v_seen += (n_prime / static_cast<double>(p.n_req)) *
              static_cast<double>(p.n_seen);
  }
  EpochThreshold next = t;
  next.epoch = t.epoch + 1;
  next.v_exp = 0;
  next.v_seen = 0;
  if (mode == ThresholdMode::kAsPublished) {
    if (v_exp > 0.0) next.w = t.lambda * t.w * v_seen / v_exp;
  } else {
    if (v_seen > 0.0) next.w = t.lambda * t.w * v_exp / v_seen;
  }
  return next;
}

double fairness_delta(double x, double n, double epsilon) {
  if (x <= 0.0 || x > 1.0 || n < 1.0 || epsilon <= 0.0 || epsilon >= 1.0)
    throw std::invalid_argument("fairness_delta domain");
  return std::sqrt(3.0 / (x * n) * std::log(2.0 / epsilon));
}

}  // namespace trustrate::sortition
