#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "trustrate/group.hpp"
#include "trustrate/urs.hpp"

namespace trustrate::sortition {

using group::Bytes;
using group::Bytes32;
using group::Element;

/// Block-seed chain: seed_r derives from seed_{r-1} and the round-r proposer
/// key via keyed hashing.
Bytes32 next_seed(const Bytes32& prev_seed,
                  std::span<const std::uint8_t> proposer_key);

/// Smallest k with (1-h) * (((1-h)(1+h))/h)^(k-1) < epsilon.
int compute_bwait(double honest_fraction, double epsilon);

/// Per-poll eligibility score: hash of seed || poll id || voter pk.
Bytes32 vrf_score(const Bytes32& seed, std::span<const std::uint8_t> pid,
                  const Element& pk);

struct AudienceMember {
  std::uint64_t uuid = 0;
  Element pk;
};

struct VoterDraw {
  Bytes pid;
  std::uint64_t block_committed = 0;
  std::map<Bytes32, Bytes32> scores;  // pk encoding -> score
  std::vector<Element> selected;      // top scorers, selection order
  urs::Ring ring;                     // canonical (sorted) ring of selected
};

/// Top-min(ceil(W_e * n_req), |audience|) members by score, big-endian byte
/// comparison, ties broken by pk byte order. Errors on an empty audience or
/// when fewer than two members are selected (the ring needs two).
std::optional<VoterDraw> select_ring(const Bytes32& seed,
                                     std::span<const std::uint8_t> pid,
                                     std::span<const AudienceMember> audience,
                                     std::uint32_t n_req, double w_e);

enum class ThresholdMode {
  kAsPublished,  // W' = lambda * W * v_seen / v_exp
  kReciprocal,   // W' = lambda * W * v_exp / v_seen; grows rings under apathy
};

struct EpochThreshold {
  std::uint64_t epoch = 0;
  double w = 1.0;
  std::uint64_t v_exp = 0;
  std::uint64_t v_seen = 0;
  double lambda = 1.0;
};

/// Plain per-epoch update. v_exp = 0 (or v_seen = 0 in reciprocal mode)
/// leaves W unchanged; the epoch advances and counters reset either way.
EpochThreshold update_threshold(const EpochThreshold& t,
                                ThresholdMode mode = ThresholdMode::kAsPublished);

struct PollTurnout {
  std::uint32_t n_req = 0;
  std::uint32_t n_seen = 0;
};

/// Normalized update: every poll is reweighted to a common size n', so large
/// polls do not dominate. Returns the updated threshold with counters reset.
EpochThreshold update_threshold_normalized(const EpochThreshold& t,
                                           std::span<const PollTurnout> polls,
                                           double n_prime,
                                           ThresholdMode mode = ThresholdMode::kAsPublished);

/// delta_f = sqrt(3/(x*N) * ln(2/epsilon)): relative representation error
/// bound for a group making up fraction x of the audience, ring size N.
double fairness_delta(double x, double n, double epsilon);

}  // namespace trustrate::sortition
