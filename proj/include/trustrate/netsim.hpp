#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trustrate/group.hpp"
#include "trustrate/ledger.hpp"
#include "trustrate/sortition.hpp"
#include "trustrate/urs.hpp"

namespace trustrate::netsim {

using group::Bytes;
using group::Bytes32;

struct BehaviorProfile {
  bool drop_polls = false;
  bool wrong_ring_hash = false;
  bool wrong_verification_claims = false;
  bool unresponsive = false;
  bool drop_transactions = false;
  bool violate_fmap = false;

  bool honest() const {
    return !drop_polls && !wrong_ring_hash && !wrong_verification_claims &&
           !unresponsive && !drop_transactions && !violate_fmap;
  }
};

enum class Role { kCitizen, kPolitician };

struct NodeSpec {
  std::uint32_t id = 0;
  Role role = Role::kPolitician;
  BehaviorProfile behavior;
};

// Logical-time constants: the wall-clock timeouts become bounds in abstract
// time units (one unit = one hash evaluation).
struct TimingModel {
  double t_hash = 1.0;
  double t_verif = 50.0;
  double n_thread = 4.0;
};

enum class EvidenceKind {
  kWrongRingHash,
  kWrongVerifyClaim,
  kDroppedPoll,
  kShardViolation,
};

/// Signed proof of politician misbehavior. Every blacklist entry carries one
/// and an independent auditor can re-validate it against the ledger.
struct Evidence {
  EvidenceKind kind = EvidenceKind::kWrongRingHash;
  std::uint32_t politician = 0;
  ledger::PollId pid{};
  Bytes32 claimed_hash{};      // ring-hash claims
  bool claimed_valid = false;  // verification claims
  ledger::CreateVote vote{};   // contested vote
  Bytes vote_signature;
  Bytes32 voter_pk{};          // discovery drops
  Bytes response_payload;      // the full signed response (discovery, shards)
  std::uint64_t block = 0;     // shard violations
  Bytes tx_bytes;              // shard violations
  Bytes32 attestation{};       // simulated signature over the claim
};

/// Simulated politician signature over a claim payload.
Bytes32 sign_claim(std::uint32_t politician, std::span<const std::uint8_t> payload);

/// Independent re-validation of an evidence record against the ledger.
bool audit_evidence(const ledger::Ledger& lg, const Evidence& ev,
                    std::uint32_t shards = 45);

struct Blacklist {
  std::map<std::uint32_t, std::vector<Evidence>> entries;
  void add(Evidence ev) { entries[ev.politician].push_back(std::move(ev)); }
  bool contains(std::uint32_t id) const { return entries.contains(id); }
  std::size_t size() const { return entries.size(); }
};

struct OffloadRingOutcome {
  std::map<ledger::PollId, Bytes32> ring_hashes;
  std::vector<Evidence> evidence;
  std::uint64_t citizen_hash_evals = 0;
  std::uint64_t bytes_exchanged = 0;
  double elapsed = 0.0;
  bool failed = false;  // every sampled politician timed out
};

/// Ring-hash offload: query the safe sample for every new poll's ring hash;
/// unanimous answers are accepted without local hashing, conflicts trigger
/// member-list union, local recomputation and blacklisting.
OffloadRingOutcome offload_ring(const ledger::Ledger& lg,
                                std::span<const NodeSpec> sample,
                                std::span<const ledger::PollId> new_polls,
                                const TimingModel& timing);

struct VoteToVerify {
  ledger::CreateVote vote;
  Bytes signature;
};

struct OffloadVerifyOutcome {
  std::vector<bool> verdicts;
  std::vector<Evidence> evidence;
  std::uint64_t citizen_verifications = 0;
  std::uint64_t bytes_exchanged = 0;
  double elapsed = 0.0;
  bool failed = false;
};

/// Vote-verification offload: unanimous verdicts accepted as-is; a disputed
/// vote is verified locally against the GS-proven ring and liars are
/// blacklisted.
OffloadVerifyOutcome offload_vote_verify(const ledger::Ledger& lg,
                                         std::span<const NodeSpec> sample,
                                         std::span<const VoteToVerify> votes,
                                         const TimingModel& timing);

enum class FMap { kDetTxHashmap, kDetGroupHashmap };
enum class FSelect { kRandomTx, kRandomGroup, kOldest, kDeadline };

struct TxPoolPolicy {
  FMap f_map = FMap::kDetGroupHashmap;
  FSelect f_select = FSelect::kOldest;
  std::uint32_t shards = 45;
};

struct PendingTx {
  ledger::Transaction tx;
  std::uint64_t arrival_block = 0;
  std::uint64_t deadline_block = UINT64_MAX;  // vote-window close
};

/// Shard index of a transaction at block i. Group mapping keys votes by
/// Hash(i || PID) so all votes of one poll land on one politician.
std::uint32_t shard_of(FMap f_map, const PendingTx& tx, std::uint64_t block_i,
                       std::uint32_t shards);

/// Per-politician ordered inclusion lists (indices into pending). Honest
/// politicians respect the shard map and selection order; violate_fmap
/// politicians grab out-of-shard transactions, which emits evidence.
std::vector<std::vector<std::size_t>> pool_assign(
    const TxPoolPolicy& policy, std::span<const PendingTx> pending,
    std::uint64_t block_i, std::span<const NodeSpec> politicians,
    group::SeededRng& rng, std::vector<Evidence>* violations = nullptr);

/// Eligibility discovery: union of politician responses, conflicts resolved
/// against the ledger's authenticated ring data; droppers are blacklisted.
std::vector<ledger::PollId> discover_polls(const ledger::Ledger& lg,
                                           const Bytes32& voter_pk,
                                           std::uint64_t b_i,
                                           std::span<const NodeSpec> politicians,
                                           std::vector<Evidence>* evidence);

struct SimConfig {
  std::uint64_t seed = 1;
  std::uint32_t n_politicians = 200;
  std::uint32_t n_citizens = 2000;
  std::uint32_t n_users = 100;
  double malicious_politician_fraction = 0.0;
  double malicious_citizen_fraction = 0.0;
  BehaviorProfile politician_behavior;
  std::uint32_t safe_sample_size = 25;
  bool force_honest_in_sample = true;
  TxPoolPolicy policy;
  TimingModel timing;
  std::uint32_t b_wait = 2;
  std::uint32_t b_vw = 4;
  std::uint32_t n_req = 10;
  double lambda = 1.0;
  sortition::ThresholdMode threshold_mode = sortition::ThresholdMode::kAsPublished;
  std::uint64_t epoch_length = 1000;
  std::uint64_t blocks = 30;
  double polls_per_block = 1.0;
  double apathy = 0.0;               // deterministic non-voter fraction
  double duplicate_vote_rate = 0.0;  // double votes injected per poll
  double invalid_vote_rate = 0.0;    // ring-mismatched votes injected

  static std::optional<SimConfig> from_json(const std::string& text);
  std::string to_json(int indent = 2) const;
  /// Threat-model warnings (>=20% honest politicians, >=75% honest citizens).
  std::vector<std::string> threat_model_warnings() const;
};

struct BlockRecord {
  std::uint64_t number = 0;
  std::uint32_t committed = 0;
  std::uint32_t rejected = 0;
  std::map<std::string, std::uint32_t> reject_reasons;
  std::string root_hex;
};

struct SimReport {
  std::vector<BlockRecord> blocks;
  std::uint64_t polls_created = 0;
  std::uint64_t votes_submitted = 0;     // valid votes generated
  std::uint64_t votes_committed = 0;
  std::uint64_t votes_rejected = 0;      // invalid/duplicate rejected
  std::uint64_t duplicates_injected = 0;
  std::uint64_t invalid_injected = 0;
  std::uint64_t valid_votes_expired = 0; // valid but window lapsed
  std::uint64_t citizen_hash_evals = 0;
  std::uint64_t citizen_verifications = 0;
  std::uint64_t bytes_exchanged = 0;
  double mean_batch_size = 0.0;
  std::vector<std::uint32_t> blacklisted;
  std::size_t evidence_count = 0;
  bool evidence_all_valid = true;
  std::string final_root_hex;
  std::map<std::string, double> per_poll_accepted;  // epoch -> mean accepted

  double throughput(std::uint64_t blocks_run) const {
    return blocks_run == 0 ? 0.0
                           : static_cast<double>(votes_committed) /
                                 static_cast<double>(blocks_run);
  }
  std::string to_json(const SimConfig& config, int indent = 2) const;
};

SimReport run_simulation(const SimConfig& config);

}  // namespace trustrate::netsim
