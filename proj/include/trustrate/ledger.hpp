#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "trustrate/blindsig.hpp"
#include "trustrate/group.hpp"
#include "trustrate/merkle.hpp"
#include "trustrate/sortition.hpp"
#include "trustrate/urs.hpp"

namespace trustrate::ledger {

using group::Bytes;
using group::Bytes32;

using PollId = std::array<std::uint8_t, 8>;
using TopicId = std::uint32_t;

constexpr std::size_t kContentSize = 256;
constexpr std::size_t kVoteTextSize = 256;
constexpr std::size_t kMaxBlockPayload = 9 * 1000 * 1000;

// Message sizes on the wire (the byte strings that get signed).
constexpr std::size_t kRegisterVoterMsgSize = 37;   // "R" + pk + topic
constexpr std::size_t kCreatePollMsgSize = 277;     // "P" + pid + topic + n_req + B_vw + content
constexpr std::size_t kCreateVoteMsgSize = 266;     // "V" + pid + rating + text
constexpr std::size_t kModifySubscriptionMsgSize = 5;  // "C" + topic

enum class TxKind : std::uint8_t {
  kRegisterVoter = 0,
  kCreatePoll = 1,
  kCreateVote = 2,
  kModifySubscription = 3,
};

struct RegisterVoter {
  Bytes32 urs_pk{};
  TopicId topic = 0;
};

struct CreatePoll {
  PollId pid{};
  TopicId topic = 0;
  std::uint32_t n_req = 0;
  std::uint32_t b_vw = 0;
  std::array<std::uint8_t, kContentSize> content{};
};

struct CreateVote {
  PollId pid{};
  std::uint8_t rating = 0;
  std::array<std::uint8_t, kVoteTextSize> text{};
};

struct ModifySubscription {
  TopicId topic = 0;
};

struct Transaction {
  TxKind kind = TxKind::kRegisterVoter;
  std::variant<RegisterVoter, CreatePoll, CreateVote, ModifySubscription> body;
  Bytes signer_pk;    // 32-byte signing pk for non-vote kinds; empty for votes
  Bytes signature;    // 64-byte detached signature, or serialized URS signature
  Bytes certificate;  // membership certificate (permissioned RegisterVoter)
};

/// The exact table-format message bytes that get signed.
Bytes message_bytes(const Transaction& tx);

/// Full wire encoding (message, then length-framed pk/signature/certificate)
/// and its inverse. decode rejects any size deviation.
Bytes encode(const Transaction& tx);
std::optional<Transaction> decode(std::span<const std::uint8_t> in);

enum class Reason {
  kOk = 0,
  kMalformed,
  kBadSignature,
  kDuplicateRegistration,
  kBadCertificate,
  kUnknownTopic,
  kDuplicatePollId,
  kBadPollParams,
  kUnknownPoll,
  kWindowNotOpen,
  kWindowClosed,
  kRingUnavailable,
  kDuplicateTag,
  kBadVoteSignature,
  kPollFull,
  kSubscriptionNotAllowed,
  kUnknownVoter,
  kBlockOverflow,
};

std::string_view reason_name(Reason r);

struct ValidationResult {
  Reason reason = Reason::kOk;
  bool ok() const { return reason == Reason::kOk; }
};

struct Block {
  std::uint64_t number = 0;
  Bytes previous_root;
  std::vector<Transaction> committed;
  std::vector<RegisterVoter> identity_sub_block;
  Bytes new_root;
};

struct LedgerConfig {
  bool permissioned = false;
  std::uint32_t b_wait = 2;
  std::uint64_t epoch_length = 1000;
  double lambda = 1.0;
  sortition::ThresholdMode threshold_mode = sortition::ThresholdMode::kAsPublished;
  std::size_t digest_len = 32;
  std::vector<TopicId> topics = {0};
  // Per-topic admin role keys, required in permissioned mode.
  std::map<TopicId, blindsig::RsaPublicKey> role_keys;
  urs::UrsParams urs_params = urs::UrsParams::setup("ledger-default");
  Bytes32 genesis_seed{};
};

struct VoterRecord {
  Bytes32 urs_pk{};
  Bytes signer_pk;  // EdDSA pk that registered it
  std::uint64_t registered_block = 0;
  std::map<TopicId, std::uint64_t> subscriptions;  // topic -> block subscribed
};

struct PollRecord {
  PollId pid{};
  TopicId topic = 0;
  std::uint32_t n_req = 0;
  std::uint32_t b_vw = 0;
  std::uint64_t b_n = 0;  // commit block
  std::uint32_t n_seen = 0;
  std::optional<urs::Ring> ring;  // known after B_wait
};

/// Merkle-authenticated key-value store plus the committee-side bookkeeping
/// (voter registry, poll rings, seed chain, epoch thresholds).
class Ledger {
 public:
  explicit Ledger(LedgerConfig config);

  const LedgerConfig& config() const { return config_; }
  std::uint64_t height() const { return height_; }
  const Bytes& root() const { return root_; }
  const std::map<Bytes, Bytes>& entries() const { return entries_; }

  ValidationResult validate(const Transaction& tx, std::uint64_t b_i) const;

  /// Applies one block at height b_i = height()+1. Transactions failing
  /// validation cause whole-batch rejection; callers pre-filter with
  /// validate(). Also runs the committee task: rings for polls committed at
  /// b_i - B_wait, and epoch threshold updates.
  std::optional<Block> apply_block(std::span<const Transaction> txs);

  struct ReadResult {
    Bytes value;
    merkle::Tree::Proof proof;
  };
  std::optional<ReadResult> gs_read(const Bytes& key) const;
  std::optional<merkle::Tree::AbsenceProof> gs_read_absent(const Bytes& key) const;
  bool gs_verify(const Bytes& key, const Bytes& value,
                 const merkle::Tree::Proof& proof) const;

  const std::map<PollId, PollRecord>& polls() const { return polls_; }
  const std::vector<VoterRecord>& voters() const { return voters_; }
  double threshold(TopicId topic) const;
  const Bytes32& seed_at(std::uint64_t block) const;

  /// Audience eligible for rings drawn at the given block: subscribers whose
  /// subscription is at least B_wait blocks old.
  std::vector<sortition::AudienceMember> audience(TopicId topic,
                                                  std::uint64_t at_block) const;

  /// JSON snapshot of the authenticated state (hex-encoded entries, root,
  /// height, poll summaries).
  std::string to_json(int indent = 2) const;

 private:
  LedgerConfig config_;
  std::uint64_t height_ = 0;
  std::map<Bytes, Bytes> entries_;
  Bytes root_;
  std::optional<merkle::Tree> tree_;
  std::vector<Bytes32> seeds_;
  std::vector<VoterRecord> voters_;
  std::map<Bytes32, std::size_t> voters_by_urs_pk_;
  std::map<Bytes, std::size_t> voters_by_signer_;
  std::map<PollId, PollRecord> polls_;
  struct TopicEpoch {
    double w = 1.0;
    std::uint32_t v_exp = 0;
    std::uint32_t v_seen = 0;
    std::uint64_t epoch = 0;
  };
  std::map<TopicId, TopicEpoch> epochs_;

  void rebuild_tree();
  void write_poll_entry(const PollRecord& poll);
  void write_threshold_entries(TopicId topic);
};

// Global-state key builders (Table layouts, field-accurate sizes).
Bytes gs_poll_key(const PollId& pid);                       // "P" + pid: 9
Bytes gs_poll_data_key(const PollId& pid);                  // "I" + pid: 9
Bytes gs_vote_key(const PollId& pid, std::uint8_t k);       // "V" + pid + k: 10
Bytes gs_vote_tag_key(const PollId& pid, const Bytes32& nu);  // "T" + pid + nu: 41
Bytes gs_threshold_key(TopicId topic);                      // "W" + topic: 5
Bytes gs_scaling_key(TopicId topic);                        // "U" + topic: 5
Bytes gs_blockwise_key(std::uint64_t block, TopicId topic);  // "B" + B_i + topic: 13

// EdDSA helpers for the non-vote transaction kinds (simulated identities).
struct SigningIdentity {
  Bytes pk;  // 32 bytes
  Bytes sk;  // 64 bytes
};
SigningIdentity make_identity(group::SeededRng& rng);
Bytes ed25519_sign(const SigningIdentity& id, std::span<const std::uint8_t> msg);
bool ed25519_verify(std::span<const std::uint8_t> pk,
                    std::span<const std::uint8_t> msg,
                    std::span<const std::uint8_t> sig);

/// The byte strings a vote's ring signature binds: poll id and vote payload.
Bytes vote_sign_poll_id(const PollId& pid);
Bytes vote_sign_payload(const CreateVote& vote);

}  // namespace trustrate::ledger
