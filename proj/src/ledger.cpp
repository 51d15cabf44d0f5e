#include "trustrate/ledger.hpp"

#include <sodium.h>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstring>
#include <stdexcept>

namespace trustrate::ledger {

namespace {

const group::HashDomain kBlockwiseDomain{"blockwise"};

void put_u32(Bytes& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(Bytes& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> in) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | in[i];
  return v;
}

std::string hex(std::span<const std::uint8_t> data) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (auto b : data) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0xf]);
  }
  return out;
}

void put_framed(Bytes& out, const Bytes& data) {
  put_u32(out, static_cast<std::uint32_t>(data.size()));
  out.insert(out.end(), data.begin(), data.end());
}

}  // namespace

Bytes message_bytes(const Transaction& tx) {
  Bytes out;
  switch (tx.kind) {
    case TxKind::kRegisterVoter: {
      const auto& body = std::get<RegisterVoter>(tx.body);
      out.push_back('R');
      out.insert(out.end(), body.urs_pk.begin(), body.urs_pk.end());
      put_u32(out, body.topic);
      break;
    }
    case TxKind::kCreatePoll: {
      const auto& body = std::get<CreatePoll>(tx.body);
      out.push_back('P');
      out.insert(out.end(), body.pid.begin(), body.pid.end());
      put_u32(out, body.topic);
      put_u32(out, body.n_req);
      put_u32(out, body.b_vw);
      out.insert(out.end(), body.content.begin(), body.content.end());
      break;
    }
    case TxKind::kCreateVote: {
      const auto& body = std::get<CreateVote>(tx.body);
      out.push_back('V');
      out.insert(out.end(), body.pid.begin(), body.pid.end());
      out.push_back(body.rating);
      out.insert(out.end(), body.text.begin(), body.text.end());
      break;
    }
    case TxKind::kModifySubscription: {
      const auto& body = std::get<ModifySubscription>(tx.body);
      out.push_back('C');
      put_u32(out, body.topic);
      break;
    }
  }
  return out;
}

Bytes encode(const Transaction& tx) {
  Bytes out = message_bytes(tx);
  put_framed(out, tx.signer_pk);
  put_framed(out, tx.signature);
  put_framed(out, tx.certificate);
  return out;
}

std::optional<Transaction> decode(std::span<const std::uint8_t> in) {
  if (in.empty()) return std::nullopt;
  Transaction tx;
  std::size_t msg_size = 0;
  switch (in[0]) {
    case 'R': {
      msg_size = kRegisterVoterMsgSize;
      if (in.size() < msg_size) return std::nullopt;
      RegisterVoter body;
      std::memcpy(body.urs_pk.data(), in.data() + 1, 32);
      body.topic = get_u32(in.subspan(33, 4));
      tx.kind = TxKind::kRegisterVoter;
      tx.body = body;
      break;
    }
    case 'P': {
      msg_size = kCreatePollMsgSize;
      if (in.size() < msg_size) return std::nullopt;
      CreatePoll body;
      std::memcpy(body.pid.data(), in.data() + 1, 8);
      body.topic = get_u32(in.subspan(9, 4));
      body.n_req = get_u32(in.subspan(13, 4));
      body.b_vw = get_u32(in.subspan(17, 4));
      std::memcpy(body.content.data(), in.data() + 21, kContentSize);
      tx.kind = TxKind::kCreatePoll;
      tx.body = body;
      break;
    }
    case 'V': {
      msg_size = kCreateVoteMsgSize;
      if (in.size() < msg_size) return std::nullopt;
      CreateVote body;
      std::memcpy(body.pid.data(), in.data() + 1, 8);
      body.rating = in[9];
      std::memcpy(body.text.data(), in.data() + 10, kVoteTextSize);
      tx.kind = TxKind::kCreateVote;
      tx.body = body;
      break;
    }
    case 'C': {
      msg_size = kModifySubscriptionMsgSize;
      if (in.size() < msg_size) return std::nullopt;
      ModifySubscription body;
      body.topic = get_u32(in.subspan(1, 4));
      tx.kind = TxKind::kModifySubscription;
      tx.body = body;
      break;
    }
    default:
      return std::nullopt;
  }
  std::size_t off = msg_size;
  auto take = [&](Bytes& out) -> bool {
    if (in.size() < off + 4) return false;
    const std::uint32_t len = get_u32(in.subspan(off, 4));
    off += 4;
    if (in.size() < off + len) return false;
    out.assign(in.begin() + off, in.begin() + off + len);
    off += len;
    return true;
  };
  if (!take(tx.signer_pk) || !take(tx.signature) || !take(tx.certificate))
    return std::nullopt;
  if (off != in.size()) return std::nullopt;
  return tx;
}

std::string_view reason_name(Reason r) {
  switch (r) {
    case Reason::kOk: return "ok";
    case Reason::kMalformed: return "malformed";
    case Reason::kBadSignature: return "bad_signature";
    case Reason::kDuplicateRegistration: return "duplicate_registration";
    case Reason::kBadCertificate: return "bad_certificate";
    case Reason::kUnknownTopic: return "unknown_topic";
    case Reason::kDuplicatePollId: return "duplicate_poll_id";
    case Reason::kBadPollParams: return "bad_poll_params";
    case Reason::kUnknownPoll: return "unknown_poll";
    case Reason::kWindowNotOpen: return "window_not_open";
    case Reason::kWindowClosed: return "window_closed";
    case Reason::kRingUnavailable: return "ring_unavailable";
    case Reason::kDuplicateTag: return "duplicate_tag";
    case Reason::kBadVoteSignature: return "bad_vote_signature";
    case Reason::kPollFull: return "poll_full";
    case Reason::kSubscriptionNotAllowed: return "subscription_not_allowed";
    case Reason::kUnknownVoter: return "unknown_voter";
    case Reason::kBlockOverflow: return "block_overflow";
  }
  return "unknown";
}

Bytes gs_poll_key(const PollId& pid) {
  Bytes key = {'P'};
  key.insert(key.end(), pid.begin(), pid.end());
  return key;
}

Bytes gs_poll_data_key(const PollId& pid) {
  Bytes key = {'I'};
  key.insert(key.end(), pid.begin(), pid.end());
  return key;
}

Bytes gs_vote_key(const PollId& pid, std::uint8_t k) {
  Bytes key = {'V'};
  key.insert(key.end(), pid.begin(), pid.end());
  key.push_back(k);
  return key;
}

Bytes gs_vote_tag_key(const PollId& pid, const Bytes32& nu) {
  Bytes key = {'T'};
  key.insert(key.end(), pid.begin(), pid.end());
  key.insert(key.end(), nu.begin(), nu.end());
  return key;
}

Bytes gs_threshold_key(TopicId topic) {
  Bytes key = {'W'};
  put_u32(key, topic);
  return key;
}

Bytes gs_scaling_key(TopicId topic) {
  Bytes key = {'U'};
  put_u32(key, topic);
  return key;
}

Bytes gs_blockwise_key(std::uint64_t block, TopicId topic) {
  Bytes key = {'B'};
  put_u64(key, block);
  put_u32(key, topic);
  return key;
}

SigningIdentity make_identity(group::SeededRng& rng) {
  std::array<std::uint8_t, crypto_sign_SEEDBYTES> seed{};
  rng.fill(seed);
  SigningIdentity id;
  id.pk.resize(crypto_sign_PUBLICKEYBYTES);
  id.sk.resize(crypto_sign_SECRETKEYBYTES);
  crypto_sign_seed_keypair(id.pk.data(), id.sk.data(), seed.data());
  return id;
}

Bytes ed25519_sign(const SigningIdentity& id, std::span<const std::uint8_t> msg) {
  Bytes sig(crypto_sign_BYTES);
  crypto_sign_detached(sig.data(), nullptr, msg.data(), msg.size(), id.sk.data());
  return sig;
}

bool ed25519_verify(std::span<const std::uint8_t> pk,
                    std::span<const std::uint8_t> msg,
                    std::span<const std::uint8_t> sig) {
  if (pk.size() != crypto_sign_PUBLICKEYBYTES || sig.size() != crypto_sign_BYTES)
    return false;
  return crypto_sign_verify_detached(sig.data(), msg.data(), msg.size(),
                                     pk.data()) == 0;
}

Bytes vote_sign_poll_id(const PollId& pid) {
  return Bytes(pid.begin(), pid.end());
}

Bytes vote_sign_payload(const CreateVote& vote) {
  Bytes out;
  out.push_back(vote.rating);
  out.insert(out.end(), vote.text.begin(), vote.text.end());
  return out;
}

Ledger::Ledger(LedgerConfig config) : config_(std::move(config)) {
  if (config_.permissioned) {
    for (const auto topic : config_.topics)
      if (!config_.role_keys.contains(topic))
        throw std::invalid_argument("permissioned mode needs a role key per topic");
  }
  seeds_.push_back(config_.genesis_seed);
  for (const auto topic : config_.topics) {
    epochs_[topic] = TopicEpoch{};
    write_threshold_entries(topic);
  }
  rebuild_tree();
}

void Ledger::rebuild_tree() {
  tree_.emplace(entries_, config_.digest_len);
  root_ = tree_->root();
}

void Ledger::write_poll_entry(const PollRecord& poll) {
  Bytes value;
  put_u64(value, poll.b_n);
  put_u32(value, poll.topic);
  put_u32(value, poll.n_req);
  put_u32(value, poll.n_seen);
  put_u32(value, poll.b_vw);
  if (poll.ring) {
    const auto rh = poll.ring->hash();
    value.insert(value.end(), rh.begin(), rh.end());
  } else {
    value.insert(value.end(), 32, 0);  // unknown until B_wait elapses
  }
  entries_[gs_poll_key(poll.pid)] = value;
}

void Ledger::write_threshold_entries(TopicId topic) {
  const auto& epoch = epochs_.at(topic);
  Bytes wval(32, 0);
  static_assert(sizeof(double) == 8);
  std::memcpy(wval.data(), &epoch.w, 8);
  entries_[gs_threshold_key(topic)] = wval;

  Bytes uval;
  put_u32(uval, epoch.v_exp);
  put_u32(uval, epoch.v_seen);
  entries_[gs_scaling_key(topic)] = uval;
}

double Ledger::threshold(TopicId topic) const {
  return epochs_.at(topic).w;
}

const Bytes32& Ledger::seed_at(std::uint64_t block) const {
  return seeds_.at(block);
}

std::vector<sortition::AudienceMember> Ledger::audience(
    TopicId topic, std::uint64_t at_block) const {
  std::vector<sortition::AudienceMember> out;
  for (std::size_t i = 0; i < voters_.size(); ++i) {
    const auto it = voters_[i].subscriptions.find(topic);
    if (it == voters_[i].subscriptions.end()) continue;
    if (it->second + config_.b_wait > at_block) continue;  // not yet eligible
    const auto pk = group::Element::deserialize(voters_[i].urs_pk);
    if (!pk) continue;
    out.push_back({static_cast<std::uint64_t>(i), *pk});
  }
  return out;
}

ValidationResult Ledger::validate(const Transaction& tx,
                                  std::uint64_t b_i) const {
  const Bytes msg = message_bytes(tx);
  switch (tx.kind) {
    case TxKind::kRegisterVoter: {
      const auto& body = std::get<RegisterVoter>(tx.body);
      if (!group::Element::deserialize(body.urs_pk))
        return {Reason::kMalformed};  // not a well-formed URS public key
      if (epochs_.find(body.topic) == epochs_.end())
        return {Reason::kUnknownTopic};
      if (voters_by_urs_pk_.contains(body.urs_pk))
        return {Reason::kDuplicateRegistration};
      if (!ed25519_verify(tx.signer_pk, msg, tx.signature))
        return {Reason::kBadSignature};
      if (config_.permissioned) {
        const auto& role_key = config_.role_keys.at(body.topic);
        const auto cert = blindsig::Certificate::decode(
            tx.certificate, role_key.modulus_bytes());
        if (!cert || cert->role_id != body.topic ||
            cert->urs_pk != body.urs_pk ||
            !blindsig::verify_certificate(role_key, *cert))
          return {Reason::kBadCertificate};
      } else {
        // One URS key per signing identity.
        if (voters_by_signer_.contains(tx.signer_pk))
          return {Reason::kDuplicateRegistration};
      }
      return {};
    }
    case TxKind::kCreatePoll: {
      const auto& body = std::get<CreatePoll>(tx.body);
      if (epochs_.find(body.topic) == epochs_.end())
        return {Reason::kUnknownTopic};
      if (polls_.contains(body.pid)) return {Reason::kDuplicatePollId};
      const auto subscribers = audience(body.topic, b_i + config_.b_wait);
      if (body.n_req == 0 || body.b_vw == 0 ||
          body.n_req >= subscribers.size())
        return {Reason::kBadPollParams};
      if (!ed25519_verify(tx.signer_pk, msg, tx.signature))
        return {Reason::kBadSignature};
      return {};
    }
    case TxKind::kCreateVote: {
      const auto& body = std::get<CreateVote>(tx.body);
      const auto it = polls_.find(body.pid);
      if (it == polls_.end()) return {Reason::kUnknownPoll};
      const auto& poll = it->second;
      const std::uint64_t open_after = poll.b_n + config_.b_wait;
      if (b_i <= open_after) return {Reason::kWindowNotOpen};
      if (b_i > open_after + poll.b_vw) return {Reason::kWindowClosed};
      if (!poll.ring) return {Reason::kRingUnavailable};
      if (poll.n_seen >= 256) return {Reason::kPollFull};
      const auto sig = urs::UrsSignature::deserialize(tx.signature);
      if (!sig || sig->arity() != poll.ring->arity())
        return {Reason::kBadVoteSignature};
      const Bytes32 nu = urs::tag_of(*sig).serialize();
      if (entries_.contains(gs_vote_tag_key(body.pid, nu)))
        return {Reason::kDuplicateTag};
      if (urs::verify(config_.urs_params, vote_sign_poll_id(body.pid),
                      vote_sign_payload(body), *poll.ring,
                      *sig) != urs::VerifyResult::kAccept)
        return {Reason::kBadVoteSignature};
      return {};
    }
    case TxKind::kModifySubscription: {
      if (config_.permissioned) return {Reason::kSubscriptionNotAllowed};
      const auto& body = std::get<ModifySubscription>(tx.body);
      if (epochs_.find(body.topic) == epochs_.end())
        return {Reason::kUnknownTopic};
      if (!voters_by_signer_.contains(tx.signer_pk))
        return {Reason::kUnknownVoter};
      if (!ed25519_verify(tx.signer_pk, msg, tx.signature))
        return {Reason::kBadSignature};
      return {};
    }
  }
  return {Reason::kMalformed};
}

std::optional<Block> Ledger::apply_block(std::span<const Transaction> txs) {
  const std::uint64_t b_i = height_ + 1;

  std::size_t payload = 0;
  for (const auto& tx : txs) {
    if (!validate(tx, b_i).ok()) return std::nullopt;
    payload += encode(tx).size();
  }
  if (payload > kMaxBlockPayload) return std::nullopt;

  Block block;
  block.number = b_i;
  block.previous_root = root_;

  // Advance the seed chain; the proposer key is simulated from the height.
  Bytes proposer = {'b'};
  put_u64(proposer, b_i);
  seeds_.push_back(sortition::next_seed(seeds_.back(), proposer));

  std::map<TopicId, std::vector<PollId>> new_pids;
  std::map<Bytes32, bool> tags_this_block;

  for (const auto& tx : txs) {
    switch (tx.kind) {
      case TxKind::kRegisterVoter: {
        const auto& body = std::get<RegisterVoter>(tx.body);
        if (voters_by_urs_pk_.contains(body.urs_pk)) return std::nullopt;
        VoterRecord rec;
        rec.urs_pk = body.urs_pk;
        rec.signer_pk = tx.signer_pk;
        rec.registered_block = b_i;
        rec.subscriptions[body.topic] = b_i;
        voters_by_urs_pk_[body.urs_pk] = voters_.size();
        voters_by_signer_[tx.signer_pk] = voters_.size();
        voters_.push_back(std::move(rec));
        block.identity_sub_block.push_back(body);
        break;
      }
      case TxKind::kCreatePoll: {
        const auto& body = std::get<CreatePoll>(tx.body);
        if (polls_.contains(body.pid)) return std::nullopt;
        PollRecord poll;
        poll.pid = body.pid;
        poll.topic = body.topic;
        poll.n_req = body.n_req;
        poll.b_vw = body.b_vw;
        poll.b_n = b_i;
        polls_[body.pid] = poll;
        write_poll_entry(poll);
        entries_[gs_poll_data_key(body.pid)] =
            Bytes(body.content.begin(), body.content.end());
        new_pids[body.topic].push_back(body.pid);
        break;
      }
      case TxKind::kCreateVote: {
        const auto& body = std::get<CreateVote>(tx.body);
        auto& poll = polls_.at(body.pid);
        const auto sig = urs::UrsSignature::deserialize(tx.signature);
        const Bytes32 nu = urs::tag_of(*sig).serialize();
        // Same-block double votes collide here.
        const Bytes tag_key = gs_vote_tag_key(body.pid, nu);
        if (entries_.contains(tag_key)) return std::nullopt;
        const auto k = static_cast<std::uint8_t>(poll.n_seen);
        entries_[gs_vote_key(body.pid, k)] = vote_sign_payload(body);
        entries_[tag_key] = Bytes{1};  // True
        poll.n_seen += 1;
        write_poll_entry(poll);
        break;
      }
      case TxKind::kModifySubscription: {
        const auto& body = std::get<ModifySubscription>(tx.body);
        auto& rec = voters_[voters_by_signer_.at(tx.signer_pk)];
        const auto it = rec.subscriptions.find(body.topic);
        if (it == rec.subscriptions.end())
          rec.subscriptions[body.topic] = b_i;
        else
          rec.subscriptions.erase(it);
        break;
      }
    }
    block.committed.push_back(tx);
  }

  for (const auto& [topic, pids] : new_pids) {
    auto sorted = pids;
    std::sort(sorted.begin(), sorted.end());
    Bytes data;
    for (const auto& pid : sorted) data.insert(data.end(), pid.begin(), pid.end());
    const auto h = group::hash32(kBlockwiseDomain, data);
    entries_[gs_blockwise_key(b_i, topic)] = Bytes(h.begin(), h.end());
  }

  // Committee task: draw rings for polls committed B_wait blocks ago.
  if (b_i >= config_.b_wait) {
    const std::uint64_t target = b_i - config_.b_wait;
    for (auto& [pid, poll] : polls_) {
      if (poll.b_n != target || poll.ring) continue;
      const auto members = audience(poll.topic, b_i);
      auto draw = sortition::select_ring(seeds_[b_i], vote_sign_poll_id(pid),
                                         members, poll.n_req,
                                         epochs_.at(poll.topic).w);
      if (!draw) continue;  // stays unavailable; votes will be rejected
      poll.ring = std::move(draw->ring);
      write_poll_entry(poll);
    }
  }

  // Epoch bookkeeping: polls whose voting window closed at this block and
  // ran strictly inside the current epoch.
  const std::uint64_t epoch_start =
      ((b_i - 1) / config_.epoch_length) * config_.epoch_length + 1;
  for (const auto& [pid, poll] : polls_) {
    const std::uint64_t close = poll.b_n + config_.b_wait + poll.b_vw;
    if (close != b_i) continue;
    const std::uint64_t open = poll.b_n + config_.b_wait + 1;
    if (open < epoch_start) continue;  // window straddles an epoch boundary
    auto& epoch = epochs_.at(poll.topic);
    epoch.v_exp += poll.n_req;
    epoch.v_seen += poll.n_seen;
    write_threshold_entries(poll.topic);
  }

  if (b_i % config_.epoch_length == 0) {
    for (auto& [topic, epoch] : epochs_) {
      sortition::EpochThreshold t;
      t.epoch = epoch.epoch;
      t.w = epoch.w;
      t.v_exp = epoch.v_exp;
      t.v_seen = epoch.v_seen;
      t.lambda = config_.lambda;
      const auto next = sortition::update_threshold(t, config_.threshold_mode);
      epoch.w = next.w;
      epoch.epoch = next.epoch;
      epoch.v_exp = 0;
      epoch.v_seen = 0;
      write_threshold_entries(topic);
    }
  }

  height_ = b_i;
  rebuild_tree();
  block.new_root = root_;
  return block;
}

std::optional<Ledger::ReadResult> Ledger::gs_read(const Bytes& key) const {
  if (!tree_) return std::nullopt;
  auto proof = tree_->prove(key);
  if (!proof) return std::nullopt;
  ReadResult out;
  out.value = proof->value;
  out.proof = std::move(*proof);
  return out;
}

std::optional<merkle::Tree::AbsenceProof> Ledger::gs_read_absent(
    const Bytes& key) const {
  if (!tree_) return std::nullopt;
  return tree_->prove_absent(key);
}

bool Ledger::gs_verify(const Bytes& key, const Bytes& value,
                       const merkle::Tree::Proof& proof) const {
  return proof.key == key && proof.value == value &&
         merkle::Tree::verify(root_, config_.digest_len, proof);
}

std::string Ledger::to_json(int indent) const {
  nlohmann::json doc;
  doc["height"] = height_;
  doc["root"] = hex(root_);
  doc["digest_len"] = config_.digest_len;
  doc["permissioned"] = config_.permissioned;
  doc["voters"] = voters_.size();
  nlohmann::json polls = nlohmann::json::array();
  for (const auto& [pid, poll] : polls_) {
    nlohmann::json p;
    p["pid"] = hex(pid);
    p["topic"] = poll.topic;
    p["n_req"] = poll.n_req;
    p["n_seen"] = poll.n_seen;
    p["b_n"] = poll.b_n;
    p["b_vw"] = poll.b_vw;
    p["ring_known"] = poll.ring.has_value();
    if (poll.ring) p["ring_size"] = poll.ring->size();
    polls.push_back(std::move(p));
  }
  doc["polls"] = std::move(polls);
  nlohmann::json entries = nlohmann::json::object();
  for (const auto& [k, v] : entries_) entries[hex(k)] = hex(v);
  doc["entries"] = std::move(entries);
  nlohmann::json thresholds = nlohmann::json::object();
  for (const auto& [topic, epoch] : epochs_)
    thresholds[std::to_string(topic)] = epoch.w;
  doc["thresholds"] = std::move(thresholds);
  return doc.dump(indent);
}

}  // namespace trustrate::ledger
