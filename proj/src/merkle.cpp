#include "trustrate/merkle.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace trustrate::merkle {

namespace {

const group::HashDomain kLeafDomain{std::string(group::domains::merkle_leaf)};
const group::HashDomain kNodeDomain{std::string(group::domains::merkle_node)};

Bytes truncated(const group::Bytes32& full, std::size_t digest_len) {
  return Bytes(full.begin(), full.begin() + digest_len);
}

Bytes leaf_digest(const Bytes& key, const Bytes& value, std::size_t digest_len) {
  Bytes data;
  const std::uint64_t klen = key.size();
  for (int i = 0; i < 8; ++i) data.push_back(static_cast<std::uint8_t>(klen >> (8 * i)));
  data.insert(data.end(), key.begin(), key.end());
  data.insert(data.end(), value.begin(), value.end());
  return truncated(group::hash32(kLeafDomain, data), digest_len);
}

Bytes node_digest(const Bytes& left, const Bytes& right, std::size_t digest_len) {
  Bytes data = left;
  data.insert(data.end(), right.begin(), right.end());
  return truncated(group::hash32(kNodeDomain, data), digest_len);
}

Bytes empty_digest(std::size_t digest_len) {
  return Bytes(digest_len, 0);
}

Bytes empty_root(std::size_t digest_len) {
  return truncated(group::hash32(kNodeDomain, Bytes{}), digest_len);
}

}  // namespace

Tree::Tree(const std::map<Bytes, Bytes>& entries, std::size_t digest_len)
    : digest_len_(digest_len) {
  if (digest_len == 0 || digest_len > 32)
    throw std::invalid_argument("digest length must be in [1, 32]");
  if (entries.empty()) {
    root_ = empty_root(digest_len_);
    return;
  }
  std::vector<Bytes> leaves;
  leaves.reserve(entries.size());
  for (const auto& [k, v] : entries) {
    keys_.push_back(k);
    values_.push_back(v);
    leaves.push_back(leaf_digest(k, v, digest_len_));
  }
  levels_.push_back(std::move(leaves));
  while (levels_.back().size() > 1) {
    const auto& below = levels_.back();
    std::vector<Bytes> above;
    above.reserve((below.size() + 1) / 2);
    for (std::size_t i = 0; i < below.size(); i += 2) {
      const Bytes& left = below[i];
      const Bytes right =
          (i + 1 < below.size()) ? below[i + 1] : empty_digest(digest_len_);
      above.push_back(node_digest(left, right, digest_len_));
    }
    levels_.push_back(std::move(above));
  }
  root_ = levels_.back()[0];
}

Tree::Proof Tree::prove_index(std::size_t i) const {
  Proof proof;
  proof.index = i;
  proof.leaf_count = keys_.size();
  proof.key = keys_[i];
  proof.value = values_[i];
  std::size_t pos = i;
  for (std::size_t level = 0; level + 1 < levels_.size(); ++level) {
    const auto& nodes = levels_[level];
    const std::size_t sibling = pos ^ 1;
    proof.path.push_back(sibling < nodes.size() ? nodes[sibling]
                                                : empty_digest(digest_len_));
    pos >>= 1;
  }
  return proof;
}

std::optional<Tree::Proof> Tree::prove(const Bytes& key) const {
  const auto it = std::lower_bound(keys_.begin(), keys_.end(), key);
  if (it == keys_.end() || *it != key) return std::nullopt;
  return prove_index(static_cast<std::size_t>(it - keys_.begin()));
}

std::optional<Tree::AbsenceProof> Tree::prove_absent(const Bytes& key) const {
  const auto it = std::lower_bound(keys_.begin(), keys_.end(), key);
  if (it != keys_.end() && *it == key) return std::nullopt;  // present
  AbsenceProof proof;
  if (it != keys_.begin())
    proof.predecessor = prove_index(static_cast<std::size_t>(it - keys_.begin()) - 1);
  if (it != keys_.end())
    proof.successor = prove_index(static_cast<std::size_t>(it - keys_.begin()));
  return proof;
}

bool Tree::verify(const Bytes& root, std::size_t digest_len,
                  const Proof& proof) {
  if (proof.leaf_count == 0 || proof.index >= proof.leaf_count) return false;
  Bytes acc = leaf_digest(proof.key, proof.value, digest_len);
  std::uint64_t pos = proof.index;
  std::uint64_t width = proof.leaf_count;
  for (const auto& sibling : proof.path) {
    if (sibling.size() != digest_len) return false;
    acc = (pos & 1) ? node_digest(sibling, acc, digest_len)
                    : node_digest(acc, sibling, digest_len);
    pos >>= 1;
    width = (width + 1) / 2;
  }
  return width == 1 && pos == 0 && acc == root;
}

bool Tree::verify_absent(const Bytes& root, std::size_t digest_len,
                         const Bytes& key, const AbsenceProof& proof) {
  const auto& pred = proof.predecessor;
  const auto& succ = proof.successor;
  if (!pred && !succ) return root == empty_root(digest_len);
  if (pred) {
    if (!verify(root, digest_len, *pred)) return false;
    if (!(pred->key < key)) return false;
  }
  if (succ) {
    if (!verify(root, digest_len, *succ)) return false;
    if (!(key < succ->key)) return false;
  }
  if (pred && succ) {
    if (pred->leaf_count != succ->leaf_count) return false;
    if (succ->index != pred->index + 1) return false;
  } else if (pred) {
    if (pred->index + 1 != pred->leaf_count) return false;  // key after last
  } else {
    if (succ->index != 0) return false;  // key before first
  }
  return true;
}

}  // namespace trustrate::merkle
