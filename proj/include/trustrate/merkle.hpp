#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "trustrate/group.hpp"

namespace trustrate::merkle {

using group::Bytes;

/// Binary Merkle tree over a sorted key-value map. Digests are truncated
/// SHA-256 (32 bytes by default, 10-byte mode reproduces compact-proof
/// arithmetic: 30 levels x 10 bytes = 300-byte paths for 2^30 leaves).
class Tree {
 public:
  struct Proof {
    std::uint64_t index = 0;       // leaf position among sorted keys
    std::uint64_t leaf_count = 0;
    Bytes key;
    Bytes value;
    std::vector<Bytes> path;       // sibling digests, leaf to root
  };

  /// Absence proof: the neighbors that would surround the key. Either side
  /// may be missing at the map boundaries.
  struct AbsenceProof {
    std::optional<Proof> predecessor;
    std::optional<Proof> successor;
  };

  Tree(const std::map<Bytes, Bytes>& entries, std::size_t digest_len = 32);

  const Bytes& root() const { return root_; }
  std::size_t digest_len() const { return digest_len_; }
  std::uint64_t leaf_count() const { return keys_.size(); }

  std::optional<Proof> prove(const Bytes& key) const;
  std::optional<AbsenceProof> prove_absent(const Bytes& key) const;

  static bool verify(const Bytes& root, std::size_t digest_len,
                     const Proof& proof);
  static bool verify_absent(const Bytes& root, std::size_t digest_len,
                            const Bytes& key, const AbsenceProof& proof);

 private:
  std::size_t digest_len_;
  std::vector<Bytes> keys_;
  std::vector<Bytes> values_;
  std::vector<std::vector<Bytes>> levels_;  // levels_[0] = leaf digests
  Bytes root_;

  Proof prove_index(std::size_t i) const;
};

}  // namespace trustrate::merkle
