#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "trustrate/merkle.hpp"

using namespace trustrate;
using group::Bytes;
using merkle::Tree;

namespace {

Bytes bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

std::map<Bytes, Bytes> make_entries(int n) {
  std::map<Bytes, Bytes> entries;
  for (int i = 0; i < n; ++i)
    entries[bytes("key-" + std::to_string(1000 + i))] =
        bytes("value-" + std::to_string(i));
  return entries;
}

}  // namespace

TEST_CASE("root is deterministic and content sensitive") {
  const auto entries = make_entries(7);
  Tree a(entries);
  Tree b(entries);
  CHECK(a.root() == b.root());
  CHECK(a.root().size() == 32);

  auto modified = entries;
  modified[bytes("key-1003")] = bytes("changed");
  CHECK(Tree(modified).root() != a.root());

  auto extended = entries;
  extended[bytes("key-9999")] = bytes("x");
  CHECK(Tree(extended).root() != a.root());
}

TEST_CASE("inclusion proofs verify and reject tampering") {
  const auto entries = make_entries(13);
  Tree tree(entries);
  for (const auto& [k, v] : entries) {
    auto proof = tree.prove(k);
    REQUIRE(proof.has_value());
    CHECK(proof->value == v);
    CHECK(Tree::verify(tree.root(), 32, *proof));

    auto bad = *proof;
    bad.value = bytes("forged");
    CHECK_FALSE(Tree::verify(tree.root(), 32, bad));

    auto bad2 = *proof;
    if (!bad2.path.empty()) {
      bad2.path[0][0] ^= 1;
      CHECK_FALSE(Tree::verify(tree.root(), 32, bad2));
    }
    auto bad3 = *proof;
    bad3.index ^= 1;
    CHECK_FALSE(Tree::verify(tree.root(), 32, bad3));
  }
  CHECK_FALSE(tree.prove(bytes("missing")).has_value());
}

TEST_CASE("absence proofs cover interior and boundary keys") {
  const auto entries = make_entries(9);
  Tree tree(entries);

  // Interior gap.
  auto absent = tree.prove_absent(bytes("key-1003x"));
  REQUIRE(absent.has_value());
  CHECK(Tree::verify_absent(tree.root(), 32, bytes("key-1003x"), *absent));
  // The same proof must not work for a different key outside the gap.
  CHECK_FALSE(Tree::verify_absent(tree.root(), 32, bytes("key-1005x"), *absent));

  // Before the first key.
  auto low = tree.prove_absent(bytes("aaa"));
  REQUIRE(low.has_value());
  CHECK_FALSE(low->predecessor.has_value());
  CHECK(Tree::verify_absent(tree.root(), 32, bytes("aaa"), *low));

  // After the last key.
  auto high = tree.prove_absent(bytes("zzz"));
  REQUIRE(high.has_value());
  CHECK_FALSE(high->successor.has_value());
  CHECK(Tree::verify_absent(tree.root(), 32, bytes("zzz"), *high));

  // A present key has no absence proof.
  CHECK_FALSE(tree.prove_absent(bytes("key-1004")).has_value());
}

TEST_CASE("empty tree") {
  Tree tree({});
  CHECK(tree.leaf_count() == 0);
  auto absent = tree.prove_absent(bytes("anything"));
  REQUIRE(absent.has_value());
  CHECK(Tree::verify_absent(tree.root(), 32, bytes("anything"), *absent));
  CHECK_FALSE(tree.prove(bytes("anything")).has_value());
}

TEST_CASE("single entry tree") {
  std::map<Bytes, Bytes> one = {{bytes("k"), bytes("v")}};
  Tree tree(one);
  auto proof = tree.prove(bytes("k"));
  REQUIRE(proof.has_value());
  CHECK(proof->path.empty());
  CHECK(Tree::verify(tree.root(), 32, *proof));
}

TEST_CASE("truncated digests reproduce the compact proof arithmetic") {
  const auto entries = make_entries(64);
  Tree tree(entries, 10);
  auto proof = tree.prove(bytes("key-1010"));
  REQUIRE(proof.has_value());
  CHECK(Tree::verify(tree.root(), 10, *proof));
  CHECK(tree.root().size() == 10);
  for (const auto& sibling : proof->path) CHECK(sibling.size() == 10);
  // 64 leaves -> 6 levels of 10-byte digests.
  CHECK(proof->path.size() == 6);
  // A 2^30-leaf tree would carry 30 siblings: 300 bytes of path.
  CHECK(30 * 10 == 300);

  // Digest lengths do not mix.
  CHECK_FALSE(Tree::verify(Tree(entries, 32).root(), 32, *proof));
}

TEST_CASE("proofs are position binding across trees") {
  // A proof from one tree must not verify against another root.
  Tree a(make_entries(16));
  Tree b(make_entries(17));
  auto proof = a.prove(bytes("key-1005"));
  REQUIRE(proof.has_value());
  CHECK_FALSE(Tree::verify(b.root(), 32, *proof));
}
