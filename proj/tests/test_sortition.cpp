#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "trustrate/sortition.hpp"

using namespace trustrate;
using group::Bytes;
using group::Bytes32;
using group::Element;
using group::SeededRng;

namespace {

Bytes bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

std::vector<sortition::AudienceMember> make_audience(std::size_t n,
                                                     std::uint64_t seed) {
  SeededRng rng(seed);
  std::vector<sortition::AudienceMember> audience;
  const Element base = Element::base_point();
  for (std::size_t i = 0; i < n; ++i)
    audience.push_back({i, group::scalar_exp(base, rng.next_scalar())});
  return audience;
}

}  // namespace

TEST_CASE("seed chain is deterministic, key and history sensitive") {
  Bytes32 s0{};
  s0.fill(0x42);
  const auto s1 = sortition::next_seed(s0, bytes("proposer-a"));
  CHECK(s1 == sortition::next_seed(s0, bytes("proposer-a")));
  CHECK(s1 != sortition::next_seed(s0, bytes("proposer-b")));
  CHECK(s1 != s0);

  // Each step consumes the prior output: a 38-step chain never revisits.
  std::vector<Bytes32> chain = {s0};
  Bytes32 cur = s0;
  for (int i = 0; i < 38; ++i) {
    cur = sortition::next_seed(cur, bytes("proposer-" + std::to_string(i)));
    CHECK(std::find(chain.begin(), chain.end(), cur) == chain.end());
    chain.push_back(cur);
  }
}

TEST_CASE("compute_bwait matches the series bound") {
  CHECK(sortition::compute_bwait(0.75, std::pow(2.0, -30)) == 38);
  CHECK(sortition::compute_bwait(0.75, 0.25) == 2);

  // Smaller epsilon never shrinks the waiting period.
  int prev = 0;
  for (double eps : {0.5, 0.1, 0.01, 1e-6, 1e-9}) {
    const int k = sortition::compute_bwait(0.75, eps);
    CHECK(k >= prev);
    prev = k;
  }
  CHECK_THROWS(sortition::compute_bwait(0.0, 0.5));
  CHECK_THROWS(sortition::compute_bwait(0.75, 0.0));
}

TEST_CASE("vrf_score is deterministic and input separated") {
  Bytes32 seed{};
  seed.fill(7);
  const auto audience = make_audience(2, 1);
  const auto a = sortition::vrf_score(seed, bytes("pid1"), audience[0].pk);
  CHECK(a == sortition::vrf_score(seed, bytes("pid1"), audience[0].pk));
  CHECK(a != sortition::vrf_score(seed, bytes("pid2"), audience[0].pk));
  CHECK(a != sortition::vrf_score(seed, bytes("pid1"), audience[1].pk));
  Bytes32 seed2 = seed;
  seed2[0] ^= 1;
  CHECK(a != sortition::vrf_score(seed2, bytes("pid1"), audience[0].pk));
}

TEST_CASE("select_ring picks the top scores with the ceiling rule") {
  Bytes32 seed{};
  seed.fill(3);
  const auto audience = make_audience(100, 2);
  const Bytes pid = bytes("poll-42");

  auto d1 = sortition::select_ring(seed, pid, audience, 10, 1.0);
  REQUIRE(d1.has_value());
  CHECK(d1->ring.size() == 10);
  auto d2 = sortition::select_ring(seed, pid, audience, 10, 1.5);
  REQUIRE(d2.has_value());
  CHECK(d2->ring.size() == 15);
  auto d3 = sortition::select_ring(seed, pid, audience, 10, 1.41);
  REQUIRE(d3.has_value());
  CHECK(d3->ring.size() == 15);  // ceil(14.1)

  // Capped by the audience size.
  auto d4 = sortition::select_ring(seed, pid, audience, 80, 2.0);
  REQUIRE(d4.has_value());
  CHECK(d4->ring.size() == 100);

  CHECK_FALSE(sortition::select_ring(seed, pid, {}, 10, 1.0).has_value());
}

TEST_CASE("select_ring matches an independent brute-force oracle") {
  Bytes32 seed{};
  seed.fill(9);
  const auto audience = make_audience(10, 5);
  const Bytes pid = bytes("oracle-poll");
  auto draw = sortition::select_ring(seed, pid, audience, 3, 1.0);
  REQUIRE(draw.has_value());

  // Re-hash every member independently and sort (score desc, pk asc).
  std::vector<std::pair<Bytes32, Bytes32>> oracle;  // (score, pk)
  for (const auto& m : audience) {
    Bytes data;
    data.push_back('V');
    auto push_framed = [&](std::span<const std::uint8_t> v) {
      const std::uint64_t len = v.size();
      for (int i = 0; i < 8; ++i)
        data.push_back(static_cast<std::uint8_t>(len >> (8 * i)));
      data.insert(data.end(), v.begin(), v.end());
    };
    push_framed(seed);
    push_framed(pid);
    push_framed(m.pk.serialize());
    oracle.emplace_back(group::hash32(group::HashDomain{"vrf"}, data),
                        m.pk.serialize());
  }
  std::sort(oracle.begin(), oracle.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<Bytes32> expect = {oracle[0].second, oracle[1].second,
                                 oracle[2].second};
  std::sort(expect.begin(), expect.end());
  REQUIRE(draw->ring.size() == 3);
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(draw->ring.members()[i].serialize() == expect[i]);
}

TEST_CASE("ring selection is a pure function of its inputs") {
  Bytes32 seed{};
  seed.fill(0x5c);
  const auto audience = make_audience(64, 8);
  const Bytes pid = bytes("pure");
  auto a = sortition::select_ring(seed, pid, audience, 12, 1.0);
  auto b = sortition::select_ring(seed, pid, audience, 12, 1.0);
  REQUIRE(a.has_value());
  REQUIRE(b.has_value());
  CHECK(a->ring.encoding() == b->ring.encoding());
  CHECK(a->scores == b->scores);
}

TEST_CASE("threshold update follows the published formula") {
  sortition::EpochThreshold t;
  t.epoch = 4;
  t.w = 1.0;
  t.lambda = 1.0;

  t.v_exp = 100;
  t.v_seen = 100;
  auto u = sortition::update_threshold(t);
  CHECK(u.w == doctest::Approx(1.0));
  CHECK(u.epoch == 5);
  CHECK(u.v_exp == 0);
  CHECK(u.v_seen == 0);

  t.v_seen = 50;
  u = sortition::update_threshold(t);
  CHECK(u.w == doctest::Approx(0.5));

  // Reciprocal mode enlarges rings when turnout is low.
  u = sortition::update_threshold(t, sortition::ThresholdMode::kReciprocal);
  CHECK(u.w == doctest::Approx(2.0));

  t.v_exp = 0;
  u = sortition::update_threshold(t);
  CHECK(u.w == doctest::Approx(t.w));

  t.v_exp = 100;
  t.v_seen = 75;
  t.lambda = 1.2;
  u = sortition::update_threshold(t);
  CHECK(u.w == doctest::Approx(1.2 * 0.75));
}

TEST_CASE("normalized update equals the plain one at uniform turnout") {
  sortition::EpochThreshold t;
  t.w = 1.0;
  t.lambda = 1.0;

  // Two polls of very different size, both at 50% turnout.
  std::vector<sortition::PollTurnout> polls = {{10, 5}, {1000, 500}};
  auto norm = sortition::update_threshold_normalized(t, polls, 100.0);
  CHECK(norm.w == doctest::Approx(0.5));

  // Plain variant: v_seen/v_exp = 505/1010 = 0.5 as well.
  t.v_exp = 1010;
  t.v_seen = 505;
  CHECK(sortition::update_threshold(t).w == doctest::Approx(norm.w));

  // Skewed turnout: the big poll no longer dominates. Small poll at 100%,
  // big poll at 10%: normalized average is (1.0 + 0.1)/2 = 0.55.
  std::vector<sortition::PollTurnout> skew = {{10, 10}, {1000, 100}};
  auto norm2 = sortition::update_threshold_normalized(t, skew, 100.0);
  CHECK(norm2.w == doctest::Approx(0.55));
}

TEST_CASE("fairness_delta closed form") {
  CHECK(sortition::fairness_delta(0.5, 100, 0.01) == doctest::Approx(0.5638).epsilon(1e-3));
  CHECK(sortition::fairness_delta(1.0, 100, 0.01) <
        sortition::fairness_delta(0.5, 100, 0.01));
  CHECK(sortition::fairness_delta(0.5, 400, 0.01) <
        sortition::fairness_delta(0.5, 100, 0.01));
  CHECK_THROWS(sortition::fairness_delta(0.0, 100, 0.01));
}

TEST_CASE("group representation stays inside the fairness band") {
  // 50% group in a 2000-member audience, ring of 200, over seeded draws.
  const auto audience = make_audience(2000, 77);
  const double x = 0.5;
  const std::size_t group_cut = 1000;  // first half by uuid
  const double eps = 0.01;
  const double delta = sortition::fairness_delta(x, 200, eps);

  int violations = 0;
  const int draws = 120;
  Bytes32 seed{};
  for (int d = 0; d < draws; ++d) {
    seed = sortition::next_seed(seed, bytes("proposer-" + std::to_string(d)));
    auto draw = sortition::select_ring(seed, bytes("fair-poll"), audience, 200, 1.0);
    REQUIRE(draw.has_value());
    std::size_t in_group = 0;
    for (const auto& m : audience) {
      if (m.uuid >= group_cut) continue;
      if (draw->scores.contains(m.pk.serialize())) ++in_group;
    }
    const double frac = double(in_group) / 200.0;
    if (frac < x * (1 - delta) || frac > x * (1 + delta)) ++violations;
  }
  // Band violation probability is at most eps; allow generous slack.
  CHECK(violations <= std::max(3, int(draws * eps * 3)));
}
