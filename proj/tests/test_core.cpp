#include <gtest/gtest.h>

#include "icstack/core/complexity.hpp"
#include "icstack/core/config.hpp"
#include "icstack/core/quorum.hpp"
#include "icstack/core/report.hpp"
#include "icstack/core/types.hpp"

using namespace icstack;

TEST(Quorum, FourOne) {
  const auto q = quorum_thresholds(4, 1);
  EXPECT_EQ(q.n_minus_t, 3u);
  EXPECT_EQ(q.echo_threshold, 3u);
  EXPECT_EQ(q.ready_threshold, 2u);
  EXPECT_EQ(q.decide_threshold, 3u);
}

TEST(Quorum, SevenTwo) {
  const auto q = quorum_thresholds(7, 2);
  EXPECT_EQ(q.n_minus_t, 5u);
  EXPECT_EQ(q.echo_threshold, 5u);
  EXPECT_EQ(q.ready_threshold, 3u);
  EXPECT_EQ(q.decide_threshold, 5u);
}

TEST(Quorum, RejectsTooManyFaults) {
  EXPECT_THROW((void)quorum_thresholds(10, 4), ConfigError);
  EXPECT_THROW((void)quorum_thresholds(3, 1), ConfigError);
  EXPECT_THROW((void)quorum_thresholds(4, 0), ConfigError);
}

TEST(Quorum, ErrorNamesTheBound) {
  try {
    (void)quorum_thresholds(10, 4);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("floor((n-1)/3)"), std::string::npos) << e.what();
  }
}

TEST(Quorum, ResilienceIdentitiesHoldForAllValidConfigs) {
  for (std::size_t n = 4; n <= 64; ++n) {
    for (std::size_t t = 1; t <= (n - 1) / 3; ++t) {
      const auto q = quorum_thresholds(n, t);
      EXPECT_LT(3 * t, n);
      EXPECT_GE(q.n_minus_t, 2 * t + 1);
      // Two echo quorums intersect in an honest node.
      EXPECT_GT(2 * q.echo_threshold, n + t);
      EXPECT_LE(q.echo_threshold, n - t);
      EXPECT_LE(q.decide_threshold, n - t);
    }
  }
}

TEST(Quorum, UncheckedAllowsDegenerate) {
  const auto q = quorum_thresholds_unchecked(1, 0);
  EXPECT_EQ(q.n_minus_t, 1u);
  EXPECT_EQ(q.decide_threshold, 1u);
}

TEST(Complexity, PaperExamples) {
  EXPECT_EQ(expected_messages(Primitive::RBB, 4), 36u);
  EXPECT_EQ(expected_messages(Primitive::IC_BC_RBB, 4), 1776u);
  EXPECT_EQ(expected_messages(Primitive::IC_MC_RBB, 4), 2896u);
  EXPECT_EQ(expected_signature_ops(Primitive::CB, 4), 24u);
  EXPECT_EQ(expected_signature_ops(Primitive::IC_BC_RBB, 4), 96u);
  EXPECT_EQ(expected_signature_ops(Primitive::MU, 4), 0u);
}

TEST(Complexity, AllPolynomials) {
  for (std::uint64_t n = 1; n <= 20; ++n) {
    EXPECT_EQ(expected_messages(Primitive::MU, n), n);
    EXPECT_EQ(expected_messages(Primitive::RBB, n), 2 * n * n + n);
    EXPECT_EQ(expected_messages(Primitive::CB, n), 3 * n);
    EXPECT_EQ(expected_messages(Primitive::BC_RBB, n), 6 * n * n * n + 3 * n * n);
    EXPECT_EQ(expected_messages(Primitive::MC_RBB, n), 10 * n * n * n + 5 * n * n);
    EXPECT_EQ(expected_messages(Primitive::IC_BC_RBB, n), 6 * n * n * n * n + 3 * n * n * n + 3 * n * n);
    EXPECT_EQ(expected_messages(Primitive::IC_MC_RBB, n), 10 * n * n * n * n + 5 * n * n * n + n * n);
    EXPECT_EQ(expected_signature_ops(Primitive::CB, n), n * n + 2 * n);
    EXPECT_EQ(expected_signature_ops(Primitive::IC_BC_RBB, n), n * n * n + 2 * n * n);
    EXPECT_EQ(expected_signature_ops(Primitive::RBB, n), 0u);
  }
  EXPECT_EQ(expected_pease_messages(4, 1), 32u);
  EXPECT_EQ(expected_pease_messages(7, 2), 147u);
}

TEST(Complexity, StrictlyIncreasingInN) {
  for (auto p : {Primitive::MU, Primitive::RBB, Primitive::CB, Primitive::BC_RBB, Primitive::MC_RBB,
                 Primitive::IC_BC_RBB, Primitive::IC_MC_RBB}) {
    for (std::uint64_t n = 1; n < 40; ++n) EXPECT_LT(expected_messages(p, n), expected_messages(p, n + 1));
  }
}

TEST(Complexity, NamesRoundTrip) {
  for (auto p : {Primitive::MU, Primitive::RBB, Primitive::CB, Primitive::BC_RBB, Primitive::MC_RBB,
                 Primitive::IC_BC_RBB, Primitive::IC_MC_RBB}) {
    EXPECT_EQ(primitive_from_string(to_string(p)), p);
  }
  EXPECT_FALSE(primitive_from_string("paxos").has_value());
}

TEST(Config, Validate) {
  SystemConfig c;
  EXPECT_NO_THROW(c.validate());
  c.t = 2;
  EXPECT_THROW(c.validate(), ConfigError);
  c = SystemConfig{};
  c.end_barrier = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = SystemConfig{};
  c.round_timeout = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = SystemConfig{};
  c.buffer_window = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = SystemConfig{};
  c.n = 1;
  c.t = 0;
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, Bounds) {
  ClockParams c{1, 2, 10};
  EXPECT_EQ(multicast_obtain_bound(c), 17);
  EXPECT_EQ(consistent_obtain_bound(c, 4), 50);
  EXPECT_EQ(round_timeout_bound(c), 17);
  EXPECT_EQ(SystemConfig::max_faults(4), 1u);
  EXPECT_EQ(SystemConfig::max_faults(7), 2u);
  EXPECT_EQ(SystemConfig::max_faults(10), 3u);
}

TEST(Value, NullIsDistinctFromEveryPayload) {
  EXPECT_NE(Value::null(), Value(""));
  EXPECT_NE(Value::null(), Value("x"));
  EXPECT_EQ(Value("x"), Value::of("x"));
  EXPECT_TRUE(Value().is_null());
  EXPECT_FALSE(Value("").is_null());
  EXPECT_EQ(Value(std::string("a\0b", 3)), Value(std::string("a\0b", 3)));
  EXPECT_NE(Value(std::string("a\0b", 3)), Value(std::string("a\0c", 3)));
}

TEST(ResultVector, FinalSlotsNeverChange) {
  ResultVector v(4);
  EXPECT_EQ(v.size(), 4u);
  v.set(NodeId(1), Value("a"));
  v.set(NodeId(1), Value("b"));
  EXPECT_EQ(v[NodeId(1)], Value("b"));
  v.finalize(NodeId(1), Value("c"));
  EXPECT_TRUE(v.is_final(NodeId(1)));
  EXPECT_THROW(v.set(NodeId(1), Value("d")), ProtocolMisuse);
  EXPECT_THROW(v.finalize(NodeId(1), Value("d")), ProtocolMisuse);
  EXPECT_EQ(v[NodeId(1)], Value("c"));
  EXPECT_FALSE(v.complete());
  for (std::uint32_t i = 2; i <= 4; ++i) v.finalize(NodeId(i), Value::null());
  EXPECT_TRUE(v.complete());
}

TEST(Report, MakespanNeedsEveryHonestNode) {
  RunReport r;
  r.honest = {true, true, false, true};
  r.decision_time = {5, 9, std::nullopt, 7};
  EXPECT_EQ(r.makespan(), 9);
  r.decision_time[3].reset();
  EXPECT_FALSE(r.makespan().has_value());
}
