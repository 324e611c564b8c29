#include <gtest/gtest.h>

#include <map>

#include "icstack/core/complexity.hpp"
#include "icstack/ic/pease.hpp"
#include "icstack/ic/primitives.hpp"
#include "icstack/ic/runner.hpp"
#include "icstack/ic/timing.hpp"

using namespace icstack;

namespace {

RunOptions base(Algorithm a, std::size_t n = 4, std::uint64_t seed = 1) {
  RunOptions o;
  o.algo = a;
  o.cfg.n = n;
  o.cfg.t = SystemConfig::max_faults(n);
  o.seed = seed;
  o.cfg.end_barrier = auto_end_barrier(a, n, o.clock);
  return o;
}

void corrupt(RunOptions& o, NodeId id, BehaviorSpec spec) {
  o.adv.corrupted.push_back(id);
  o.adv.behaviors[id] = std::move(spec);
}

BehaviorSpec behavior(Behavior b) {
  BehaviorSpec s;
  s.kind = b;
  return s;
}

Certificate make_cert(crypto::KeyRing& ring, NodeId subject, const Value& v) {
  Certificate c{subject, v, {}};
  for (std::uint32_t i = 1; i <= 3; ++i) c.endorsements.push_back(crypto::NodeCrypto(ring, NodeId(i)).endorse(subject, v));
  return c;
}

}  // namespace

TEST(FinalizeV, AppliesConsensusOutcomes) {
  crypto::KeyRing ring(4, 1, crypto::ProofMode::Signature);
  ResultVector V(4);
  V.set(NodeId(1), Value("a"));
  V.set(NodeId(3), Value("c"));
  V.set(NodeId(4), Value("d"));
  std::vector<std::optional<Certificate>> C(4);
  C[0] = make_cert(ring, NodeId(1), Value("a"));
  C[2] = make_cert(ring, NodeId(3), Value("c"));
  const auto retrieve = finalize_v(V, C, {1, 1, 0, 1});
  EXPECT_EQ(retrieve, std::vector<NodeId>{NodeId(2)});
  EXPECT_TRUE(V.is_final(NodeId(1)));
  EXPECT_EQ(V[NodeId(1)], Value("a"));
  EXPECT_FALSE(V.is_final(NodeId(2)));
  EXPECT_TRUE(V.is_final(NodeId(3)));
  EXPECT_TRUE(V[NodeId(3)].is_null());
  EXPECT_FALSE(C[2].has_value());
  EXPECT_EQ(V[NodeId(4)], Value("d"));
  EXPECT_TRUE(V.is_final(NodeId(4)));
  // Final slots are left alone on a second pass.
  EXPECT_EQ(finalize_v(V, C, {0, 1, 1, 0}), std::vector<NodeId>{NodeId(2)});
  EXPECT_EQ(V[NodeId(1)], Value("a"));
}

TEST(Composition, GracefulCountsMatchClosedForms) {
  for (std::size_t n : {4, 7}) {
    for (auto p : {Primitive::IC_MC_RBB, Primitive::IC_BC_RBB}) {
      PrimitiveOptions o;
      o.n = n;
      const auto r = run_primitive(p, o);
      EXPECT_EQ(r.messages, expected_messages(p, n)) << to_string(p) << " n=" << n;
      EXPECT_EQ(r.signature_ops, expected_signature_ops(p, n)) << to_string(p) << " n=" << n;
    }
  }
  PrimitiveOptions o;
  EXPECT_EQ(run_primitive(Primitive::IC_MC_RBB, o).messages, 2896u);
  const auto bc = run_primitive(Primitive::IC_BC_RBB, o);
  EXPECT_EQ(bc.messages, 1776u);
  EXPECT_EQ(bc.signature_ops, 96u);
}

TEST(Composition, FaultFreeVectorHoldsEveryValue) {
  for (auto a : {Algorithm::PEASE, Algorithm::MC_RBB, Algorithm::BC_RBB, Algorithm::EIC}) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const RunOptions o = base(a, 4, seed);
      const RunReport r = run_ic(o);
      ASSERT_TRUE(check_properties(o, r).ok()) << to_string(a);
      for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j) {
          EXPECT_EQ(r.outcomes[0][i].values()[j], default_value(NodeId::from_idx(j), 0)) << to_string(a);
        }
      }
    }
  }
}

TEST(Composition, CrashedNodeSlotIsNull) {
  for (auto a : {Algorithm::PEASE, Algorithm::MC_RBB, Algorithm::BC_RBB}) {
    RunOptions o = base(a);
    BehaviorSpec c = behavior(Behavior::Crash);
    c.crash_at = 0;
    corrupt(o, NodeId(3), c);
    const RunReport r = run_ic(o);
    ASSERT_TRUE(check_properties(o, r).ok()) << to_string(a);
    for (std::size_t i : {0, 1, 3}) {
      EXPECT_TRUE(r.outcomes[0][i].values()[2].is_null()) << to_string(a);
      EXPECT_EQ(r.outcomes[0][i].values()[0], Value("v1")) << to_string(a);
    }
  }
}

TEST(Composition, WithheldFinalIsRecoveredByRetrieval) {
  std::size_t recovered = 0;
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    RunOptions o = base(Algorithm::BC_RBB, 4, seed);
    BehaviorSpec w = behavior(Behavior::WithholdFinal);
    w.subset = {NodeId(2), NodeId(3)};
    corrupt(o, NodeId(2), w);
    const RunReport r = run_ic(o);
    const auto v = check_properties(o, r);
    ASSERT_TRUE(v.ok()) << "seed " << seed << ": " << (v.violations.empty() ? "" : v.violations[0]);
    const Value& slot2 = r.outcomes[0][0].values()[1];
    if (!slot2.is_null()) {
      EXPECT_EQ(slot2, Value("v2"));
      if (r.retrieves > 0) ++recovered;
    }
  }
  EXPECT_GT(recovered, 0u);
}

namespace {

/// Corrupted node that runs the honest protocol but withholds its own
/// c-final from everyone except node 1 and answers every retrieve request
/// at once with a value carrying a forged certificate.
class Liar final : public sim::Process {
 public:
  Liar(IcParams p, NodeId self)
      : inner_(std::make_unique<IcNode>(p, self, std::vector<Value>{Value("v4")}),
               BehaviorSpec{Behavior::WithholdFinal, 0, {NodeId(1), self}, {}, 0}, AdversaryTiming{}, 99) {}
  void on_start(sim::Env& env) override { inner_.on_start(env); }
  void on_timer(sim::Env& env, std::uint64_t id) override { inner_.on_timer(env, id); }
  void on_flush(sim::Env& env) override { inner_.on_flush(env); }
  void on_message(sim::Env& env, NodeId src, const MessagePtr& m) override {
    if (std::holds_alternative<RetrieveReq>(m->body)) {
      std::vector<crypto::Endorsement> forged;
      for (std::uint32_t i = 1; i <= 4; ++i) {
        auto e = env.crypto().endorse(NodeId(m->hdr.slot), Value("fake"));
        e.endorser = NodeId(i);
        forged.push_back(e);
      }
      env.send_at(src, make_message(m->hdr, Retrieved{Value("fake"), forged}), env.global_now() + 1);
    }
    inner_.on_message(env, src, m);
  }

 private:
  ByzantineNode inner_;
};

}  // namespace

TEST(Composition, ForgedRetrieveReplyIsRejected) {
  std::size_t retrieved = 0;
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    crypto::KeyRing ring(4, seed, crypto::ProofMode::Signature);
    sim::NetOptions no;
    no.n = 4;
    no.seed = seed;
    sim::Simulator s(no, ring);
    IcParams p;
    p.algo = Algorithm::BC_RBB;
    p.end_barrier = auto_end_barrier(Algorithm::BC_RBB, 4, ClockParams{});
    p.coin = CoinSpec{CoinMode::Seeded, seed};
    std::vector<IcNode*> honest;
    for (std::uint32_t i = 1; i <= 3; ++i) {
      auto node = std::make_unique<IcNode>(p, NodeId(i), std::vector<Value>{default_value(NodeId(i), 0)});
      honest.push_back(node.get());
      s.set_process(NodeId(i), std::move(node));
    }
    s.set_process(NodeId(4), std::make_unique<Liar>(p, NodeId(4)), true);
    s.start_all();
    s.run();
    const ResultVector& ref = honest[0]->vector();
    for (auto* h : honest) {
      ASSERT_TRUE(h->done()) << "seed " << seed;
      EXPECT_EQ(h->vector(), ref) << "seed " << seed;
      EXPECT_NE(h->vector()[NodeId(4)], Value("fake")) << "seed " << seed;
      if (h->retrieves_sent() > 0) {
        ++retrieved;
        EXPECT_EQ(h->vector()[NodeId(4)], Value("v4"));
      }
    }
    if (honest[1]->retrieves_sent() + honest[2]->retrieves_sent() > 0) EXPECT_GT(s.metrics().invalid_drops, 0u);
  }
  EXPECT_GT(retrieved, 0u);
}

TEST(Eventual, UpcallsAreOncePerSlotAndConsistent) {
  for (auto b : {Behavior::Equivocate, Behavior::Crash, Behavior::SpamPhases, Behavior::Silent}) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      RunOptions o = base(Algorithm::EIC, 4, seed);
      o.adv = standard_adversary(b, 4, 1, seed, 200);
      const RunReport r = run_ic(o);
      ASSERT_TRUE(check_properties(o, r).ok()) << to_string(b) << " seed " << seed;
      std::map<std::uint32_t, Value> agreed;
      for (std::size_t i = 0; i < 4; ++i) {
        if (!r.honest[i]) continue;
        std::set<std::uint32_t> slots;
        Time last = 0;
        for (const auto& u : r.upcalls[i]) {
          EXPECT_TRUE(slots.insert(u.slot.value).second) << "slot delivered twice";
          EXPECT_GE(u.global, last);
          last = u.global;
          auto [it, fresh] = agreed.emplace(u.slot.value, u.value);
          if (!fresh) EXPECT_EQ(it->second, u.value);
          if (r.honest[u.slot.idx()]) EXPECT_EQ(u.value, default_value(u.slot, 0));
        }
        for (std::size_t j = 0; j < 4; ++j) {
          if (r.honest[j]) EXPECT_TRUE(slots.count(static_cast<std::uint32_t>(j + 1))) << "honest slot missing";
        }
      }
    }
  }
}

TEST(RelayRounds, FaultFreeRunNeedsNoTimeouts) {
  for (std::size_t n : {4, 7}) {
    const RunOptions o = base(Algorithm::PEASE, n);
    const RunReport r = run_ic(o);
    EXPECT_TRUE(check_properties(o, r).ok());
    EXPECT_EQ(r.timeouts, 0u);
    EXPECT_EQ(r.total_messages, expected_pease_messages(n, o.cfg.t));
    EXPECT_LT(*r.makespan(), o.cfg.round_timeout);
  }
}

TEST(RelayRounds, CrashForcesEveryRoundToTimeOut) {
  RunOptions o = base(Algorithm::PEASE);
  BehaviorSpec c = behavior(Behavior::Crash);
  c.crash_at = 0;
  corrupt(o, NodeId(2), c);
  const RunReport r = run_ic(o);
  EXPECT_TRUE(check_properties(o, r).ok());
  EXPECT_GT(r.timeouts, 0u);
  EXPECT_GE(*r.makespan(), static_cast<Time>(o.cfg.t + 1) * o.cfg.round_timeout - o.clock.drift);

  const RunReport mc = run_ic([&] {
    RunOptions m = o;
    m.algo = Algorithm::MC_RBB;
    m.cfg.end_barrier = auto_end_barrier(m.algo, 4, m.clock);
    return m;
  }());
  EXPECT_LT(*mc.makespan(), *r.makespan());
}

TEST(RelayRounds, MessagesTimedAtTheDeadlineKeepAgreement) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    for (std::size_t n : {4, 7}) {
      RunOptions o = base(Algorithm::PEASE, n, seed);
      o.adv = standard_adversary(Behavior::DelayToBarrier, n, o.cfg.t, seed, 0);
      const RunReport r = run_ic(o);
      const auto v = check_properties(o, r);
      EXPECT_TRUE(v.agreement) << "seed " << seed << " n=" << n;
      EXPECT_TRUE(v.termination) << "seed " << seed << " n=" << n;
      if (!r.assumption_breach) EXPECT_TRUE(v.validity) << "seed " << seed << " n=" << n;
    }
  }
}

TEST(RelayRounds, NodeLimit) {
  RunOptions o = base(Algorithm::PEASE, 16);
  EXPECT_THROW((void)run_ic(o), ConfigError);
  EXPECT_NO_THROW((void)run_ic(base(Algorithm::PEASE, 13)));
}

TEST(Paths, PackingHelpers) {
  std::uint64_t p = 0;
  p = eig::append(p, NodeId(3));
  p = eig::append(p, NodeId(1));
  EXPECT_EQ(eig::length(p), 2u);
  EXPECT_TRUE(eig::contains(p, NodeId(3)));
  EXPECT_FALSE(eig::contains(p, NodeId(2)));
  EXPECT_TRUE(eig::well_formed(p, 4));
  EXPECT_FALSE(eig::well_formed(p, 2));
  EXPECT_FALSE(eig::well_formed(0x33, 4));
}

TEST(ParallelInstances, MatchSequentialRuns) {
  for (auto a : {Algorithm::MC_RBB, Algorithm::BC_RBB, Algorithm::PEASE}) {
    RunOptions par = base(a);
    par.parallel_instances = 3;
    par.cfg.end_barrier = auto_end_barrier(a, 4, par.clock, 3);
    const RunReport pr = run_ic(par);
    ASSERT_TRUE(check_properties(par, pr).ok()) << to_string(a);
    ASSERT_EQ(pr.outcomes.size(), 3u);
    for (std::uint32_t k = 0; k < 3; ++k) {
      RunOptions one = base(a);
      std::vector<Value> vals;
      for (std::size_t i = 0; i < 4; ++i) vals.push_back(default_value(NodeId::from_idx(i), k));
      one.values = vals;
      const RunReport sr = run_ic(one);
      for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_EQ(pr.outcomes[k][i], sr.outcomes[0][i]) << to_string(a) << " instance " << k;
      }
    }
  }
}

TEST(ParallelInstances, FiftyBroadcastInstancesStayValid) {
  RunOptions o = base(Algorithm::BC_RBB);
  o.parallel_instances = 50;
  o.cfg.end_barrier = auto_end_barrier(o.algo, 4, o.clock, 50);
  const RunReport r = run_ic(o);
  EXPECT_TRUE(check_properties(o, r).ok());
  EXPECT_EQ(r.late_drops, 0u);
}

TEST(Authenticators, CompositionHoldsUnderEquivocation) {
  for (auto a : {Algorithm::BC_RBB, Algorithm::MC_RBB}) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      RunOptions o = base(a, 4, seed);
      o.proof = crypto::ProofMode::Authenticator;
      o.adv = standard_adversary(Behavior::Equivocate, 4, 1, seed, 100);
      const RunReport r = run_ic(o);
      EXPECT_TRUE(check_properties(o, r).ok()) << to_string(a) << " seed " << seed;
    }
  }
}

TEST(Timing, DisseminationStaysWithinTheClockTables) {
  for (auto a : {Algorithm::MC_RBB, Algorithm::BC_RBB}) {
    for (std::size_t n : {4, 7}) {
      for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto c = check_dissemination_timing(base(a, n, seed));
        EXPECT_TRUE(c.ok()) << to_string(a) << " n=" << n << " seed " << seed;
        EXPECT_EQ(c.obtained, c.expected);
        for (const auto& row : c.rows) EXPECT_TRUE(row.ok()) << row.step;
      }
    }
  }
  EXPECT_THROW((void)check_dissemination_timing(base(Algorithm::PEASE)), ConfigError);
}

TEST(Validation, RejectsBadAdversaries) {
  RunOptions o = base(Algorithm::MC_RBB);
  o.adv.corrupted = {NodeId(1), NodeId(2)};
  EXPECT_THROW((void)run_ic(o), ConfigError);

  o = base(Algorithm::MC_RBB);
  o.adv.behaviors[NodeId(2)] = behavior(Behavior::Crash);
  EXPECT_THROW((void)run_ic(o), ConfigError);

  o = base(Algorithm::MC_RBB);
  o.adv.corrupted = {NodeId(5)};
  EXPECT_THROW((void)run_ic(o), ConfigError);

  o = base(Algorithm::MC_RBB);
  o.values = std::vector<Value>{Value("a")};
  EXPECT_THROW((void)run_ic(o), ConfigError);

  o = base(Algorithm::MC_RBB);
  o.parallel_instances = 0;
  EXPECT_THROW((void)run_ic(o), ConfigError);
}

TEST(Validation, LowBarrierWarns) {
  RunOptions o = base(Algorithm::MC_RBB);
  o.cfg.end_barrier = 5;
  const RunReport r = run_ic(o);
  EXPECT_FALSE(r.warnings.empty());
  const auto v = check_properties(o, r);
  EXPECT_FALSE(v.validity_checked);
  EXPECT_TRUE(v.agreement);
}

TEST(Fuzz, PropertiesHoldAcrossBehaviors) {
  for (auto a : {Algorithm::PEASE, Algorithm::MC_RBB, Algorithm::BC_RBB, Algorithm::EIC}) {
    for (auto b : {Behavior::Crash, Behavior::Equivocate, Behavior::WithholdFinal, Behavior::DelayToBarrier,
                   Behavior::SpamPhases, Behavior::Silent}) {
      for (std::size_t n : {4, 7}) {
        for (std::uint64_t seed = 1; seed <= 4; ++seed) {
          RunOptions o = base(a, n, seed);
          const Time horizon = a == Algorithm::PEASE ? (o.cfg.t + 1) * o.cfg.round_timeout : o.cfg.end_barrier + 50;
          o.adv = standard_adversary(b, n, o.cfg.t, seed, horizon);
          const RunReport r = run_ic(o);
          const auto v = check_properties(o, r);
          EXPECT_TRUE(v.ok()) << to_string(a) << ' ' << to_string(b) << " n=" << n << " seed " << seed << ": "
                              << (v.violations.empty() ? "" : v.violations[0]);
        }
      }
    }
  }
}
