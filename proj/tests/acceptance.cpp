// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "cb_search.hpp"
#include "icstack/core/complexity.hpp"
#include "icstack/ic/primitives.hpp"
#include "icstack/ic/runner.hpp"
#include "icstack/ic/timing.hpp"

using namespace icstack;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

RunOptions base(Algorithm a, std::size_t n, std::uint64_t seed) {
  RunOptions o;
  o.algo = a;
  o.cfg.n = n;
  o.cfg.t = SystemConfig::max_faults(n);
  o.seed = seed;
  o.cfg.end_barrier = auto_end_barrier(a, n, o.clock);
  return o;
}

const Algorithm kAlgos[] = {Algorithm::PEASE, Algorithm::MC_RBB, Algorithm::BC_RBB, Algorithm::EIC};
const Behavior kBehaviors[] = {Behavior::Crash, Behavior::Equivocate, Behavior::WithholdFinal,
                               Behavior::DelayToBarrier, Behavior::SpamPhases};

Verdict complexity() {
  Verdict v;
  std::size_t checked = 0;
  for (std::uint64_t n : {4, 7, 10, 13}) {
    for (auto p : {Primitive::MU, Primitive::RBB, Primitive::CB, Primitive::BC_RBB, Primitive::MC_RBB,
                   Primitive::IC_BC_RBB, Primitive::IC_MC_RBB}) {
      PrimitiveOptions o;
      o.n = n;
      const auto r = run_primitive(p, o);
      const auto want = expected_messages(p, n);
      const auto want_sig = expected_signature_ops(p, n);
      if (r.messages != want || r.signature_ops != want_sig) {
        v.fail(std::string(to_string(p)) + " n=" + std::to_string(n) + ": counted " +
               std::to_string(r.messages) + " messages / " + std::to_string(r.signature_ops) +
               " signature ops, closed form " + std::to_string(want) + " / " + std::to_string(want_sig));
      }
      ++checked;
    }
  }
  if (v.pass) v.detail = std::to_string(checked) + " (primitive, n) pairs match exactly";
  return v;
}

Verdict fuzzing(std::uint64_t seeds) {
  Verdict v;
  std::uint64_t runs = 0;
  std::uint64_t validity_checked = 0;
  std::uint32_t worst_phase = 0;
  for (std::size_t n : {4, 7}) {
    for (auto a : kAlgos) {
      for (auto b : kBehaviors) {
        for (std::uint64_t seed = 1; seed <= seeds; ++seed) {
          RunOptions o = base(a, n, seed);
          const Time horizon =
              a == Algorithm::PEASE ? static_cast<Time>(o.cfg.t + 1) * o.cfg.round_timeout : o.cfg.end_barrier + 50;
          o.adv = standard_adversary(b, n, o.cfg.t, seed, horizon);
          const RunReport r = run_ic(o);
          const auto pv = check_properties(o, r);
          ++runs;
          if (pv.validity_checked) ++validity_checked;
          worst_phase = std::max(worst_phase, r.max_consensus_phase);
          if (!pv.ok()) {
            v.fail(std::string(to_string(a)) + " " + std::string(to_string(b)) + " n=" + std::to_string(n) +
                   " seed " + std::to_string(seed) + ": " + pv.violations.front());
          }
        }
      }
    }
  }
  if (v.pass) {
    v.detail = std::to_string(runs) + " runs, no violations (validity asserted in " +
               std::to_string(validity_checked) + "; highest consensus phase " + std::to_string(worst_phase) + ")";
  }
  return v;
}

Verdict cb_uniqueness() {
  Verdict v;
  std::size_t scripts = 0;
  for (auto mode : {crypto::ProofMode::Signature, crypto::ProofMode::Authenticator}) {
    const auto r = icstack::testing::cb_uniqueness_search(mode);
    scripts += r.scripts;
    if (r.violations) v.fail(std::to_string(r.violations) + " scripts certify two values; " + r.first_violation);
    if (r.certified == 0) v.fail("search never produced a certificate");
  }
  if (v.pass) v.detail = std::to_string(scripts) + " adversary scripts, no conflicting certificates";
  return v;
}

Verdict timing(std::uint64_t seeds) {
  Verdict v;
  std::ostringstream summary;
  for (auto a : {Algorithm::MC_RBB, Algorithm::BC_RBB}) {
    for (std::size_t n : {4, 7}) {
      Time worst = -1;
      Time bound = 0;
      for (std::uint64_t seed = 1; seed <= seeds; ++seed) {
        for (int adv = 0; adv < 3; ++adv) {
          RunOptions o = base(a, n, seed);
          if (adv == 1) o.adv = standard_adversary(Behavior::Equivocate, n, o.cfg.t, seed, 100);
          if (adv == 2) o.adv = standard_adversary(Behavior::DelayToBarrier, n, o.cfg.t, seed, 100);
          const auto c = check_dissemination_timing(o);
          worst = std::max(worst, c.worst_obtain);
          bound = c.obtain_bound;
          if (!c.ok()) {
            std::string why = std::string(to_string(a)) + " n=" + std::to_string(n) + " seed " + std::to_string(seed);
            for (const auto& row : c.rows) {
              if (!row.ok()) why += ": step " + row.step + " exceeded its bound";
            }
            if (c.obtained != c.expected) why += ": some honest value was not obtained";
            v.fail(why);
          }
        }
      }
      summary << to_string(a) << " n=" << n << " obtain " << worst << "<=" << bound << "; ";
    }
  }
  if (v.pass) v.detail = summary.str() + "all table rows hold";
  return v;
}

/// Corrupted sender withholds its c-final from everyone outside `subset`.
struct RecoveryRun {
  bool outcome_one = false;
  bool ok = true;
  std::string why;
};

RecoveryRun recovery_run(std::size_t n, NodeId bad, const std::vector<NodeId>& subset, std::uint64_t seed) {
  const std::size_t t = SystemConfig::max_faults(n);
  crypto::KeyRing ring(n, seed, crypto::ProofMode::Signature);
  sim::NetOptions no;
  no.n = n;
  no.seed = seed;
  sim::Simulator s(no, ring);
  IcParams p;
  p.algo = Algorithm::BC_RBB;
  p.n = n;
  p.t = t;
  p.end_barrier = auto_end_barrier(p.algo, n, ClockParams{});
  p.coin = CoinSpec{CoinMode::Seeded, seed};
  std::vector<IcNode*> honest;
  for (std::size_t i = 0; i < n; ++i) {
    const NodeId id = NodeId::from_idx(i);
    auto node = std::make_unique<IcNode>(p, id, std::vector<Value>{default_value(id, 0)});
    if (id == bad) {
      BehaviorSpec w;
      w.kind = Behavior::WithholdFinal;
      w.subset = subset;
      s.set_process(id, std::make_unique<ByzantineNode>(std::move(node), w, AdversaryTiming{}, seed), true);
    } else {
      honest.push_back(node.get());
      s.set_process(id, std::move(node));
    }
  }
  s.start_all();
  s.run();

  RecoveryRun r;
  auto fail = [&](const std::string& why) {
    if (r.ok) r.why = why;
    r.ok = false;
  };
  for (IcNode* h : honest) {
    if (!h->done()) {
      fail("node " + std::to_string(h->self().value) + " did not finish");
      continue;
    }
    const auto& B = h->bfrak();
    const auto& V = h->vector();
    for (std::size_t i = 0; i < n; ++i) {
      const NodeId slot = NodeId::from_idx(i);
      if (B[i] == 1 && V[slot].is_null()) fail("slot " + std::to_string(slot.value) + " decided 1 but is null");
    }
    if (B[bad.idx()] != 1) continue;
    r.outcome_one = true;
    if (V[bad] != default_value(bad, 0)) fail("wrong value for the withheld slot");
    const auto& cert = h->certificates()[bad.idx()];
    crypto::NodeCrypto verifier(ring, h->self());
    if (!cert || cert->value != V[bad] || !cb_verify_certificate(*cert, n, t, verifier)) {
      fail("node " + std::to_string(h->self().value) + " lacks a verifying certificate");
    }
  }
  return r;
}

Verdict recovery(std::uint64_t seeds) {
  Verdict v;
  std::size_t scenarios = 0;
  std::size_t with_one = 0;
  for (std::size_t n : {4, 7}) {
    const NodeId bad(2);
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      std::vector<NodeId> subset;
      for (std::size_t j = 0; j < n; ++j) {
        if (mask & (1u << j)) subset.push_back(NodeId::from_idx(j));
      }
      for (std::uint64_t seed = 1; seed <= seeds; ++seed) {
        const auto r = recovery_run(n, bad, subset, seed * 1000 + mask);
        ++scenarios;
        if (r.outcome_one) ++with_one;
        if (!r.ok) v.fail("n=" + std::to_string(n) + " subset mask " + std::to_string(mask) + ": " + r.why);
      }
    }
  }
  if (with_one == 0) v.fail("no scenario reached binary-consensus outcome 1");
  if (v.pass) {
    v.detail = std::to_string(scenarios) + " scenarios, " + std::to_string(with_one) +
               " with outcome 1, every honest node holds the value and a verifying certificate";
  }
  return v;
}

double mean_makespan(const std::function<RunOptions(std::uint64_t)>& make, std::uint64_t seeds) {
  double sum = 0;
  for (std::uint64_t seed = 1; seed <= seeds; ++seed) {
    const RunOptions o = make(seed);
    const RunReport r = run_ic(o);
    const auto m = r.makespan();
    if (!m || !check_properties(o, r).ok()) return -1;
    sum += static_cast<double>(*m);
  }
  return sum / static_cast<double>(seeds);
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", x);
  return buf;
}

Verdict trends(std::uint64_t seeds) {
  Verdict v;
  auto plain = [](Algorithm a) { return [a](std::uint64_t s) { return base(a, 4, s); }; };
  auto crashed = [](Algorithm a) {
    return [a](std::uint64_t s) {
      RunOptions o = base(a, 4, s);
      o.cfg.round_timeout = 3000;
      BehaviorSpec c;
      c.kind = Behavior::Crash;
      c.crash_at = 0;
      o.adv.corrupted = {NodeId(4)};
      o.adv.behaviors[NodeId(4)] = c;
      return o;
    };
  };
  auto parallel = [](Algorithm a) {
    return [a](std::uint64_t s) {
      RunOptions o = base(a, 4, s);
      o.parallel_instances = 50;
      o.cfg.end_barrier = auto_end_barrier(a, 4, o.clock, 50);
      return o;
    };
  };

  const double pease = mean_makespan(plain(Algorithm::PEASE), seeds);
  const double bc = mean_makespan(plain(Algorithm::BC_RBB), seeds);
  const double mc = mean_makespan(plain(Algorithm::MC_RBB), seeds);
  if (pease < 0 || bc < 0 || mc < 0) v.fail("a fault-free run did not finish correctly");
  else if (!(pease < bc && bc < mc)) {
    v.fail("fault-free ordering broken: PEASE " + fmt(pease) + ", BC_RBB " + fmt(bc) + ", MC_RBB " + fmt(mc));
  }

  const double cp = mean_makespan(crashed(Algorithm::PEASE), seeds);
  const double cb = mean_makespan(crashed(Algorithm::BC_RBB), seeds);
  const double cm = mean_makespan(crashed(Algorithm::MC_RBB), seeds);
  if (cp < 0 || cb < 0 || cm < 0) v.fail("a single-crash run did not finish correctly");
  else if (!(cp > cb && cp > cm)) {
    v.fail("single crash: PEASE " + fmt(cp) + " not the slowest (BC_RBB " + fmt(cb) + ", MC_RBB " + fmt(cm) + ")");
  }

  const std::uint64_t par_seeds = std::max<std::uint64_t>(1, seeds / 4);
  const double pb = mean_makespan(parallel(Algorithm::BC_RBB), par_seeds);
  const double pm = mean_makespan(parallel(Algorithm::MC_RBB), par_seeds);
  if (pb < 0 || pm < 0) v.fail("a 50-instance run did not finish correctly");
  else if (!(50.0 / pb >= 50.0 / pm)) {
    v.fail("50 instances: BC_RBB throughput " + fmt(50000.0 / pb) + " below MC_RBB " + fmt(50000.0 / pm));
  }

  if (v.pass) {
    v.detail = "fault-free PEASE " + fmt(pease) + " < BC_RBB " + fmt(bc) + " < MC_RBB " + fmt(mc) +
               "; one crash PEASE " + fmt(cp) + " vs BC_RBB " + fmt(cb) + ", MC_RBB " + fmt(cm) +
               "; 50 instances per 1000 units BC_RBB " + fmt(50000.0 / pb) + " >= MC_RBB " + fmt(50000.0 / pm);
  }
  return v;
}

Verdict determinism(std::uint64_t seeds) {
  Verdict v;
  std::size_t pairs = 0;
  for (auto a : kAlgos) {
    for (auto b : kBehaviors) {
      for (std::uint64_t seed = 1; seed <= seeds; ++seed) {
        RunOptions o = base(a, 4, seed);
        o.adv = standard_adversary(b, 4, 1, seed, 120);
        std::ostringstream t1, t2;
        o.trace = &t1;
        const RunReport r1 = run_ic(o);
        o.trace = &t2;
        const RunReport r2 = run_ic(o);
        ++pairs;
        if (r1.trace_hash != r2.trace_hash || t1.str() != t2.str() || r1.events != r2.events) {
          v.fail(std::string(to_string(a)) + " " + std::string(to_string(b)) + " seed " + std::to_string(seed) +
                 ": traces differ");
        }
      }
    }
  }
  if (v.pass) v.detail = std::to_string(pairs) + " re-runs reproduce their trace hash and trace text";
  return v;
}

Verdict memory_bound(std::uint64_t seeds) {
  Verdict v;
  std::uint64_t worst = 0;
  std::uint64_t H = 0;
  for (auto a : {Algorithm::BC_RBB, Algorithm::MC_RBB, Algorithm::EIC}) {
    for (std::size_t n : {4, 7}) {
      for (std::uint64_t seed = 1; seed <= seeds; ++seed) {
        RunOptions o = base(a, n, seed);
        o.adv = standard_adversary(Behavior::SpamPhases, n, o.cfg.t, seed, 0);
        for (auto& [id, spec] : o.adv.behaviors) spec.spam_count = 100;
        const RunReport r = run_ic(o);
        H = o.cfg.buffer_window;
        worst = std::max(worst, r.max_buffer_span);
        if (r.max_buffer_span > H + 1) {
          v.fail(std::string(to_string(a)) + " n=" + std::to_string(n) + " seed " + std::to_string(seed) +
                 ": buffered span " + std::to_string(r.max_buffer_span));
        }
        if (!check_properties(o, r).ok()) {
          v.fail(std::string(to_string(a)) + " seed " + std::to_string(seed) + ": properties violated under spam");
        }
      }
    }
  }
  if (v.pass) v.detail = "widest buffered span " + std::to_string(worst) + " <= H+1 = " + std::to_string(H + 1);
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::uint64_t fuzz_seeds = 1000;
  std::uint64_t seeds = 50;
  app.add_option("--seeds", fuzz_seeds, "Seeds per (algorithm, behavior, n) for property fuzzing");
  app.add_option("--aux-seeds", seeds, "Seeds for the timing, recovery, trend, determinism and memory checks");
  CLI11_PARSE(app, argc, argv);

  struct Criterion {
    int id;
    std::string name;
    std::function<Verdict()> check;
  };
  const std::vector<Criterion> criteria = {
      {1, "message complexity matches the closed forms", [] { return complexity(); }},
      {2, "IC property fuzzing", [&] { return fuzzing(fuzz_seeds); }},
      {3, "consistent-broadcast uniqueness", [] { return cb_uniqueness(); }},
      {4, "dissemination timing bounds", [&] { return timing(seeds); }},
      {5, "recovery after withheld c-final", [&] { return recovery(std::max<std::uint64_t>(1, seeds / 10)); }},
      {6, "latency and throughput trends", [&] { return trends(std::max<std::uint64_t>(4, seeds / 2)); }},
      {7, "deterministic replay", [&] { return determinism(std::max<std::uint64_t>(1, seeds / 10)); }},
      {8, "bounded consensus buffering", [&] { return memory_bound(seeds); }},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v.fail(std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!v.pass) ++failed;
    std::cout << "criterion " << c.id << " " << (v.pass ? "PASS" : "FAIL") << "  " << c.name << ": " << v.detail
              << " [" << fmt(secs) << " s]" << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
