#include "icstack/ic/runner.hpp"

#include <algorithm>
#include <set>

#include "icstack/ic/pease.hpp"
#include "icstack/simnet/clock.hpp"

namespace icstack {

RunOptions graceful(RunOptions o) {
  o.worst_case_delivery = true;
  o.drift = sim::DriftMode::None;
  return o;
}

Time auto_end_barrier(Algorithm a, std::size_t n, const ClockParams& c, std::uint32_t instances) {
  switch (a) {
    case Algorithm::MC_RBB:
      return multicast_obtain_bound(c);
    case Algorithm::BC_RBB:
      // With k instances a node also spends up to k flushes on c-final, so
      // the per-node step count grows from n to k(n+1).
      return consistent_obtain_bound(c, instances <= 1 ? n : instances * (n + 1));
    case Algorithm::PEASE:
    case Algorithm::EIC:
      return multicast_obtain_bound(c);
  }
  return multicast_obtain_bound(c);
}

Value default_value(NodeId node, std::uint32_t run) {
  if (run == 0) return Value("v" + std::to_string(node.value));
  return Value("v" + std::to_string(node.value) + "." + std::to_string(run));
}

AdversarySpec standard_adversary(Behavior b, std::size_t n, std::size_t t, std::uint64_t seed,
                                 Time horizon) {
  AdversarySpec adv;
  adv.scheduler_seed = seed;
  for (std::size_t i = 0; i < t; ++i) {
    const NodeId id = NodeId::from_idx((seed + i) % n);
    adv.corrupted.push_back(id);
    BehaviorSpec spec;
    spec.kind = b;
    spec.crash_at = static_cast<Time>(sim::derive_seed(seed, 0x6372617368, i) %
                                      static_cast<std::uint64_t>(std::max<Time>(1, horizon + 1)));
    for (std::size_t j = 0; j < n; j += 2) spec.subset.push_back(NodeId::from_idx(j));
    adv.behaviors[id] = spec;
  }
  return adv;
}

namespace {

void validate(const RunOptions& o) {
  o.cfg.validate();
  o.clock.validate();
  if (o.parallel_instances < 1) throw ConfigError("parallel_instances must be >= 1");
  if (o.adv.corrupted.size() > o.cfg.t) {
    throw ConfigError("adversary corrupts " + std::to_string(o.adv.corrupted.size()) +
                      " nodes but t = " + std::to_string(o.cfg.t));
  }
  std::set<NodeId> seen;
  for (NodeId id : o.adv.corrupted) {
    if (id.value == 0 || id.value > o.cfg.n) {
      throw ConfigError("corrupted node " + std::to_string(id.value) + " is out of range");
    }
    if (!seen.insert(id).second) throw ConfigError("corrupted node listed twice");
  }
  for (const auto& [id, spec] : o.adv.behaviors) {
    if (!seen.count(id)) {
      throw ConfigError("behavior given for node " + std::to_string(id.value) + " which is not corrupted");
    }
  }
  if (o.values && o.values->size() != o.cfg.n) throw ConfigError("values must list one value per node");
  if (o.algo == Algorithm::PEASE && o.cfg.n > kPeaseMaxNodes) {
    throw ConfigError("relay rounds support at most " + std::to_string(kPeaseMaxNodes) + " nodes");
  }
}

}  // namespace

RunReport run_ic(const RunOptions& opts) {
  validate(opts);
  const std::size_t n = opts.cfg.n;
  const std::uint32_t k = opts.parallel_instances;

  RunReport rep;
  if (opts.algo == Algorithm::MC_RBB || opts.algo == Algorithm::BC_RBB) {
    const Time bound = auto_end_barrier(opts.algo, n, opts.clock, k);
    if (opts.cfg.end_barrier < bound) {
      rep.warnings.push_back("end_barrier " + std::to_string(opts.cfg.end_barrier) +
                             " is below the dissemination bound " + std::to_string(bound) +
                             "; validity is not asserted");
    }
  }
  if (opts.algo == Algorithm::PEASE && opts.cfg.round_timeout < round_timeout_bound(opts.clock)) {
    rep.warnings.push_back("round_timeout " + std::to_string(opts.cfg.round_timeout) +
                           " is below t_comp + 3*Delta + delta = " +
                           std::to_string(round_timeout_bound(opts.clock)));
  }

  crypto::KeyRing ring(n, opts.seed, opts.proof);
  sim::NetOptions net;
  net.n = n;
  net.clock = opts.clock;
  net.seed = sim::derive_seed(opts.seed, opts.adv.scheduler_seed, 0x73636864);
  net.worst_case_delivery = opts.worst_case_delivery;
  net.drift = opts.drift;
  net.duplicate_rate = opts.adv.duplicate_rate;
  net.duplicate_honest = opts.duplicate_honest;
  net.budget = opts.budget;
  sim::Simulator simu(net, ring);

  IcParams params;
  params.algo = opts.algo;
  params.n = n;
  params.t = opts.cfg.t;
  params.end_barrier = opts.cfg.end_barrier;
  params.round_timeout = opts.cfg.round_timeout;
  params.window = opts.cfg.buffer_window;
  params.coin = CoinSpec{opts.coin, sim::derive_seed(opts.seed, 0x636f696e)};
  params.instances = k;

  const std::set<NodeId> corrupted(opts.adv.corrupted.begin(), opts.adv.corrupted.end());
  std::vector<IcNode*> ic_nodes(n, nullptr);
  std::vector<PeaseNode*> pease_nodes(n, nullptr);
  std::vector<std::vector<Value>> own(n);

  for (std::size_t i = 0; i < n; ++i) {
    const NodeId id = NodeId::from_idx(i);
    for (std::uint32_t r = 0; r < k; ++r) {
      if (r == 0 && opts.values) {
        own[i].push_back((*opts.values)[i]);
      } else {
        own[i].push_back(default_value(id, r));
      }
    }
    std::unique_ptr<sim::Process> proc;
    if (opts.algo == Algorithm::PEASE) {
      auto p = std::make_unique<PeaseNode>(params, id, own[i]);
      pease_nodes[i] = p.get();
      proc = std::move(p);
    } else {
      auto p = std::make_unique<IcNode>(params, id, own[i]);
      ic_nodes[i] = p.get();
      proc = std::move(p);
    }
    const bool bad = corrupted.count(id) > 0;
    if (bad) {
      BehaviorSpec spec;
      if (auto it = opts.adv.behaviors.find(id); it != opts.adv.behaviors.end()) spec = it->second;
      AdversaryTiming timing{opts.cfg.end_barrier, opts.cfg.round_timeout, opts.clock.drift};
      proc = std::make_unique<ByzantineNode>(std::move(proc), spec, timing,
                                             sim::derive_seed(opts.seed, 0x62797a, i));
      ic_nodes[i] = nullptr;
      pease_nodes[i] = nullptr;
    }
    simu.set_process(id, std::move(proc), bad);
  }

  if (opts.observer) simu.set_observer(opts.observer);
  if (opts.trace) simu.set_trace(opts.trace);
  simu.start_all(0);
  rep.drained = simu.run();
  rep.end_time = simu.now();

  const auto& m = simu.metrics();
  for (std::size_t l = 0; l < kLayerCount; ++l) {
    const auto key = std::string(layer_report_key(static_cast<Layer>(l)));
    rep.messages_by_primitive[key] += m.messages[l];
  }
  rep.total_messages = m.total_messages();
  rep.signature_generations = ring.counter().generations;
  rep.signature_verifications = ring.counter().verifications;
  rep.signature_ops = ring.counter().total();
  rep.late_drops = m.late_drops;
  rep.window_drops = m.window_drops;
  rep.invalid_drops = m.invalid_drops;
  rep.unauth_drops = m.unauth_drops;
  rep.timeouts = m.timeouts;
  rep.events = m.events;
  rep.max_buffer_span = m.max_buffer_span;
  rep.trace_hash = simu.trace_hash();

  rep.honest.assign(n, false);
  rep.decision_time.assign(n, std::nullopt);
  rep.outcomes.assign(k, std::vector<ResultVector>(n));
  rep.instance_done.assign(k, std::vector<std::optional<Time>>(n));
  rep.upcalls.assign(n, {});

  std::set<NodeId> missed = corrupted;  // effective faults for relay rounds
  for (std::size_t i = 0; i < n; ++i) {
    const NodeId id = NodeId::from_idx(i);
    if (corrupted.count(id)) continue;
    rep.honest[i] = true;
    for (std::uint32_t r = 0; r < k; ++r) {
      if (pease_nodes[i]) {
        rep.outcomes[r][i] = pease_nodes[i]->vector(r);
        rep.instance_done[r][i] = pease_nodes[i]->done_time(r);
      } else {
        const IcNode& node = *ic_nodes[i];
        rep.outcomes[r][i] = node.vector(r);
        if (opts.algo == Algorithm::EIC) {
          if (r == 0) {
            for (const auto& u : node.upcalls()) rep.upcalls[i].push_back({u.run, u.slot, u.value, u.global});
          }
          // Eventual IC completes once every honest slot has been filled.
          std::optional<Time> t_done = Time{0};
          for (std::size_t j = 0; j < n && t_done; ++j) {
            const NodeId slot = NodeId::from_idx(j);
            if (corrupted.count(slot)) continue;
            std::optional<Time> at;
            for (const auto& u : node.upcalls()) {
              if (u.run == r && u.slot == slot) at = u.global;
            }
            t_done = at ? std::optional<Time>(std::max(*t_done, *at)) : std::nullopt;
          }
          rep.instance_done[r][i] = t_done;
        } else {
          rep.instance_done[r][i] = node.done_time(r);
        }
      }
    }
    std::optional<Time> all = Time{0};
    for (std::uint32_t r = 0; r < k && all; ++r) {
      const auto& d = rep.instance_done[r][i];
      all = d ? std::optional<Time>(std::max(*all, *d)) : std::nullopt;
    }
    rep.decision_time[i] = all;
    if (ic_nodes[i]) {
      rep.retrieves += ic_nodes[i]->retrieves_sent();
      rep.max_consensus_phase = std::max(rep.max_consensus_phase, ic_nodes[i]->max_consensus_phase());
    }
    if (pease_nodes[i]) {
      for (NodeId s : pease_nodes[i]->late_senders()) missed.insert(s);
    }
  }
  if (opts.algo == Algorithm::PEASE && missed.size() > opts.cfg.t) {
    rep.assumption_breach = true;
    rep.warnings.push_back("effective faults " + std::to_string(missed.size()) + " exceed t = " +
                           std::to_string(opts.cfg.t));
  }
  return rep;
}

PropertyVerdict check_properties(const RunOptions& opts, const RunReport& rep) {
  PropertyVerdict v;
  const std::size_t n = opts.cfg.n;
  const std::uint32_t k = opts.parallel_instances;
  const bool eventual = opts.algo == Algorithm::EIC;

  for (std::uint32_t r = 0; r < k; ++r) {
    std::optional<std::size_t> ref;
    for (std::size_t i = 0; i < n; ++i) {
      if (!rep.honest[i]) continue;
      if (!ref) {
        ref = i;
        continue;
      }
      const auto& a = rep.outcomes[r][*ref];
      const auto& b = rep.outcomes[r][i];
      bool same = true;
      for (std::size_t j = 0; j < n; ++j) {
        const NodeId slot = NodeId::from_idx(j);
        if (eventual) {
          if (a.is_final(slot) && b.is_final(slot) && a[slot] != b[slot]) same = false;
        } else if (!a.is_final(slot) || !b.is_final(slot) || a[slot] != b[slot]) {
          // Unfinished vectors are a termination issue; compare only when both finished.
          if (a.complete() && b.complete()) same = false;
        }
      }
      if (!same) {
        v.agreement = false;
        v.violations.push_back("agreement: instance " + std::to_string(r) + " nodes " +
                               std::to_string(*ref + 1) + " and " + std::to_string(i + 1) + " differ");
      }
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (rep.honest[i] && !rep.decision_time[i]) {
      v.termination = false;
      v.violations.push_back("termination: node " + std::to_string(i + 1) + " did not finish by " +
                             std::to_string(opts.budget));
    }
  }

  bool check_validity = true;
  switch (opts.algo) {
    case Algorithm::MC_RBB:
    case Algorithm::BC_RBB:
      check_validity = opts.cfg.end_barrier >= auto_end_barrier(opts.algo, n, opts.clock, k);
      break;
    case Algorithm::PEASE:
      check_validity = !rep.assumption_breach;
      break;
    case Algorithm::EIC:
      break;
  }
  v.validity_checked = check_validity;
  if (check_validity) {
    for (std::uint32_t r = 0; r < k; ++r) {
      for (std::size_t j = 0; j < n; ++j) {
        if (!rep.honest[j]) continue;
        const NodeId slot = NodeId::from_idx(j);
        const Value expected = (r == 0 && opts.values) ? (*opts.values)[j] : default_value(slot, r);
        for (std::size_t i = 0; i < n; ++i) {
          if (!rep.honest[i]) continue;
          const auto& out = rep.outcomes[r][i];
          if (!out.is_final(slot)) continue;  // covered by termination
          if (out[slot] != expected) {
            v.validity = false;
            v.violations.push_back("validity: instance " + std::to_string(r) + " node " +
                                   std::to_string(i + 1) + " slot " + std::to_string(j + 1));
          }
        }
      }
    }
  }
  return v;
}

}  // namespace icstack
