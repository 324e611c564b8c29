#include "icstack/ic/timing.hpp"

#include <algorithm>
#include <set>

namespace icstack {

bool TimingCheck::ok() const {
  if (obtained != expected || worst_obtain > obtain_bound) return false;
  return std::all_of(rows.begin(), rows.end(), [](const TimingRow& r) { return r.ok(); });
}

namespace {

enum Step : std::size_t { kSend, kRecvSend, kReady, kRecvReady, kFinal, kRecvFinal };

}  // namespace

TimingCheck check_dissemination_timing(RunOptions opts) {
  if (opts.algo != Algorithm::MC_RBB && opts.algo != Algorithm::BC_RBB) {
    throw ConfigError("timing tables exist for MC_RBB and BC_RBB only");
  }
  if (opts.parallel_instances != 1) throw ConfigError("timing tables assume a single instance");
  opts.worst_case_delivery = true;

  const Time tc = opts.clock.t_comp;
  const Time D = opts.clock.drift;
  const Time d = opts.clock.delta;
  const Time n = static_cast<Time>(opts.cfg.n);

  TimingCheck out;
  if (opts.algo == Algorithm::MC_RBB) {
    out.rows = {
        {"honest nodes multicast their values", tc + 2 * D, tc + D},
        {"honest nodes receive the values of honest nodes", tc + 2 * D + d, tc + 3 * D + d},
    };
    out.obtain_bound = multicast_obtain_bound(opts.clock);
  } else {
    out.rows = {
        {"honest nodes multicast c-send", tc + 2 * D, tc + D},
        {"honest nodes receive c-send of honest nodes", tc + 2 * D + d, tc + 3 * D + d},
        {"honest nodes unicast c-ready", (n + 1) * tc + 4 * D + d, (n + 1) * tc + 3 * D + d},
        {"honest nodes receive c-ready of honest nodes", (n + 1) * tc + 4 * D + 2 * d,
         (n + 1) * tc + 5 * D + 2 * d},
        {"honest nodes multicast c-final", (n + 2) * tc + 6 * D + 2 * d, (n + 2) * tc + 5 * D + 2 * d},
        {"honest nodes receive c-final of honest nodes", (n + 2) * tc + 6 * D + 3 * d,
         (n + 2) * tc + 7 * D + 3 * d},
    };
    out.obtain_bound = consistent_obtain_bound(opts.clock, opts.cfg.n);
  }

  const std::set<NodeId> bad(opts.adv.corrupted.begin(), opts.adv.corrupted.end());
  std::set<std::pair<NodeId, NodeId>> got;  // (receiver, slot)
  auto note = [&](std::size_t row, const sim::ObsEvent& e) {
    auto& r = out.rows[row];
    r.worst_global = std::max(r.worst_global, e.global);
    r.worst_local = std::max(r.worst_local, e.local);
  };
  auto obtain = [&](const sim::ObsEvent& e, NodeId slot) {
    if (bad.count(slot) || !got.insert({e.node, slot}).second) return;
    out.worst_obtain = std::max(out.worst_obtain, e.local);
  };

  auto user = opts.observer;
  opts.observer = [&](const sim::ObsEvent& e) {
    if (user) user(e);
    if (!e.msg || bad.count(e.node) || bad.count(e.peer)) return;
    const bool send = e.kind == sim::ObsKind::Send;
    const bool recv = e.kind == sim::ObsKind::Deliver;
    if (!send && !recv) return;
    const Message& m = *e.msg;
    if (std::holds_alternative<MuValue>(m.body)) {
      note(send ? kSend : kRecvSend, e);
      if (recv) obtain(e, e.peer);
    } else if (std::holds_alternative<CbSend>(m.body)) {
      note(send ? kSend : kRecvSend, e);
    } else if (std::holds_alternative<CbReady>(m.body)) {
      note(send ? kReady : kRecvReady, e);
    } else if (std::holds_alternative<CbFinal>(m.body)) {
      note(send ? kFinal : kRecvFinal, e);
      if (recv) obtain(e, e.peer);
    }
  };

  (void)run_ic(opts);
  const std::size_t honest = opts.cfg.n - bad.size();
  out.expected = honest * honest;
  out.obtained = got.size();
  return out;
}

}  // namespace icstack
