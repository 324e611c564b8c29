#include "icstack/cli/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "icstack/core/complexity.hpp"

namespace icstack::cli {

using nlohmann::ordered_json;

namespace {

void require_keys(const ordered_json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) throw ConfigError("unknown field '" + k + "' in " + where);
  }
}

template <class T>
T get(const ordered_json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

NodeId node_id(const ordered_json& v, std::size_t n, const std::string& where) {
  if (!v.is_number_unsigned()) throw ConfigError(where + ": node ids are positive integers");
  const auto id = v.get<std::uint64_t>();
  if (id == 0 || id > n) {
    throw ConfigError(where + ": node " + std::to_string(id) + " outside 1.." + std::to_string(n));
  }
  return NodeId(static_cast<std::uint32_t>(id));
}

Value value_of(const ordered_json& v, const std::string& where) {
  if (v.is_null()) return Value::null();
  if (!v.is_string()) throw ConfigError(where + ": values are strings or null");
  return Value(v.get<std::string>());
}

ordered_json to_json(const Value& v) {
  return v.is_null() ? ordered_json(nullptr) : ordered_json(v.bytes());
}

std::string hex64(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

BehaviorSpec parse_behavior(const ordered_json& j, std::size_t n, const std::string& where) {
  require_keys(j, {"kind", "crash_at", "subset", "per_recipient", "spam_count"}, where);
  BehaviorSpec b;
  const auto kind = get<std::string>(j, "kind", "silent", where);
  const auto parsed = behavior_from_string(kind);
  if (!parsed) throw ConfigError(where + ".kind: unknown behavior '" + kind + "'");
  b.kind = *parsed;
  b.crash_at = get<Time>(j, "crash_at", 0, where);
  if (b.crash_at < 0) throw ConfigError(where + ".crash_at must be >= 0");
  if (j.contains("subset")) {
    for (const auto& v : j.at("subset")) b.subset.push_back(node_id(v, n, where + ".subset"));
  }
  if (j.contains("per_recipient")) {
    for (const auto& v : j.at("per_recipient")) b.per_recipient.push_back(value_of(v, where + ".per_recipient"));
  }
  b.spam_count = get<std::uint32_t>(j, "spam_count", b.spam_count, where);
  return b;
}

}  // namespace

Scenario parse_scenario(const ordered_json& j) {
  require_keys(j, {"schema", "name", "algorithm", "config", "clock", "adversary", "seeds",
                   "parallel_instances", "worst_case_delivery", "drift", "coin", "proof", "values",
                   "budget", "check_oracle"},
               "scenario");
  if (!j.contains("schema")) throw ConfigError("scenario.schema is required");
  const int schema = get<int>(j, "schema", 0, "scenario");
  if (schema != kScenarioSchema) {
    throw ConfigError("scenario.schema " + std::to_string(schema) + " is not supported (expected " +
                      std::to_string(kScenarioSchema) + ")");
  }

  Scenario sc;
  sc.name = get<std::string>(j, "name", "", "scenario");
  RunOptions& o = sc.base;

  if (!j.contains("algorithm")) throw ConfigError("scenario.algorithm is required");
  const auto algo = get<std::string>(j, "algorithm", "", "scenario");
  const auto a = algorithm_from_string(algo);
  if (!a) throw ConfigError("scenario.algorithm: unknown algorithm '" + algo + "'");
  o.algo = *a;

  if (!j.contains("config")) throw ConfigError("scenario.config is required");
  const auto& c = j.at("config");
  require_keys(c, {"n", "t", "end_barrier", "round_timeout", "buffer_window"}, "config");
  o.cfg.n = get<std::size_t>(c, "n", 4, "config");
  o.cfg.t = get<std::size_t>(c, "t", SystemConfig::max_faults(o.cfg.n), "config");
  o.cfg.round_timeout = get<Time>(c, "round_timeout", o.cfg.round_timeout, "config");
  o.cfg.buffer_window = get<std::uint32_t>(c, "buffer_window", o.cfg.buffer_window, "config");

  if (j.contains("clock")) {
    const auto& k = j.at("clock");
    require_keys(k, {"t_comp", "drift", "delta"}, "clock");
    o.clock.t_comp = get<Time>(k, "t_comp", o.clock.t_comp, "clock");
    o.clock.drift = get<Time>(k, "drift", o.clock.drift, "clock");
    o.clock.delta = get<Time>(k, "delta", o.clock.delta, "clock");
  }
  o.parallel_instances = get<std::uint32_t>(j, "parallel_instances", 1, "scenario");

  if (!c.contains("end_barrier") || (c.at("end_barrier").is_string() && c.at("end_barrier") == "auto")) {
    sc.auto_end = true;
  } else {
    o.cfg.end_barrier = get<Time>(c, "end_barrier", 0, "config");
  }

  o.cfg.validate();
  o.clock.validate();
  if (sc.auto_end) o.cfg.end_barrier = auto_end_barrier(o.algo, o.cfg.n, o.clock, o.parallel_instances);

  o.worst_case_delivery = get<bool>(j, "worst_case_delivery", false, "scenario");
  const auto drift = get<std::string>(j, "drift", "random_walk", "scenario");
  if (drift == "random_walk") {
    o.drift = sim::DriftMode::RandomWalk;
  } else if (drift == "none") {
    o.drift = sim::DriftMode::None;
  } else {
    throw ConfigError("scenario.drift must be 'random_walk' or 'none'");
  }
  const auto coin = get<std::string>(j, "coin", "seeded", "scenario");
  if (coin == "seeded") {
    o.coin = CoinMode::Seeded;
  } else if (coin == "worst") {
    o.coin = CoinMode::Worst;
  } else {
    throw ConfigError("scenario.coin must be 'seeded' or 'worst'");
  }
  const auto proof = get<std::string>(j, "proof", "signature", "scenario");
  if (proof == "signature") {
    o.proof = crypto::ProofMode::Signature;
  } else if (proof == "authenticator") {
    o.proof = crypto::ProofMode::Authenticator;
  } else {
    throw ConfigError("scenario.proof must be 'signature' or 'authenticator'");
  }
  o.budget = get<Time>(j, "budget", o.budget, "scenario");
  if (o.budget <= 0) throw ConfigError("scenario.budget must be positive");
  sc.check_oracle = get<bool>(j, "check_oracle", true, "scenario");

  if (j.contains("values") && !j.at("values").is_null()) {
    const auto& vs = j.at("values");
    if (!vs.is_array() || vs.size() != o.cfg.n) throw ConfigError("scenario.values must list n values");
    std::vector<Value> vals;
    for (const auto& v : vs) vals.push_back(value_of(v, "scenario.values"));
    o.values = std::move(vals);
  }

  if (j.contains("adversary")) {
    const auto& adv = j.at("adversary");
    require_keys(adv, {"corrupted", "behaviors", "scheduler_seed", "duplicate_rate"}, "adversary");
    if (adv.contains("corrupted")) {
      for (const auto& v : adv.at("corrupted")) o.adv.corrupted.push_back(node_id(v, o.cfg.n, "adversary.corrupted"));
    }
    if (adv.contains("behaviors")) {
      const auto& bs = adv.at("behaviors");
      if (!bs.is_object()) throw ConfigError("adversary.behaviors must map node ids to behaviors");
      for (const auto& [key, spec] : bs.items()) {
        std::uint64_t id = 0;
        try {
          id = std::stoull(key);
        } catch (const std::exception&) {
          throw ConfigError("adversary.behaviors: key '" + key + "' is not a node id");
        }
        const NodeId nid = node_id(ordered_json(id), o.cfg.n, "adversary.behaviors");
        o.adv.behaviors[nid] = parse_behavior(spec, o.cfg.n, "adversary.behaviors." + key);
      }
    }
    o.adv.scheduler_seed = get<std::uint64_t>(adv, "scheduler_seed", 0, "adversary");
    o.adv.duplicate_rate = get<double>(adv, "duplicate_rate", 0.0, "adversary");
    if (o.adv.duplicate_rate < 0.0 || o.adv.duplicate_rate > 1.0) {
      throw ConfigError("adversary.duplicate_rate must lie in [0, 1]");
    }
  }
  if (o.adv.corrupted.size() > o.cfg.t) {
    throw ConfigError("adversary corrupts " + std::to_string(o.adv.corrupted.size()) +
                      " nodes but t = " + std::to_string(o.cfg.t));
  }

  if (j.contains("seeds")) {
    for (const auto& s : j.at("seeds")) {
      if (!s.is_number_unsigned()) throw ConfigError("scenario.seeds must be non-negative integers");
      sc.seeds.push_back(s.get<std::uint64_t>());
    }
  } else {
    sc.seeds = {1};
  }
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path);
  ordered_json j;
  try {
    j = ordered_json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return parse_scenario(j);
}

bool OracleVerdict::ok() const {
  if (!applicable) return true;
  if (observed_messages != expected_messages) return false;
  return !expected_signature_ops || *expected_signature_ops == observed_signature_ops;
}

std::uint64_t oracle_messages(Algorithm algo, std::size_t n, std::size_t t, std::uint32_t k) {
  switch (algo) {
    case Algorithm::PEASE: return k * expected_pease_messages(n, t);
    case Algorithm::MC_RBB: return k * expected_messages(Primitive::IC_MC_RBB, n);
    case Algorithm::BC_RBB: return k * expected_messages(Primitive::IC_BC_RBB, n);
    case Algorithm::EIC: return k * n * expected_messages(Primitive::RBB, n);
  }
  return 0;
}

std::optional<std::uint64_t> oracle_signature_ops(Algorithm algo, std::size_t n, std::uint32_t k) {
  if (algo != Algorithm::BC_RBB) return 0;
  return k * expected_signature_ops(Primitive::IC_BC_RBB, n);
}

OracleVerdict check_oracle(const RunOptions& opts) {
  RunOptions g = graceful(opts);
  g.adv = AdversarySpec{};
  g.cfg.end_barrier = auto_end_barrier(g.algo, g.cfg.n, g.clock, g.parallel_instances);
  g.trace = nullptr;
  g.observer = nullptr;
  g.duplicate_honest = false;
  const RunReport rep = run_ic(g);

  OracleVerdict v;
  v.applicable = true;
  v.expected_messages = oracle_messages(g.algo, g.cfg.n, g.cfg.t, g.parallel_instances);
  v.observed_messages = rep.total_messages - rep.messages_by_primitive.at("retrieve");
  v.expected_signature_ops = oracle_signature_ops(g.algo, g.cfg.n, g.parallel_instances);
  v.observed_signature_ops = rep.signature_ops;
  return v;
}

Time quantile(std::vector<Time> sample, double q) {
  if (sample.empty()) throw std::invalid_argument("quantile of an empty sample");
  std::sort(sample.begin(), sample.end());
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sample.size())));
  return sample[std::clamp<std::size_t>(rank, 1, sample.size()) - 1];
}

namespace {

ordered_json run_json(const RunOptions& o, const RunReport& r, const PropertyVerdict& v) {
  ordered_json j;
  j["seed"] = o.seed;
  j["verdict"] = v.ok() ? "PASS" : "FAIL";
  j["violations"] = v.violations;
  j["validity_checked"] = v.validity_checked;
  const auto mk = r.makespan();
  j["latency"] = mk ? ordered_json(*mk) : ordered_json(nullptr);
  j["total_messages"] = r.total_messages;
  j["messages_by_primitive"] = r.messages_by_primitive;
  j["signature_ops"] = r.signature_ops;
  j["signature_generations"] = r.signature_generations;
  j["signature_verifications"] = r.signature_verifications;
  j["drops"] = {{"late", r.late_drops}, {"window", r.window_drops}, {"invalid", r.invalid_drops},
                {"unauthenticated", r.unauth_drops}};
  j["retrieves"] = r.retrieves;
  j["timeouts"] = r.timeouts;
  j["max_consensus_phase"] = r.max_consensus_phase;
  j["max_buffer_span"] = r.max_buffer_span;
  j["assumption_breach"] = r.assumption_breach;
  j["drained"] = r.drained;
  j["end_time"] = r.end_time;
  j["events"] = r.events;
  j["trace_hash"] = hex64(r.trace_hash);
  j["warnings"] = r.warnings;

  ordered_json outputs = ordered_json::array();
  for (std::size_t i = 0; i < r.honest.size(); ++i) {
    if (!r.honest[i]) continue;
    ordered_json node;
    node["node"] = i + 1;
    node["decided_at"] = r.decision_time[i] ? ordered_json(*r.decision_time[i]) : ordered_json(nullptr);
    ordered_json vec = ordered_json::array();
    for (const auto& val : r.outcomes.at(0)[i].values()) vec.push_back(to_json(val));
    node["vector"] = vec;
    if (!r.upcalls.empty() && !r.upcalls[i].empty()) {
      ordered_json ups = ordered_json::array();
      for (const auto& u : r.upcalls[i]) {
        ups.push_back({{"run", u.run}, {"slot", u.slot.value}, {"value", to_json(u.value)}, {"at", u.global}});
      }
      node["upcalls"] = ups;
    }
    outputs.push_back(node);
  }
  j["outputs"] = outputs;
  return j;
}

ordered_json scenario_json(const Scenario& sc) {
  const RunOptions& o = sc.base;
  ordered_json j;
  j["name"] = sc.name;
  j["algorithm"] = std::string(to_string(o.algo));
  j["n"] = o.cfg.n;
  j["t"] = o.cfg.t;
  j["end_barrier"] = o.cfg.end_barrier;
  j["round_timeout"] = o.cfg.round_timeout;
  j["buffer_window"] = o.cfg.buffer_window;
  j["clock"] = {{"t_comp", o.clock.t_comp}, {"drift", o.clock.drift}, {"delta", o.clock.delta}};
  j["parallel_instances"] = o.parallel_instances;
  j["worst_case_delivery"] = o.worst_case_delivery;
  ordered_json bad = ordered_json::array();
  for (NodeId id : o.adv.corrupted) {
    auto it = o.adv.behaviors.find(id);
    bad.push_back({{"node", id.value},
                   {"behavior", std::string(to_string(it == o.adv.behaviors.end() ? Behavior::Silent
                                                                                  : it->second.kind))}});
  }
  j["corrupted"] = bad;
  j["seeds"] = sc.seeds.size();
  return j;
}

}  // namespace

ScenarioResult run_scenario(const Scenario& sc, std::ostream* trace) {
  ScenarioResult res;
  ordered_json& rep = res.report;
  rep["schema"] = kScenarioSchema;
  rep["scenario"] = scenario_json(sc);

  ordered_json runs = ordered_json::array();
  ordered_json violations = ordered_json::array();
  std::vector<Time> latencies;
  for (std::uint64_t seed : sc.seeds) {
    RunOptions o = sc.base;
    o.seed = seed;
    if (trace) {
      *trace << "# seed " << seed << '\n';
      o.trace = trace;
    }
    const RunReport r = run_ic(o);
    const PropertyVerdict v = check_properties(o, r);
    if (const auto mk = r.makespan()) latencies.push_back(*mk);
    for (const auto& s : v.violations) violations.push_back("seed " + std::to_string(seed) + ": " + s);
    runs.push_back(run_json(o, r, v));
  }

  ordered_json lat;
  lat["finished_runs"] = latencies.size();
  if (!latencies.empty()) {
    lat["p50"] = quantile(latencies, 0.50);
    lat["p90"] = quantile(latencies, 0.90);
    lat["p99"] = quantile(latencies, 0.99);
    lat["max"] = *std::max_element(latencies.begin(), latencies.end());
  }
  rep["latency"] = lat;

  if (sc.check_oracle) {
    const OracleVerdict ov = check_oracle(sc.base);
    ordered_json oj;
    oj["expected_messages"] = ov.expected_messages;
    oj["observed_messages"] = ov.observed_messages;
    oj["expected_signature_ops"] =
        ov.expected_signature_ops ? ordered_json(*ov.expected_signature_ops) : ordered_json(nullptr);
    oj["observed_signature_ops"] = ov.observed_signature_ops;
    oj["verdict"] = ov.ok() ? "PASS" : "FAIL";
    rep["oracle"] = oj;
    if (!ov.ok()) {
      violations.push_back("oracle: graceful run sent " + std::to_string(ov.observed_messages) +
                           " messages, closed form gives " + std::to_string(ov.expected_messages));
    }
  }

  rep["violations"] = violations;
  res.pass = violations.empty();
  rep["verdict"] = res.pass ? "PASS" : "FAIL";
  rep["runs"] = runs;
  return res;
}

const std::vector<std::string>& sweep_columns() {
  static const std::vector<std::string> cols = {
      "algorithm", "n",         "t",          "fault",           "seed",       "messages",
      "oracle_messages", "signature_ops", "latency", "max_phase", "retrieves", "late_drops",
      "verdict",   "detail"};
  return cols;
}

std::optional<Behavior> fault_from_string(const std::string& s, bool& ok) {
  ok = true;
  if (s == "none") return std::nullopt;
  auto b = behavior_from_string(s);
  ok = b.has_value();
  return b;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::size_t sweep(const SweepOptions& opts, std::ostream& csv) {
  const auto& cols = sweep_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) csv << (i ? "," : "") << cols[i];
  csv << '\n';

  std::size_t failed = 0;
  for (Algorithm algo : opts.algos) {
    for (std::size_t n : opts.ns) {
      for (const auto& fault : opts.faults) {
        for (std::uint64_t seed = 1; seed <= opts.seeds; ++seed) {
          const std::size_t t = SystemConfig::max_faults(n);
          std::vector<std::string> row{std::string(to_string(algo)), std::to_string(n), std::to_string(t),
                                       fault ? std::string(to_string(*fault)) : "none", std::to_string(seed)};
          try {
            RunOptions o;
            o.algo = algo;
            o.cfg.n = n;
            o.cfg.t = t;
            o.cfg.round_timeout = opts.round_timeout;
            o.clock = opts.clock;
            o.cfg.end_barrier = auto_end_barrier(algo, n, opts.clock);
            o.seed = seed;
            o.worst_case_delivery = opts.worst_case_delivery;
            if (fault) {
              const Time horizon = algo == Algorithm::PEASE
                                       ? static_cast<Time>(t + 1) * opts.round_timeout
                                       : o.cfg.end_barrier + 50;
              o.adv = standard_adversary(*fault, n, t, seed, horizon);
            }
            const RunReport r = run_ic(o);
            PropertyVerdict v = check_properties(o, r);
            const std::uint64_t sent = r.total_messages - r.messages_by_primitive.at("retrieve");
            std::string oracle;
            if (!fault) {
              const std::uint64_t expect = oracle_messages(algo, n, t, 1);
              oracle = std::to_string(expect);
              if (sent != expect) {
                v.violations.push_back("messages " + std::to_string(sent) + " differ from closed form " + oracle);
              }
            }
            const auto mk = r.makespan();
            row.push_back(std::to_string(sent));
            row.push_back(oracle);
            row.push_back(std::to_string(r.signature_ops));
            row.push_back(mk ? std::to_string(*mk) : "");
            row.push_back(std::to_string(r.max_consensus_phase));
            row.push_back(std::to_string(r.retrieves));
            row.push_back(std::to_string(r.late_drops));
            const bool pass = v.violations.empty();
            row.push_back(pass ? "PASS" : "FAIL");
            std::string detail;
            for (const auto& s : v.violations) detail += (detail.empty() ? "" : "; ") + s;
            row.push_back(detail);
            if (!pass) ++failed;
          } catch (const std::exception& e) {
            row.resize(5);
            row.resize(cols.size() - 2);
            row.push_back("ERROR");
            row.push_back(e.what());
            ++failed;
          }
          for (std::size_t i = 0; i < row.size(); ++i) csv << (i ? "," : "") << csv_field(row[i]);
          csv << '\n';
        }
      }
    }
  }
  return failed;
}

}  // namespace icstack::cli
