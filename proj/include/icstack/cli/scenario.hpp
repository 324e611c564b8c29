#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "icstack/ic/runner.hpp"

namespace icstack::cli {

inline constexpr int kScenarioSchema = 1;

/// A scenario file: one configuration run under a list of seeds.
struct Scenario {
  std::string name;
  RunOptions base;          // everything except the seed
  bool auto_end = false;    // end_barrier given as "auto"
  std::vector<std::uint64_t> seeds;
  bool check_oracle = true; // compare a graceful fault-free run to the closed forms
};

/// Throws ConfigError with a message naming the offending field or bound.
[[nodiscard]] Scenario parse_scenario(const nlohmann::ordered_json& j);
[[nodiscard]] Scenario load_scenario(const std::string& path);

struct OracleVerdict {
  bool applicable = false;
  std::uint64_t expected_messages = 0;
  std::uint64_t observed_messages = 0;
  std::optional<std::uint64_t> expected_signature_ops;
  std::uint64_t observed_signature_ops = 0;

  [[nodiscard]] bool ok() const;
};

/// Closed-form message count of one fault-free graceful run of `algo`, for
/// k parallel instances.
[[nodiscard]] std::uint64_t oracle_messages(Algorithm algo, std::size_t n, std::size_t t, std::uint32_t k);
[[nodiscard]] std::optional<std::uint64_t> oracle_signature_ops(Algorithm algo, std::size_t n,
                                                                std::uint32_t k);

/// Runs the graceful fault-free counterpart of `opts` and compares counts.
[[nodiscard]] OracleVerdict check_oracle(const RunOptions& opts);

/// Nearest-rank quantile of a non-empty sample.
[[nodiscard]] Time quantile(std::vector<Time> sample, double q);

struct ScenarioResult {
  nlohmann::ordered_json report;
  bool pass = true;
};

/// Runs every seed and builds the report. The report holds no wall-clock
/// data, so identical scenarios give byte-identical reports. With `trace`
/// set, every event of every seed is written there, each seed preceded by
/// a "# seed <s>" line.
[[nodiscard]] ScenarioResult run_scenario(const Scenario& sc, std::ostream* trace = nullptr);

struct SweepOptions {
  std::vector<std::size_t> ns{4};
  std::vector<Algorithm> algos{Algorithm::PEASE, Algorithm::MC_RBB, Algorithm::BC_RBB};
  std::vector<std::optional<Behavior>> faults{std::nullopt};  // nullopt: fault free
  std::uint64_t seeds = 1;  // seeds 1..seeds
  bool worst_case_delivery = false;
  ClockParams clock;
  Time round_timeout = 3000;
};

/// Fixed CSV column order.
[[nodiscard]] const std::vector<std::string>& sweep_columns();

/// One row per (algorithm, n, fault, seed). A failing or throwing row is
/// recorded and the sweep continues. Returns the number of non-PASS rows.
std::size_t sweep(const SweepOptions& opts, std::ostream& csv);

[[nodiscard]] std::optional<Behavior> fault_from_string(const std::string& s, bool& ok);

}  // namespace icstack::cli
