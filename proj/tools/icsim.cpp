#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "icstack/cli/scenario.hpp"

using namespace icstack;

namespace {

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int do_run(const std::string& path, const std::string& trace_path, bool worst, const std::string& out_path) {
  cli::Scenario sc = cli::load_scenario(path);
  if (worst) sc.base.worst_case_delivery = true;

  std::ofstream trace;
  if (!trace_path.empty()) {
    trace.open(trace_path);
    if (!trace) throw ConfigError("cannot write trace file " + trace_path);
  }
  const auto res = cli::run_scenario(sc, trace_path.empty() ? nullptr : &trace);
  const std::string body = res.report.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << body;
  } else {
    std::ofstream out(out_path);
    if (!out) throw ConfigError("cannot write " + out_path);
    out << body;
  }
  if (!res.pass) {
    for (const auto& v : res.report["violations"]) std::cerr << "violation: " << v.get<std::string>() << '\n';
  }
  return res.pass ? 0 : 1;
}

int do_sweep(const std::string& ns, const std::string& algos, const std::string& faults, std::uint64_t seeds,
             const std::string& out_path, bool worst, Time round_timeout) {
  cli::SweepOptions o;
  o.seeds = seeds;
  o.worst_case_delivery = worst;
  o.round_timeout = round_timeout;
  o.ns.clear();
  for (const auto& s : split(ns)) {
    std::size_t n = 0;
    try {
      n = std::stoul(s);
    } catch (const std::exception&) {
      throw ConfigError("--n: '" + s + "' is not a node count");
    }
    SystemConfig cfg;
    cfg.n = n;
    cfg.t = SystemConfig::max_faults(n);
    cfg.validate();
    o.ns.push_back(n);
  }
  o.algos.clear();
  for (const auto& s : split(algos)) {
    const auto a = algorithm_from_string(s);
    if (!a) throw ConfigError("--algo: unknown algorithm '" + s + "'");
    o.algos.push_back(*a);
  }
  o.faults.clear();
  for (const auto& s : split(faults)) {
    bool ok = false;
    auto f = cli::fault_from_string(s, ok);
    if (!ok) throw ConfigError("--faults: unknown fault mode '" + s + "'");
    o.faults.push_back(f);
  }

  std::size_t failed = 0;
  if (out_path.empty() || out_path == "-") {
    failed = cli::sweep(o, std::cout);
  } else {
    std::ofstream out(out_path);
    if (!out) throw ConfigError("cannot write " + out_path);
    failed = cli::sweep(o, out);
  }
  if (failed) std::cerr << failed << " sweep rows did not pass\n";
  return failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic simulator for interactive-consistency protocols"};
  app.require_subcommand(1);

  std::string trace_path;
  bool worst = false;
  app.add_option("--trace", trace_path, "Write one line per event to this file");
  app.add_flag("--worst-case-delivery", worst, "Deliver every honest message after exactly delta");

  auto* run = app.add_subcommand("run", "Run a scenario file and print its JSON report");
  std::string scenario;
  std::string report_out;
  run->add_option("scenario", scenario, "Scenario file (JSON)")->required();
  run->add_option("--out", report_out, "Write the report here instead of stdout");

  auto* sw = app.add_subcommand("sweep", "Run a grid of configurations and write CSV");
  std::string ns = "4";
  std::string algos = "pease,mc-rbb,bc-rbb";
  std::string faults = "none";
  std::uint64_t seeds = 1;
  std::string csv_out;
  Time round_timeout = 3000;
  sw->add_option("--n", ns, "Comma-separated node counts");
  sw->add_option("--algo", algos, "Comma-separated algorithms: pease, mc-rbb, bc-rbb, eic");
  sw->add_option("--faults", faults,
                 "Comma-separated: none, crash, equivocate, withhold_final, delay_to_barrier, spam_phases, silent");
  sw->add_option("--seeds", seeds, "Seeds 1..N per configuration (0 writes the header only)");
  sw->add_option("--out", csv_out, "CSV output path (default stdout)");
  sw->add_option("--round-timeout", round_timeout, "Relay-round timeout T_r");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return do_run(scenario, trace_path, worst, report_out);
    return do_sweep(ns, algos, faults, seeds, csv_out, worst, round_timeout);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
