#include "roboecon/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "roboecon/report.hpp"
#include "roboecon/scenario.hpp"
#include "roboecon/simulation.hpp"

namespace roboecon::cli {

namespace {

struct RunArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> difficulty;
  bool econ_only = false;
  std::string report = "both";
  std::string trace;
  std::string chain;
  std::string report_out;
};

struct VerifyArgs {
  std::string chain;
  std::optional<std::uint64_t> seed;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::ofstream open_output(const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + path);
  return f;
}

std::string render(const ScenarioReport& r, const std::string& mode) {
  std::string text;
  if (mode == "json" || mode == "both") text += to_json(r).dump(2) + "\n";
  if (mode == "table" || mode == "both") text += render_table(r);
  return text;
}

int do_run(const RunArgs& args, std::ostream& out) {
  ScenarioConfig config = load_scenario(args.config);
  if (args.seed) config.seed = *args.seed;
  if (args.difficulty) config.pow_difficulty = *args.difficulty;
  config.validate();

  ScenarioReport report;
  if (args.econ_only) {
    report = econ_only_report(config);
  } else {
    std::ofstream trace_file;
    if (!args.trace.empty()) trace_file = open_output(args.trace);
    const auto result = run_simulation(config, args.trace.empty() ? nullptr : &trace_file);
    if (!args.chain.empty()) {
      auto chain_file = open_output(args.chain);
      write_chain_jsonl(result.chain, chain_file);
    }
    report = simulate_and_decompose(result, config);
  }

  const auto text = render(report, args.report);
  if (args.report_out.empty()) {
    out << text;
  } else {
    auto f = open_output(args.report_out);
    f << text;
  }
  return kOk;
}

int do_verify(const VerifyArgs& args, std::ostream& out) {
  const auto v = verify_chain_file(args.chain, args.seed);
  if (v.verdict.accepted()) {
    out << "Accept: " << v.blocks << " blocks" << (args.seed ? "" : " (signatures not checked)") << '\n';
    return kOk;
  }
  out << "Reject at height " << *v.verdict.height << ": " << to_string(v.verdict.reason) << " ("
      << v.verdict.detail << ")\n";
  return kVerifyReject;
}

}  // namespace

VerifyOutcome verify_chain_file(const std::filesystem::path& path, std::optional<std::uint64_t> seed) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const auto blocks = read_chain_jsonl(in);
  VerifyOutcome v;
  v.blocks = blocks.size();
  if (seed) {
    KeyedDigestScheme keys(*seed);
    v.verdict = validate_chain(blocks, ValidationOptions{&keys});
  } else {
    v.verdict = validate_chain(blocks);
  }
  return v;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Robot service market simulator: contracts, ledger and cost accounting"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run a scenario and write trace, chain export and report");
  run_cmd->add_option("config", run.config, "Scenario JSON file")->required();
  run_cmd->add_option("--seed", run.seed, "Override the scenario seed");
  run_cmd->add_option("--difficulty", run.difficulty, "Override proof-of-work difficulty (leading zero bits)")
      ->check(CLI::Range(0, 32));
  run_cmd->add_flag("--econ-only", run.econ_only, "Closed-form cost model only, no simulation");
  run_cmd->add_option("--report", run.report, "Report format")
      ->check(CLI::IsMember({"json", "table", "both"}))
      ->capture_default_str();
  run_cmd->add_option("--trace", run.trace, "Write the JSON-lines event trace here");
  run_cmd->add_option("--chain", run.chain, "Write the JSON-lines chain export here");
  run_cmd->add_option("--report-out", run.report_out, "Write the report here instead of stdout");

  VerifyArgs verify;
  auto* verify_cmd = app.add_subcommand("verify", "Replay and validate a chain export offline");
  verify_cmd->add_option("chain", verify.chain, "Chain export (JSON lines)")->required();
  verify_cmd->add_option("--seed", verify.seed, "Scenario seed; enables signature checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*run_cmd) return do_run(run, out);
    return do_verify(verify, out);
  } catch (const ConfigError& e) {
    err << "ConfigError: " << e.what() << '\n';
    return kConfigError;
  } catch (const SimError& e) {
    err << "ScenarioFatal: " << e.what() << '\n';
    return kScenarioFatal;
  } catch (const LedgerError& e) {
    if (e.code() == LedgerErrc::MalformedExport) {
      err << "MalformedExport: " << e.what() << '\n';
      return kMalformedExport;
    }
    err << "ScenarioFatal: " << e.what() << '\n';
    return kScenarioFatal;
  } catch (const EconError& e) {
    err << "EconError: " << e.what() << '\n';
    return kEconError;
  } catch (const IoError& e) {
    err << "IoError: " << e.what() << '\n';
    return kIoError;
  }
}

}  // namespace roboecon::cli
