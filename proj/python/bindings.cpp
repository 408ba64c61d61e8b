// Python surface: JSON text in, JSON text out. The package wrapper decodes it.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "roboecon/cli.hpp"
#include "roboecon/ledger.hpp"
#include "roboecon/report.hpp"
#include "roboecon/scenario.hpp"
#include "roboecon/simulation.hpp"

namespace py = pybind11;
using namespace roboecon;

namespace {

ScenarioConfig configure(const std::string& text, std::optional<std::uint64_t> seed, std::optional<int> difficulty) {
  auto config = parse_scenario(text);
  if (seed) config.seed = *seed;
  if (difficulty) config.pow_difficulty = *difficulty;
  return config;
}

std::string econ_report(const std::string& config_text) {
  return to_json(econ_only_report(parse_scenario(config_text))).dump();
}

py::dict simulate(const std::string& config_text, std::optional<std::uint64_t> seed, std::optional<int> difficulty,
                  bool trace) {
  const auto config = configure(config_text, seed, difficulty);
  std::ostringstream trace_out, chain_out;
  std::string report;
  {
    py::gil_scoped_release unlocked;
    const auto result = run_simulation(config, trace ? &trace_out : nullptr);
    const auto rep = simulate_and_decompose(result, config);
    report = to_json(rep).dump();
    write_chain_jsonl(result.chain, chain_out);
  }
  py::dict out;
  out["report"] = report;
  out["chain"] = chain_out.str();
  out["trace"] = trace ? py::object(py::str(trace_out.str())) : py::object(py::none());
  return out;
}

py::dict verify_chain(const std::string& jsonl, std::optional<std::uint64_t> seed) {
  std::istringstream in(jsonl);
  const auto blocks = read_chain_jsonl(in);
  std::optional<KeyedDigestScheme> keys;
  if (seed) keys.emplace(*seed);
  const auto v = validate_chain(blocks, {keys ? &*keys : nullptr});
  py::dict out;
  out["accepted"] = v.accepted();
  out["blocks"] = blocks.size();
  out["reason"] = std::string(to_string(v.reason));
  out["height"] = v.height;
  out["detail"] = v.detail;
  out["signatures_checked"] = seed.has_value();
  return out;
}

std::string canonical_block(const std::string& block_json) {
  return canonical_serialize(block_from_json(nlohmann::json::parse(block_json)));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "roboecon native core";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<EconError>(m, "EconError", PyExc_ValueError);
  py::register_exception<LedgerError>(m, "LedgerError", PyExc_ValueError);
  py::register_exception<SimError>(m, "ScenarioError", PyExc_RuntimeError);

  m.def("econ_report", &econ_report, py::arg("config_text"));
  m.def("simulate", &simulate, py::arg("config_text"), py::arg("seed") = py::none(),
        py::arg("difficulty") = py::none(), py::arg("trace") = false);
  m.def("verify_chain", &verify_chain, py::arg("jsonl"), py::arg("seed") = py::none());
  m.def("canonical_block", [](const std::string& s) { return py::bytes(canonical_block(s)); }, py::arg("block_json"));
  m.def("format_dollars", &format_dollars, py::arg("cents"));
}
