#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "roboecon/ledger.hpp"

namespace roboecon::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kConfigError = 2,
  kScenarioFatal = 3,
  kMalformedExport = 4,
  kVerifyReject = 5,
  kEconError = 6,
  kIoError = 7,
};

struct VerifyOutcome {
  ValidationVerdict verdict;
  std::size_t blocks = 0;
};

/// Offline replay of a chain export. With a seed, transaction signatures are
/// checked against the keys derived from it; without one they are skipped.
/// Throws LedgerError(MalformedExport).
VerifyOutcome verify_chain_file(const std::filesystem::path& path, std::optional<std::uint64_t> seed);

/// Entry point shared by the executable and the tests.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace roboecon::cli
