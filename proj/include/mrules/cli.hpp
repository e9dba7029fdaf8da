#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "mrules/multipliers.hpp"

namespace mrules::cli {

inline constexpr int kExitInputError = 1;
inline constexpr int kExitNumericalError = 2;
inline constexpr int kExitCorpusMismatch = 5;

/// Entry point shared by the binary and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Reads MRULES_SEED; the default seed when unset. Throws InputError.
std::uint64_t seed_from_environment();

struct CorpusEntry {
  std::string name;
  std::string expected;
  std::string actual;
  double max_error = 0.0;
  double seconds = 0.0;
  bool pass = false;
  std::string detail;
};

/// One entry per "*.problem" file, sorted by file name. Throws InputError
/// when the directory cannot be read or holds no problems.
std::vector<CorpusEntry> run_corpus(const std::filesystem::path& dir,
                                    const EngineConfig& cfg);

}  // namespace mrules::cli
