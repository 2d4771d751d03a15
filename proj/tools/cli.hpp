#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>

namespace dsvit::cli {

inline constexpr const char* kSeedEnv = "DSVIT_SEED";

// Flag, then DSVIT_SEED, then the config value.
std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, std::uint64_t config_seed);

// Runs one command line; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dsvit::cli
