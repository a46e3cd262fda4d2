#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sliceshift/decision.hpp"

namespace sliceshift {

// Runs one scenario and writes summary.json, events.log, timeseries.csv to
// out_dir. Returns 0 on success, 2 on scenario or I/O errors.
int cmd_simulate(const std::filesystem::path& scenario_path, std::uint64_t seed, Policy policy,
                 const std::filesystem::path& out_dir,
                 std::optional<double> duration_override = std::nullopt);

// Runs every policy with the same seed (per-policy subdirectories) and
// writes compare.csv. Requires at least two policies. Exit codes as above.
int cmd_compare(const std::filesystem::path& scenario_path, std::uint64_t seed,
                const std::vector<Policy>& policies, const std::filesystem::path& out_dir,
                std::optional<double> duration_override = std::nullopt);

} // namespace sliceshift
