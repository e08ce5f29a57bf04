#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <vector>

#include "mmt/config.hpp"

namespace mmt {

/// Command-line flag values layered over the loaded config; an unset field
/// leaves the config value untouched.
struct CliOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<ReplayMode> replay_mode;
    std::optional<Ratio> fail_threshold;
    std::optional<std::filesystem::path> out_dir;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;      // configuration / IO / schema failure
inline constexpr int kExitThreshold = 2;  // a pass rate fell below --fail-threshold

/// Generates a perturbation suite from the config's generation settings and
/// writes it to `suite_out` (default: the config's suite path, then
/// <out_dir>/suite.jsonl). Prints per-type coverage and skipped pairs.
int cmd_perturb(const std::filesystem::path& config_path, const CliOverrides& overrides,
                const std::optional<std::filesystem::path>& suite_out, std::ostream& out);

/// Executes the configured plan once per provider and writes
/// <out_dir>/results_<provider>.jsonl. Per-record provider failures are
/// reported in the summary line but do not change the exit code.
int cmd_run(const std::filesystem::path& config_path, const CliOverrides& overrides,
            std::ostream& out);

/// Scores result-set files, prints one line per summary, writes the
/// configured report formats plus a failure drill-down per result set, and
/// applies the fail threshold (exit kExitThreshold when any metamorphic
/// pass rate falls below it).
int cmd_score(const std::filesystem::path& config_path, const CliOverrides& overrides,
              const std::vector<std::filesystem::path>& result_files, std::ostream& out);

/// Re-renders report documents from a structured summaries file.
int cmd_report(const std::filesystem::path& config_path, const CliOverrides& overrides,
               const std::filesystem::path& summaries_file, std::ostream& out);

}  // namespace mmt
