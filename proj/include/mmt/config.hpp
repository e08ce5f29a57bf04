#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mmt/perturb.hpp"
#include "mmt/prompt.hpp"
#include "mmt/provider.hpp"
#include "mmt/report.hpp"
#include "mmt/scoring.hpp"

namespace mmt {

/// Parses a non-negative decimal string ("0.9", "1", ".84") into an exact
/// ratio (9/10, 1/1, 84/100). Threshold comparisons stay rational so a pass
/// rate exactly at the threshold never breaches it through float noise.
Ratio ratio_from_decimal(std::string_view text);

struct ReplaySettings {
    ReplayMode mode = ReplayMode::Passthrough;
    std::filesystem::path store;  // defaults to <out_dir>/replay.jsonl
};

/// The declarative run description loaded from a JSON config file. All
/// relative paths inside the file resolve against the file's directory, so
/// a checked-in config works from any working directory. Command-line flags
/// override individual fields after loading.
struct HarnessConfig {
    std::filesystem::path dataset_path;
    std::optional<std::filesystem::path> suite_path;
    std::optional<GenerateOptions> generate;
    std::filesystem::path lexicon_dir;
    std::filesystem::path template_dir;
    std::filesystem::path shots_path;
    std::vector<PromptStyle> styles = {PromptStyle{}};
    std::vector<ContextMode> context_modes = {ContextMode::NoContext};
    std::vector<ProviderConfig> providers;
    ReplaySettings replay;
    ReportSpec report;
    std::filesystem::path out_dir = "out";
    std::uint64_t seed = 0;
    std::optional<Ratio> fail_threshold;  // breach when a pass rate is below

    static HarnessConfig load(const std::filesystem::path& path);

    /// Structural checks only (at least one provider, valid provider
    /// entries, nonempty styles/modes, threshold in [0,1]); per-command
    /// path existence is checked where the path is actually used.
    void validate() const;
};

}  // namespace mmt
