#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "mmt/core.hpp"

namespace mmt {

/// Loads a line-delimited dataset file. Each line is a JSON object with
/// fields {id, task, text, context?, expected}. Enforces unique ids and the
/// per-case invariants.
std::vector<TestCase> load_dataset(const std::filesystem::path& path);

void save_dataset(const std::filesystem::path& path, std::span<const TestCase> cases);

/// The task shared by every case in the dataset. Mixed-task datasets are
/// rejected: prompt styles and context modes apply to a run as a whole.
TaskKind dataset_task(std::span<const TestCase> cases);

}  // namespace mmt
