#pragma once

// Shared scaffolding for the unit tests: repo-relative paths, throwaway
// directories, and tiny builders for datasets and plans.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mmt/core.hpp"
#include "mmt/prompt.hpp"
#include "mmt/provider.hpp"
#include "mmt/runner.hpp"

namespace testutil {

inline std::filesystem::path repo_dir() { return std::filesystem::path(MMT_REPO_DIR); }

inline std::filesystem::path cli_path() { return std::filesystem::path(MMT_CLI_PATH); }

/// A unique directory under the system temp dir, removed on destruction.
struct TempDir {
    std::filesystem::path path;

    TempDir() {
        std::random_device rd;
        std::uniform_int_distribution<unsigned long long> dist;
        path = std::filesystem::temp_directory_path() /
               ("mmt_test_" + std::to_string(dist(rd)));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
};

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << content;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

/// Runs the real CLI binary with `args`, captures interleaved stdout+stderr
/// into `output`, and returns the exit code (-1 if the process failed to
/// spawn or was killed).
inline int run_cli(const std::string& args, std::string& output) {
    const std::string command = "'" + cli_path().string() + "' " + args + " 2>&1";
    output.clear();
    FILE* pipe = popen(command.c_str(), "r");
    if (!pipe) return -1;
    char buffer[4096];
    std::size_t got;
    while ((got = fread(buffer, 1, sizeof(buffer), pipe)) > 0) {
        output.append(buffer, got);
    }
    const int status = pclose(pipe);
    if (status < 0 || !WIFEXITED(status)) return -1;
    return WEXITSTATUS(status);
}

inline mmt::TestCase sa_case(std::string id, std::string text, mmt::Label gold) {
    mmt::TestCase test_case;
    test_case.id = std::move(id);
    test_case.task = mmt::TaskKind::SentimentAnalysis;
    test_case.input_text = std::move(text);
    test_case.expected = gold;
    return test_case;
}

inline mmt::TestCase qa_case(std::string id, std::string text, std::string context,
                             mmt::Label gold) {
    mmt::TestCase test_case;
    test_case.id = std::move(id);
    test_case.task = mmt::TaskKind::QuestionAnswering;
    test_case.input_text = std::move(text);
    test_case.context = std::move(context);
    test_case.expected = gold;
    return test_case;
}

inline mmt::PerturbedCase perturbed(std::string base_id, mmt::PerturbationType ptype,
                                    std::string text, mmt::MetamorphicRelation relation,
                                    mmt::Label expected) {
    mmt::PerturbedCase entry;
    entry.base_id = std::move(base_id);
    entry.ptype = ptype;
    entry.text = std::move(text);
    entry.relation = relation;
    entry.expected = expected;
    entry.provenance = mmt::Provenance::Curated;
    return entry;
}

inline mmt::ProviderConfig scripted_config(std::string name) {
    mmt::ProviderConfig config;
    config.name = std::move(name);
    config.kind = mmt::ProviderKind::Scripted;
    config.model = config.name;
    config.script = "echo-gold";
    return config;
}

inline mmt::TemplateSet default_templates() {
    return mmt::TemplateSet::load_dir(repo_dir() / "assets" / "templates");
}

}  // namespace testutil
