#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "mmt/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Metamorphic evaluation harness for in-context learning"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 0;
    std::string replay_mode;
    std::string fail_threshold;
    std::string out_dir;
    app.add_option("--config", config_path, "JSON config file")->required();
    app.add_option("--seed", seed, "Override the config's seed");
    app.add_option("--replay", replay_mode, "Replay mode: record, replay, or off");
    app.add_option("--fail-threshold", fail_threshold,
                   "Exit nonzero when any metamorphic pass rate falls below this rate (0..1)");
    app.add_option("--out", out_dir, "Override the config's output directory");

    std::string suite_out;
    std::vector<std::string> result_files;
    std::string summaries_file;

    CLI::App* perturb = app.add_subcommand("perturb", "Generate a perturbation suite");
    perturb->add_option("--suite-out", suite_out, "Where to write the suite file");
    CLI::App* run = app.add_subcommand("run", "Query each provider and write result sets");
    CLI::App* score = app.add_subcommand("score", "Score result sets and write reports");
    score->add_option("results", result_files, "Result-set files")->required();
    CLI::App* report = app.add_subcommand("report", "Re-render reports from a summaries file");
    report->add_option("summaries", summaries_file, "Structured summaries document")->required();
    for (CLI::App* sub : {perturb, run, score, report}) sub->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        mmt::CliOverrides overrides;
        if (app.count("--seed") > 0) overrides.seed = seed;
        if (app.count("--replay") > 0) {
            overrides.replay_mode = mmt::replay_mode_from_string(replay_mode);
        }
        if (app.count("--fail-threshold") > 0) {
            mmt::Ratio threshold = mmt::ratio_from_decimal(fail_threshold);
            if (threshold.num > threshold.den) {
                throw mmt::HarnessError(mmt::ErrorKind::Config,
                                        "--fail-threshold must lie in [0, 1]");
            }
            overrides.fail_threshold = threshold;
        }
        if (app.count("--out") > 0) overrides.out_dir = out_dir;

        if (perturb->parsed()) {
            std::optional<std::filesystem::path> suite_target;
            if (perturb->count("--suite-out") > 0) suite_target = suite_out;
            return mmt::cmd_perturb(config_path, overrides, suite_target, std::cout);
        }
        if (run->parsed()) {
            return mmt::cmd_run(config_path, overrides, std::cout);
        }
        if (score->parsed()) {
            std::vector<std::filesystem::path> files(result_files.begin(), result_files.end());
            return mmt::cmd_score(config_path, overrides, files, std::cout);
        }
        if (report->parsed()) {
            return mmt::cmd_report(config_path, overrides, summaries_file, std::cout);
        }
        std::cerr << "error: no command given\n";
        return mmt::kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return mmt::kExitError;
    }
}
