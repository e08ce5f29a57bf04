#include "mmt/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "jsonl.hpp"
#include "mmt/dataset.hpp"
#include "mmt/lexicon.hpp"
#include "mmt/runner.hpp"

namespace mmt {

namespace {

void apply_overrides(HarnessConfig& config, const CliOverrides& overrides) {
    if (overrides.seed) {
        config.seed = *overrides.seed;
        if (config.generate) config.generate->seed = *overrides.seed;
    }
    if (overrides.replay_mode) config.replay.mode = *overrides.replay_mode;
    if (overrides.fail_threshold) config.fail_threshold = *overrides.fail_threshold;
    if (overrides.out_dir) config.out_dir = *overrides.out_dir;
    if (config.replay.store.empty()) config.replay.store = config.out_dir / "replay.jsonl";
    config.validate();
}

void require_exists(const std::filesystem::path& path, const char* what) {
    if (!std::filesystem::exists(path)) {
        throw HarnessError(ErrorKind::Io,
                           std::string(what) + " '" + path.string() + "' does not exist");
    }
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw HarnessError(ErrorKind::Io, "cannot open '" + path.string() + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out = jsonl::open_for_write(path);
    out << content;
    if (!out) {
        throw HarnessError(ErrorKind::Io, "failed to write '" + path.string() + "'");
    }
}

std::string dataset_id_of(const std::filesystem::path& dataset_path) {
    return dataset_path.stem().string();
}

void check_requested_types(const GenerateOptions& options, TaskKind task) {
    for (PerturbationType ptype : options.types) {
        if (!is_applicable(ptype, task)) {
            throw HarnessError(ErrorKind::ApplicabilityViolation,
                               std::string("'") + to_string(ptype) +
                                   "' does not apply to task '" + to_string(task) + "'");
        }
    }
}

/// The built-in "echo-gold" script answers every prompt with the gold label
/// of the case whose text the prompt ends with (the templates always place
/// the case text last). The longest matching suffix wins, so a case whose
/// text happens to be a suffix of another never shadows it.
std::function<std::string(const CompletionRequest&)> make_echo_gold(
    const std::vector<TestCase>& dataset, const PerturbationSuite& suite) {
    auto entries = std::make_shared<std::vector<std::pair<std::string, std::string>>>();
    for (const TestCase& test_case : dataset) {
        entries->emplace_back(test_case.input_text, display_label(test_case.expected));
    }
    for (const PerturbedCase& entry : suite.entries) {
        entries->emplace_back(entry.text, display_label(entry.expected));
    }
    return [entries](const CompletionRequest& request) {
        const std::pair<std::string, std::string>* best = nullptr;
        for (const auto& entry : *entries) {
            if (request.user_text.ends_with(entry.first) &&
                (!best || entry.first.size() > best->first.size())) {
                best = &entry;
            }
        }
        return best ? best->second : std::string();
    };
}

std::unique_ptr<Provider> build_provider(const HarnessConfig& config,
                                         const ProviderConfig& provider_config,
                                         const std::vector<TestCase>& dataset,
                                         const PerturbationSuite& suite) {
    switch (provider_config.kind) {
        case ProviderKind::Scripted: {
            if (config.replay.mode == ReplayMode::Record) {
                throw HarnessError(ErrorKind::Config,
                                   "record mode needs a live http provider, but '" +
                                       provider_config.name + "' is scripted");
            }
            if (provider_config.script == "echo-gold") {
                return make_scripted_provider(provider_config.name,
                                              make_echo_gold(dataset, suite),
                                              provider_config.max_in_flight);
            }
            throw HarnessError(ErrorKind::Config, "unknown script '" + provider_config.script +
                                                      "' (available: echo-gold)");
        }
        case ProviderKind::Replay: {
            auto store = ReplayStore::open(config.replay.store, ReplayMode::Replay);
            return make_replay_provider(provider_config, std::move(store));
        }
        case ProviderKind::HttpChat: {
            if (config.replay.mode == ReplayMode::Replay) {
                auto store = ReplayStore::open(config.replay.store, ReplayMode::Replay);
                return make_replay_provider(provider_config, std::move(store));
            }
            // A live run needs the token up front; failing on the first of
            // hundreds of records would waste the whole run.
            const char* token = std::getenv(provider_config.auth_env.c_str());
            if (!token || !*token) {
                throw HarnessError(ErrorKind::Auth, "environment variable '" +
                                                        provider_config.auth_env +
                                                        "' is not set");
            }
            if (config.replay.mode == ReplayMode::Record) {
                auto store = ReplayStore::open(config.replay.store, ReplayMode::Record);
                return make_recording_provider(provider_config, std::move(store));
            }
            return make_http_provider(provider_config);
        }
    }
    throw HarnessError(ErrorKind::Config, "unhandled provider kind");
}

PerturbationSuite load_or_generate_suite(const HarnessConfig& config,
                                         const std::vector<TestCase>& dataset,
                                         std::ostream& out) {
    const std::string dataset_id = dataset_id_of(config.dataset_path);
    if (config.suite_path) {
        require_exists(*config.suite_path, "suite");
        return load_suite(*config.suite_path, dataset, dataset_id);
    }
    if (config.generate) {
        check_requested_types(*config.generate, dataset_task(dataset));
        Lexicon lexicon = Lexicon::load_dir(config.lexicon_dir);
        GeneratedSuite generated = generate_suite(dataset, *config.generate, lexicon, dataset_id);
        if (!generated.skipped.empty()) {
            fmt::print(out, "generated suite skipped {} pair(s)\n", generated.skipped.size());
        }
        return std::move(generated.suite);
    }
    return PerturbationSuite{dataset_id, {}};
}

std::string summary_line(const ScoreSummary& summary, int precision) {
    return fmt::format("{} {} {} {} {} {}: #Correct {} / {}, pass rate {}", summary.provider_id,
                       to_string(summary.task), to_string(summary.metric),
                       summary.ptype ? to_string(*summary.ptype) : "original",
                       to_string(summary.style), to_string(summary.context_mode), summary.n_pass,
                       summary.n_test, format_percent(summary.pass_rate(), precision));
}

void write_reports(const std::vector<ScoreSummary>& summaries, const HarnessConfig& config,
                   std::ostream& out) {
    RenderedReport report = render_tables(summaries, config.report);
    if (!report.markdown.empty()) {
        write_text_file(config.out_dir / "report.md", report.markdown);
        fmt::print(out, "wrote {}\n", (config.out_dir / "report.md").string());
    }
    if (!report.csv.empty()) {
        write_text_file(config.out_dir / "report.csv", report.csv);
        fmt::print(out, "wrote {}\n", (config.out_dir / "report.csv").string());
    }
    if (!report.json.empty()) {
        write_text_file(config.out_dir / "summaries.json", report.json);
        fmt::print(out, "wrote {}\n", (config.out_dir / "summaries.json").string());
    }
}

}  // namespace

int cmd_perturb(const std::filesystem::path& config_path, const CliOverrides& overrides,
                const std::optional<std::filesystem::path>& suite_out, std::ostream& out) {
    HarnessConfig config = HarnessConfig::load(config_path);
    apply_overrides(config, overrides);
    if (!config.generate) {
        throw HarnessError(ErrorKind::Config,
                           "config has no 'generate' settings; nothing to perturb");
    }
    require_exists(config.dataset_path, "dataset");
    std::vector<TestCase> dataset = load_dataset(config.dataset_path);
    check_requested_types(*config.generate, dataset_task(dataset));

    Lexicon lexicon = Lexicon::load_dir(config.lexicon_dir);
    GeneratedSuite generated =
        generate_suite(dataset, *config.generate, lexicon, dataset_id_of(config.dataset_path));

    const std::filesystem::path target = suite_out    ? *suite_out
                                         : config.suite_path ? *config.suite_path
                                                             : config.out_dir / "suite.jsonl";
    save_suite(target, generated.suite);

    for (const auto& [ptype, count] : generated.suite.coverage()) {
        fmt::print(out, "{}: {} entries\n", to_string(ptype), count);
    }
    for (const SkippedPair& skipped : generated.skipped) {
        fmt::print(out, "skipped {} {}: {}\n", skipped.case_id, to_string(skipped.ptype),
                   skipped.reason);
    }
    fmt::print(out, "wrote {} entries to {}\n", generated.suite.entries.size(), target.string());
    return kExitOk;
}

int cmd_run(const std::filesystem::path& config_path, const CliOverrides& overrides,
            std::ostream& out) {
    HarnessConfig config = HarnessConfig::load(config_path);
    apply_overrides(config, overrides);
    require_exists(config.dataset_path, "dataset");
    std::vector<TestCase> dataset = load_dataset(config.dataset_path);
    PerturbationSuite suite = load_or_generate_suite(config, dataset, out);
    TemplateSet templates = TemplateSet::load_dir(config.template_dir);
    std::vector<Shot> shots;
    if (!config.shots_path.empty()) {
        require_exists(config.shots_path, "shot pool");
        shots = load_shot_pool(config.shots_path, dataset_task(dataset));
    }

    for (const ProviderConfig& provider_config : config.providers) {
        RunPlan plan;
        plan.dataset = dataset;
        plan.suite = suite;
        plan.styles = config.styles;
        plan.context_modes = config.context_modes;
        plan.provider = provider_config;
        plan.shot_pool = shots;
        plan.templates = templates;
        plan.seed = config.seed;

        std::unique_ptr<Provider> provider =
            build_provider(config, provider_config, dataset, suite);
        ResultSet results = run(plan, *provider);

        const std::filesystem::path target =
            config.out_dir / ("results_" + provider_config.name + ".jsonl");
        results.save(target);
        std::size_t errors = 0;
        for (const ResultRecord& record : results.records) {
            if (record.error) ++errors;
        }
        fmt::print(out, "{}: {} records, {} errors -> {}\n", provider_config.name,
                   results.records.size(), errors, target.string());
    }
    return kExitOk;
}

int cmd_score(const std::filesystem::path& config_path, const CliOverrides& overrides,
              const std::vector<std::filesystem::path>& result_files, std::ostream& out) {
    HarnessConfig config = HarnessConfig::load(config_path);
    apply_overrides(config, overrides);
    if (result_files.empty()) {
        throw HarnessError(ErrorKind::Config, "score needs at least one result-set file");
    }

    std::vector<ScoreSummary> all_summaries;
    for (const std::filesystem::path& file : result_files) {
        require_exists(file, "result set");
        ResultSet results = ResultSet::load(file);
        std::vector<ScoreSummary> summaries = score(results);
        for (const ScoreSummary& summary : summaries) {
            fmt::print(out, "{}\n", summary_line(summary, config.report.percent_precision));
        }
        all_summaries.insert(all_summaries.end(), summaries.begin(), summaries.end());

        if (config.report.include_failures) {
            std::vector<MetamorphicVerdict> verdicts = pair_verdicts(results);
            const std::filesystem::path target =
                config.out_dir / (file.stem().string() + "_failures.md");
            write_text_file(target, render_failures(verdicts, results));
            fmt::print(out, "wrote {}\n", target.string());
        }
    }

    write_reports(all_summaries, config, out);

    if (config.fail_threshold) {
        const Ratio threshold = *config.fail_threshold;
        bool breached = false;
        for (const ScoreSummary& summary : all_summaries) {
            if (summary.metric != MetricKind::Metamorphic) continue;
            const Ratio rate = summary.pass_rate();
            if (rate.num * threshold.den < threshold.num * rate.den) {
                fmt::print(out, "threshold breach: {} (below {})\n",
                           summary_line(summary, config.report.percent_precision),
                           format_percent(threshold, config.report.percent_precision));
                breached = true;
            }
        }
        if (breached) return kExitThreshold;
    }
    return kExitOk;
}

int cmd_report(const std::filesystem::path& config_path, const CliOverrides& overrides,
               const std::filesystem::path& summaries_file, std::ostream& out) {
    HarnessConfig config = HarnessConfig::load(config_path);
    apply_overrides(config, overrides);
    require_exists(summaries_file, "summaries document");
    std::vector<ScoreSummary> summaries = parse_summaries_json(read_text_file(summaries_file));
    write_reports(summaries, config, out);
    return kExitOk;
}

}  // namespace mmt
