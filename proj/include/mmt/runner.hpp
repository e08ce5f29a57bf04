#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mmt/core.hpp"
#include "mmt/perturb.hpp"
#include "mmt/prompt.hpp"
#include "mmt/provider.hpp"

namespace mmt {

/// Everything one evaluation run depends on. A plan is a pure value: its
/// digest covers every input that can influence the responses, so runs with
/// equal digests are interchangeable for replay purposes.
struct RunPlan {
    std::vector<TestCase> dataset;
    PerturbationSuite suite;
    std::vector<PromptStyle> styles;
    std::vector<ContextMode> context_modes;
    ProviderConfig provider;
    std::vector<Shot> shot_pool;
    TemplateSet templates;
    std::uint64_t seed = 0;

    TaskKind task() const;

    /// Demonstrations used for `style`: the first shot_count() entries of
    /// the pool, fixed for the whole run so every original/perturbed pair
    /// sees identical demonstrations.
    std::vector<Shot> shots_for(PromptStyle style) const;

    /// Throws ErrorKind::Config or Schema when the plan is not runnable:
    /// empty dataset/styles/modes, a suite entry whose base id is missing, a
    /// context mode or suite type incompatible with the task, a shot pool
    /// smaller than the widest style or sharing ids with the dataset, or
    /// WithContext with a case or shot that has no context.
    void validate() const;

    /// Hex digest over all run inputs (dataset, suite, styles, modes,
    /// templates, shots, provider identity, seed). Stamped on every
    /// ResultSet produced from this plan.
    std::string digest() const;
};

/// One completed query. Self-contained: it carries the input text, context,
/// gold label and relation, so scoring and reporting work from the result
/// file alone without re-reading dataset or suite files.
struct ResultRecord {
    std::string case_id;
    std::optional<PerturbationType> ptype;        // absent = original case
    std::optional<MetamorphicRelation> relation;  // absent = original case
    PromptStyle style;
    ContextMode context_mode = ContextMode::NoContext;
    std::string input_text;
    std::optional<std::string> context;
    Label gold = Label::Neutral;
    ModelResponse response;
    std::optional<std::string> error;  // provider failure tag; response empty

    bool is_original() const { return !ptype.has_value(); }
};

struct ResultSet {
    std::string plan_digest;
    TaskKind task = TaskKind::SentimentAnalysis;
    std::string provider_id;
    std::string model;
    std::string started;  // ISO-8601 UTC; never part of the canonical body
    std::string finished;
    std::vector<ResultRecord> records;

    /// Canonical serialization of the records alone: one JSON object per
    /// line in a stable field order, with wall-clock artifacts (timestamps,
    /// latencies) excluded. Two runs are equivalent iff their canonical
    /// bodies are byte-identical.
    std::string records_jsonl() const;

    /// Writes a header line followed by one line per record.
    void save(const std::filesystem::path& path) const;
    static ResultSet load(const std::filesystem::path& path);

    /// The unique original record for (case_id, style, mode), or nullptr.
    const ResultRecord* find_original(const std::string& case_id, PromptStyle style,
                                      ContextMode mode) const;
};

struct RunOptions {
    /// When set, jobs are dispatched in a seed-shuffled order instead of the
    /// natural one. Records are canonically re-sorted either way; the knob
    /// exists to exercise order independence in tests.
    std::optional<std::uint64_t> shuffle_seed;
};

/// Executes the plan: renders one prompt per (case, style, mode), completes
/// it through `provider` (concurrently, up to provider.max_in_flight()
/// worker threads), parses each response, and returns records in canonical
/// order: case_id, originals before perturbations, type, input text, style,
/// context mode. Provider failures are captured per record, never thrown;
/// only configuration problems abort a run. Per (style, mode) every original
/// is queried exactly once and its single response is shared by every
/// perturbation type, so provider calls = (|dataset| + |suite|) x |styles| x
/// |modes|.
ResultSet run(const RunPlan& plan, Provider& provider, const RunOptions& options = {});

}  // namespace mmt
