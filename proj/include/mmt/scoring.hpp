#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mmt/core.hpp"
#include "mmt/runner.hpp"

namespace mmt {

enum class AccuracyVerdict { Correct, Incorrect, Error };

enum class Outcome { Pass, Fail, Error };

/// Judgement for one (original, perturbed) response pair. Carries the
/// perturbed text because one case can have several perturbed variants of
/// the same type; (case_id, ptype, style, mode, perturbed_text) is unique.
struct MetamorphicVerdict {
    std::string case_id;
    PerturbationType ptype = PerturbationType::Taxonomy;
    PromptStyle style;
    ContextMode context_mode = ContextMode::NoContext;
    std::string perturbed_text;
    std::optional<Label> original_label;
    std::optional<Label> perturbed_label;
    MetamorphicRelation relation = MetamorphicRelation::Identity;
    Outcome outcome = Outcome::Error;
    std::string error_reason;  // set iff outcome == Error
};

/// Exact rational with a positive denominator. Pass rates stay rational all
/// the way to the report layer; only rendering rounds.
struct Ratio {
    long long num = 0;
    long long den = 1;

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

/// Value equality by cross-multiplication; 21/25 equals 42/50.
bool operator==(const Ratio& a, const Ratio& b);
inline bool operator!=(const Ratio& a, const Ratio& b) { return !(a == b); }

enum class MetricKind { Accuracy, Metamorphic };

/// One aggregated cell: either accuracy or metamorphic pass rate for a
/// (category, style, mode) group. A missing ptype is the originals group,
/// which exists only for the Accuracy metric.
struct ScoreSummary {
    std::string provider_id;
    TaskKind task = TaskKind::SentimentAnalysis;
    MetricKind metric = MetricKind::Metamorphic;
    std::optional<PerturbationType> ptype;
    PromptStyle style;
    ContextMode context_mode = ContextMode::NoContext;
    long long n_test = 0;
    long long n_pass = 0;

    Ratio pass_rate() const;   // n_pass / n_test
    Ratio error_rate() const;  // 1 - pass_rate, exactly
};

/// Correct iff the parsed label equals the gold label; Error when the
/// provider failed or the response did not parse. Never throws.
AccuracyVerdict accuracy_verdict(const ResultRecord& record);

/// Judges one pair. Throws PairMismatch unless `original` is an original
/// record, `perturbed` a perturbed one, and both share (case_id, style,
/// mode). Outcome is Error when either side errored or failed to parse,
/// otherwise Pass iff the entry's relation holds between the parsed labels.
MetamorphicVerdict metamorphic_verdict(const ResultRecord& original,
                                       const ResultRecord& perturbed);

/// All pair verdicts of a result set, in the set's canonical record order.
std::vector<MetamorphicVerdict> pair_verdicts(const ResultSet& results);

/// Groups verdicts by (ptype, style, mode) and counts: n_test = every
/// verdict in the group, n_pass = Pass outcomes only, so errors always count
/// against the pass rate. Throws EmptyGroup for an empty verdict list.
std::vector<ScoreSummary> summarize(const std::vector<MetamorphicVerdict>& verdicts,
                                    const std::string& provider_id, TaskKind task);

/// Accuracy per (optional ptype, style, mode) over every record; originals
/// form their own group (absent ptype). Errors count as not correct.
std::vector<ScoreSummary> summarize_accuracy(const ResultSet& results);

/// Both metrics for one result set: accuracy summaries followed by
/// metamorphic summaries, each in canonical group order.
std::vector<ScoreSummary> score(const ResultSet& results);

const char* to_string(AccuracyVerdict verdict);
const char* to_string(Outcome outcome);
const char* to_string(MetricKind metric);
MetricKind metric_from_string(std::string_view s);

}  // namespace mmt
