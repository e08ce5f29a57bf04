#include "mmt/scoring.hpp"

#include <algorithm>
#include <map>
#include <tuple>

namespace mmt {

namespace {

int ptype_rank(const std::optional<PerturbationType>& ptype) {
    if (!ptype) return -1;
    const auto* begin = std::begin(kAllPerturbationTypes);
    const auto* end = std::end(kAllPerturbationTypes);
    return static_cast<int>(std::find(begin, end, *ptype) - begin);
}

int style_rank(PromptStyle style) {
    switch (style.kind) {
        case PromptStyle::Kind::ZeroShot: return 0;
        case PromptStyle::Kind::OneShot: return 1;
        case PromptStyle::Kind::FewShot: return 2;
    }
    return 3;
}

// Group key in canonical emission order: category, then style, then mode.
using GroupKey = std::tuple<int, int, int, int>;

GroupKey group_key(const std::optional<PerturbationType>& ptype, PromptStyle style,
                   ContextMode mode) {
    return {ptype_rank(ptype), style_rank(style), style.few_shot_k,
            mode == ContextMode::WithContext ? 1 : 0};
}

struct GroupMeta {
    std::optional<PerturbationType> ptype;
    PromptStyle style;
    ContextMode context_mode = ContextMode::NoContext;
    long long n_test = 0;
    long long n_pass = 0;
};

std::vector<ScoreSummary> emit(const std::map<GroupKey, GroupMeta>& groups,
                               const std::string& provider_id, TaskKind task,
                               MetricKind metric) {
    std::vector<ScoreSummary> summaries;
    summaries.reserve(groups.size());
    for (const auto& [key, meta] : groups) {
        ScoreSummary summary;
        summary.provider_id = provider_id;
        summary.task = task;
        summary.metric = metric;
        summary.ptype = meta.ptype;
        summary.style = meta.style;
        summary.context_mode = meta.context_mode;
        summary.n_test = meta.n_test;
        summary.n_pass = meta.n_pass;
        summaries.push_back(std::move(summary));
    }
    return summaries;
}

}  // namespace

bool operator==(const Ratio& a, const Ratio& b) { return a.num * b.den == b.num * a.den; }

Ratio ScoreSummary::pass_rate() const { return {n_pass, std::max<long long>(n_test, 1)}; }

Ratio ScoreSummary::error_rate() const {
    return {std::max<long long>(n_test, 1) - n_pass, std::max<long long>(n_test, 1)};
}

AccuracyVerdict accuracy_verdict(const ResultRecord& record) {
    if (record.error || !record.response.parsed) return AccuracyVerdict::Error;
    return *record.response.parsed == record.gold ? AccuracyVerdict::Correct
                                                  : AccuracyVerdict::Incorrect;
}

MetamorphicVerdict metamorphic_verdict(const ResultRecord& original,
                                       const ResultRecord& perturbed) {
    if (!original.is_original()) {
        throw HarnessError(ErrorKind::PairMismatch,
                           "first record of a pair must be an original case");
    }
    if (perturbed.is_original() || !perturbed.relation) {
        throw HarnessError(ErrorKind::PairMismatch,
                           "second record of a pair must be a perturbed case with a relation");
    }
    if (original.case_id != perturbed.case_id || original.style != perturbed.style ||
        original.context_mode != perturbed.context_mode) {
        throw HarnessError(ErrorKind::PairMismatch,
                           "pair records disagree on (case_id, style, mode): '" +
                               original.case_id + "' vs '" + perturbed.case_id + "'");
    }

    MetamorphicVerdict verdict;
    verdict.case_id = perturbed.case_id;
    verdict.ptype = *perturbed.ptype;
    verdict.style = perturbed.style;
    verdict.context_mode = perturbed.context_mode;
    verdict.perturbed_text = perturbed.input_text;
    verdict.original_label = original.response.parsed;
    verdict.perturbed_label = perturbed.response.parsed;
    verdict.relation = *perturbed.relation;

    if (original.error) {
        verdict.outcome = Outcome::Error;
        verdict.error_reason = "original response failed: " + *original.error;
    } else if (perturbed.error) {
        verdict.outcome = Outcome::Error;
        verdict.error_reason = "perturbed response failed: " + *perturbed.error;
    } else if (!original.response.parsed) {
        verdict.outcome = Outcome::Error;
        verdict.error_reason = "original response did not parse to a label";
    } else if (!perturbed.response.parsed) {
        verdict.outcome = Outcome::Error;
        verdict.error_reason = "perturbed response did not parse to a label";
    } else if (relation_holds(verdict.relation, *original.response.parsed,
                              *perturbed.response.parsed)) {
        verdict.outcome = Outcome::Pass;
    } else {
        verdict.outcome = Outcome::Fail;
    }
    return verdict;
}

std::vector<MetamorphicVerdict> pair_verdicts(const ResultSet& results) {
    std::vector<MetamorphicVerdict> verdicts;
    for (const ResultRecord& record : results.records) {
        if (record.is_original()) continue;
        const ResultRecord* original =
            results.find_original(record.case_id, record.style, record.context_mode);
        if (original == nullptr) {
            throw HarnessError(ErrorKind::PairMismatch,
                               "no original record for case '" + record.case_id + "'");
        }
        verdicts.push_back(metamorphic_verdict(*original, record));
    }
    return verdicts;
}

std::vector<ScoreSummary> summarize(const std::vector<MetamorphicVerdict>& verdicts,
                                    const std::string& provider_id, TaskKind task) {
    if (verdicts.empty()) {
        throw HarnessError(ErrorKind::EmptyGroup, "no verdicts to summarize");
    }
    std::map<GroupKey, GroupMeta> groups;
    for (const MetamorphicVerdict& verdict : verdicts) {
        GroupMeta& meta = groups[group_key(verdict.ptype, verdict.style, verdict.context_mode)];
        meta.ptype = verdict.ptype;
        meta.style = verdict.style;
        meta.context_mode = verdict.context_mode;
        meta.n_test += 1;
        if (verdict.outcome == Outcome::Pass) meta.n_pass += 1;
    }
    return emit(groups, provider_id, task, MetricKind::Metamorphic);
}

std::vector<ScoreSummary> summarize_accuracy(const ResultSet& results) {
    std::map<GroupKey, GroupMeta> groups;
    for (const ResultRecord& record : results.records) {
        GroupMeta& meta = groups[group_key(record.ptype, record.style, record.context_mode)];
        meta.ptype = record.ptype;
        meta.style = record.style;
        meta.context_mode = record.context_mode;
        meta.n_test += 1;
        if (accuracy_verdict(record) == AccuracyVerdict::Correct) meta.n_pass += 1;
    }
    return emit(groups, results.provider_id, results.task, MetricKind::Accuracy);
}

std::vector<ScoreSummary> score(const ResultSet& results) {
    std::vector<ScoreSummary> summaries = summarize_accuracy(results);
    std::vector<MetamorphicVerdict> verdicts = pair_verdicts(results);
    if (!verdicts.empty()) {
        std::vector<ScoreSummary> metamorphic =
            summarize(verdicts, results.provider_id, results.task);
        summaries.insert(summaries.end(), metamorphic.begin(), metamorphic.end());
    }
    return summaries;
}

const char* to_string(AccuracyVerdict verdict) {
    switch (verdict) {
        case AccuracyVerdict::Correct: return "correct";
        case AccuracyVerdict::Incorrect: return "incorrect";
        case AccuracyVerdict::Error: return "error";
    }
    return "?";
}

const char* to_string(Outcome outcome) {
    switch (outcome) {
        case Outcome::Pass: return "pass";
        case Outcome::Fail: return "fail";
        case Outcome::Error: return "error";
    }
    return "?";
}

const char* to_string(MetricKind metric) {
    switch (metric) {
        case MetricKind::Accuracy: return "accuracy";
        case MetricKind::Metamorphic: return "metamorphic";
    }
    return "?";
}

MetricKind metric_from_string(std::string_view s) {
    if (s == "accuracy") return MetricKind::Accuracy;
    if (s == "metamorphic") return MetricKind::Metamorphic;
    throw HarnessError(ErrorKind::Schema, "unknown metric '" + std::string(s) + "'");
}

}  // namespace mmt
