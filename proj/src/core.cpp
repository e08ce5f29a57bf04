#include "mmt/core.hpp"

#include <array>

#include "mmt/text.hpp"

namespace mmt {

namespace {

constexpr std::array<Label, 3> kSentimentLabels = {Label::Positive, Label::Negative,
                                                   Label::Neutral};
constexpr std::array<Label, 2> kQaLabels = {Label::Yes, Label::No};

}  // namespace

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Config: return "config error";
        case ErrorKind::Io: return "io error";
        case ErrorKind::Schema: return "schema error";
        case ErrorKind::NoEligibleWord: return "no eligible word";
        case ErrorKind::NoApplicableToken: return "no applicable token";
        case ErrorKind::EmptyInput: return "empty input";
        case ErrorKind::DanglingBaseId: return "dangling base id";
        case ErrorKind::ApplicabilityViolation: return "applicability violation";
        case ErrorKind::CuratedOnlyType: return "curated-only type";
        case ErrorKind::ShotCountMismatch: return "shot count mismatch";
        case ErrorKind::ContextMissing: return "context missing";
        case ErrorKind::Network: return "network error";
        case ErrorKind::Auth: return "auth error";
        case ErrorKind::RateLimited: return "rate limited";
        case ErrorKind::ReplayMiss: return "replay miss";
        case ErrorKind::MalformedResponse: return "malformed response";
        case ErrorKind::Storage: return "storage error";
        case ErrorKind::PairMismatch: return "pair mismatch";
        case ErrorKind::EmptyGroup: return "empty group";
    }
    return "unknown error";
}

std::span<const Label> admissible_labels(TaskKind task) {
    if (task == TaskKind::SentimentAnalysis) return kSentimentLabels;
    return kQaLabels;
}

bool is_admissible(Label label, TaskKind task) {
    for (Label candidate : admissible_labels(task)) {
        if (candidate == label) return true;
    }
    return false;
}

bool is_applicable(PerturbationType ptype, TaskKind task) {
    switch (ptype) {
        case PerturbationType::Temporal:
        case PerturbationType::Ner:
            return task == TaskKind::SentimentAnalysis;
        case PerturbationType::Srl:
        case PerturbationType::Coreference:
            return task == TaskKind::QuestionAnswering;
        default:
            return true;
    }
}

Label flip_label(Label label) {
    switch (label) {
        case Label::Positive: return Label::Negative;
        case Label::Negative: return Label::Positive;
        case Label::Neutral: return Label::Neutral;
        case Label::Yes: return Label::No;
        case Label::No: return Label::Yes;
    }
    return label;
}

MetamorphicRelation relation_for(PerturbationType ptype, NegationMode mode) {
    if (ptype == PerturbationType::Negation && mode == NegationMode::DirectNegation) {
        return MetamorphicRelation::Flip;
    }
    return MetamorphicRelation::Identity;
}

bool relation_holds(MetamorphicRelation relation, Label original, Label perturbed) {
    if (relation == MetamorphicRelation::Identity) return original == perturbed;
    return perturbed == flip_label(original);
}

ParsedLabel parse_label(std::string_view raw, TaskKind task) {
    std::optional<Label> found;
    for (const text::Token& token : text::letter_runs(raw)) {
        std::string_view word = token.view(raw);
        for (Label candidate : admissible_labels(task)) {
            if (!text::iequals(word, to_string(candidate))) continue;
            if (!found) {
                found = candidate;
            } else if (*found != candidate) {
                return {std::nullopt, ParseError::AmbiguousLabel};
            }
        }
    }
    if (!found) return {std::nullopt, ParseError::NoLabelFound};
    return {found, std::nullopt};
}

void validate_test_case(const TestCase& test_case) {
    if (test_case.id.empty()) {
        throw HarnessError(ErrorKind::Schema, "test case with empty id");
    }
    if (test_case.input_text.empty()) {
        throw HarnessError(ErrorKind::Schema, "test case '" + test_case.id + "' has empty text");
    }
    if (!is_admissible(test_case.expected, test_case.task)) {
        throw HarnessError(ErrorKind::Schema, "label '" + std::string(to_string(test_case.expected)) +
                                                  "' is not admissible for task '" +
                                                  to_string(test_case.task) + "' (case '" +
                                                  test_case.id + "')");
    }
    if (test_case.task == TaskKind::SentimentAnalysis && test_case.context.has_value()) {
        throw HarnessError(ErrorKind::Schema,
                           "sentiment case '" + test_case.id + "' must not carry a context");
    }
}

const char* to_string(TaskKind task) {
    return task == TaskKind::SentimentAnalysis ? "sentiment" : "qa";
}

const char* to_string(Label label) {
    switch (label) {
        case Label::Positive: return "positive";
        case Label::Negative: return "negative";
        case Label::Neutral: return "neutral";
        case Label::Yes: return "yes";
        case Label::No: return "no";
    }
    return "?";
}

const char* display_label(Label label) {
    switch (label) {
        case Label::Positive: return "Positive";
        case Label::Negative: return "Negative";
        case Label::Neutral: return "Neutral";
        case Label::Yes: return "Yes";
        case Label::No: return "No";
    }
    return "?";
}

const char* to_string(PerturbationType ptype) {
    switch (ptype) {
        case PerturbationType::Taxonomy: return "taxonomy";
        case PerturbationType::Ner: return "ner";
        case PerturbationType::Negation: return "negation";
        case PerturbationType::Vocab: return "vocab";
        case PerturbationType::Fairness: return "fairness";
        case PerturbationType::Robustness: return "robustness";
        case PerturbationType::Temporal: return "temporal";
        case PerturbationType::Srl: return "srl";
        case PerturbationType::Coreference: return "coreference";
    }
    return "?";
}

const char* to_string(MetamorphicRelation relation) {
    return relation == MetamorphicRelation::Identity ? "identity" : "flip";
}

const char* to_string(NegationMode mode) {
    return mode == NegationMode::NegatedAntonym ? "negated_antonym" : "direct_negation";
}

const char* to_string(Provenance provenance) {
    return provenance == Provenance::Curated ? "curated" : "generated";
}

namespace {

[[noreturn]] void bad_name(const char* what, std::string_view s) {
    throw HarnessError(ErrorKind::Schema,
                       "unknown " + std::string(what) + " '" + std::string(s) + "'");
}

}  // namespace

TaskKind task_from_string(std::string_view s) {
    if (s == "sentiment") return TaskKind::SentimentAnalysis;
    if (s == "qa") return TaskKind::QuestionAnswering;
    bad_name("task", s);
}

Label label_from_string(std::string_view s) {
    for (Label label : {Label::Positive, Label::Negative, Label::Neutral, Label::Yes, Label::No}) {
        if (s == to_string(label)) return label;
    }
    bad_name("label", s);
}

PerturbationType ptype_from_string(std::string_view s) {
    for (PerturbationType ptype : kAllPerturbationTypes) {
        if (s == to_string(ptype)) return ptype;
    }
    bad_name("perturbation type", s);
}

MetamorphicRelation relation_from_string(std::string_view s) {
    if (s == "identity") return MetamorphicRelation::Identity;
    if (s == "flip") return MetamorphicRelation::Flip;
    bad_name("relation", s);
}

NegationMode negation_mode_from_string(std::string_view s) {
    if (s == "negated_antonym") return NegationMode::NegatedAntonym;
    if (s == "direct_negation") return NegationMode::DirectNegation;
    bad_name("negation mode", s);
}

Provenance provenance_from_string(std::string_view s) {
    if (s == "curated") return Provenance::Curated;
    if (s == "generated") return Provenance::Generated;
    bad_name("provenance", s);
}

}  // namespace mmt
