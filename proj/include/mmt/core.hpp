#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mmt/error.hpp"

namespace mmt {

enum class TaskKind {
    SentimentAnalysis,
    QuestionAnswering,
};

enum class Label {
    Positive,
    Negative,
    Neutral,
    Yes,
    No,
};

enum class PerturbationType {
    Taxonomy,
    Ner,
    Negation,
    Vocab,
    Fairness,
    Robustness,
    Temporal,
    Srl,
    Coreference,
};

/// Output relation that must hold between the responses to an original
/// input and its perturbed variant.
enum class MetamorphicRelation {
    Identity,
    Flip,
};

/// How negation perturbations are built. NegatedAntonym swaps a word for its
/// negated antonym ("tired" -> "not energetic"), which preserves meaning, so
/// the relation stays Identity. DirectNegation inserts a negation cue in
/// front of the predicate, which reverses meaning, so the relation is Flip.
enum class NegationMode {
    NegatedAntonym,
    DirectNegation,
};

enum class Provenance {
    Curated,
    Generated,
};

/// One labeled task input.
struct TestCase {
    std::string id;
    TaskKind task = TaskKind::SentimentAnalysis;
    std::string input_text;
    std::optional<std::string> context;  // QA only
    Label expected = Label::Neutral;
};

/// A transformed input bound to its base case and the relation that must
/// hold between the two responses.
struct PerturbedCase {
    std::string base_id;
    PerturbationType ptype = PerturbationType::Taxonomy;
    std::string text;
    std::optional<std::string> context;
    MetamorphicRelation relation = MetamorphicRelation::Identity;
    Label expected = Label::Neutral;  // gold label for the perturbed text
    Provenance provenance = Provenance::Curated;
    std::optional<std::uint64_t> seed;  // present for generated cases

    bool operator==(const PerturbedCase&) const = default;
};

/// Raw provider text plus the parsed task label and provenance metadata.
struct ModelResponse {
    std::string raw_text;
    std::optional<Label> parsed;
    std::string provider_id;
    std::string request_digest;
    std::uint64_t latency_ms = 0;
};

std::span<const Label> admissible_labels(TaskKind task);
bool is_admissible(Label label, TaskKind task);

/// Table of which perturbation types apply to which task: Temporal and NER
/// are sentiment-only, SRL and Coreference are QA-only, the rest apply to both.
bool is_applicable(PerturbationType ptype, TaskKind task);

/// Label inversion: Yes<->No, Positive<->Negative. Neutral maps to itself,
/// which makes flip_label an involution over the whole label set.
Label flip_label(Label label);

MetamorphicRelation relation_for(PerturbationType ptype, NegationMode mode);

bool relation_holds(MetamorphicRelation relation, Label original, Label perturbed);

enum class ParseError {
    NoLabelFound,
    AmbiguousLabel,
};

struct ParsedLabel {
    std::optional<Label> value;
    std::optional<ParseError> error;

    bool ok() const { return value.has_value(); }
};

/// Extracts the task label from a raw model response by a case-insensitive
/// whole-word scan. Exactly one distinct admissible label word must occur;
/// none yields NoLabelFound, two or more distinct ones AmbiguousLabel.
/// Whole-word matching means "cannot" never matches "no".
ParsedLabel parse_label(std::string_view raw, TaskKind task);

/// Throws ErrorKind::Schema if a case violates its invariants (empty text,
/// inadmissible label, context on a sentiment case).
void validate_test_case(const TestCase& test_case);

// Stable names used in every file format and report.
const char* to_string(TaskKind task);
const char* to_string(Label label);
const char* to_string(PerturbationType ptype);
const char* to_string(MetamorphicRelation relation);
const char* to_string(NegationMode mode);
const char* to_string(Provenance provenance);

/// Label as it appears in prompts and shot answers: "Positive", "Yes", ...
const char* display_label(Label label);

TaskKind task_from_string(std::string_view s);
Label label_from_string(std::string_view s);
PerturbationType ptype_from_string(std::string_view s);
MetamorphicRelation relation_from_string(std::string_view s);
NegationMode negation_mode_from_string(std::string_view s);
Provenance provenance_from_string(std::string_view s);

inline constexpr PerturbationType kAllPerturbationTypes[] = {
    PerturbationType::Taxonomy,  PerturbationType::Ner,      PerturbationType::Negation,
    PerturbationType::Vocab,     PerturbationType::Fairness, PerturbationType::Robustness,
    PerturbationType::Temporal,  PerturbationType::Srl,      PerturbationType::Coreference,
};

}  // namespace mmt
