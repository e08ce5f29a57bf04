#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "mmt/core.hpp"
#include "mmt/lexicon.hpp"

namespace mmt {

/// A validated collection of perturbed cases for one dataset.
struct PerturbationSuite {
    std::string dataset_id;
    std::vector<PerturbedCase> entries;

    std::map<PerturbationType, int> coverage() const;

    bool operator==(const PerturbationSuite&) const = default;
};

// ---------------------------------------------------------------------------
// Generators. Each is a pure function of its declared inputs: the same text,
// lexicon and seed always produce the same output string. They throw
// (NoEligibleWord / NoApplicableToken / EmptyInput) when their precondition
// does not hold; generate_suite turns those throws into recorded skips.
// ---------------------------------------------------------------------------

/// Transposes one adjacent interior character pair inside one uniformly
/// chosen word of length >= 4 ("tired" -> "tried"). First and last letters
/// never move, and the character multiset of the text is preserved.
std::string perturb_robustness(std::string_view input, std::uint64_t seed);

/// Replaces the first token that has a synonym entry with its first listed
/// synonym ("tired" -> "exhausted").
std::string perturb_taxonomy(std::string_view input, const Lexicon& lexicon);

/// NegatedAntonym swaps a token for its negated antonym ("tired" ->
/// "not energetic"); DirectNegation inserts "not" before the same kind of
/// token, reversing the meaning. Exactly one edit site either way.
std::string perturb_negation(std::string_view input, const Lexicon& lexicon, NegationMode mode);

/// Inserts one intensifier/adverb at a syntactically safe slot: before the
/// final word of a statement, before the terminal punctuation of a question.
std::string perturb_vocab(std::string_view input, const Lexicon& lexicon, std::uint64_t seed);

/// Applies one demographic edit from the lexicon swap table, e.g.
/// "I'm" -> "She is" or "penguin" -> "female penguin".
std::string perturb_fairness(std::string_view input, const Lexicon& lexicon);

/// Replaces the first subject pronoun with a proper name chosen by seed,
/// expanding a contracted copula as needed ("I'm" -> "Jane is").
std::string perturb_ner(std::string_view input, const Lexicon& lexicon, std::uint64_t seed);

/// Prepends a temporal preamble chosen by seed. The first word of the
/// original text is lowercased unless it is "I" or an I-contraction.
std::string perturb_temporal(std::string_view input, const Lexicon& lexicon, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Suite construction and IO
// ---------------------------------------------------------------------------

struct GenerateOptions {
    std::set<PerturbationType> types;
    std::uint64_t seed = 0;
    NegationMode negation_mode = NegationMode::NegatedAntonym;
    int multiplicity = 1;  // perturbed variants per (case, type)
};

struct SkippedPair {
    std::string case_id;
    PerturbationType ptype = PerturbationType::Taxonomy;
    std::string reason;
};

struct GeneratedSuite {
    PerturbationSuite suite;
    std::vector<SkippedPair> skipped;
};

/// Runs the applicable generators over every case. Deterministic in
/// (dataset, types, seed, lexicon): the per-entry seed is derived from the
/// run seed, the case id, the type and the variant index. SRL and
/// Coreference have no generator (curated files only) and are rejected.
GeneratedSuite generate_suite(const std::vector<TestCase>& dataset, const GenerateOptions& options,
                              const Lexicon& lexicon, std::string dataset_id);

/// Loads and validates a suite file against its dataset: every base_id must
/// resolve, every type must be applicable to the base case's task, Identity
/// entries must keep the base gold label, and (base_id, type, text) triples
/// must be unique. QA entries inherit the base context unless they carry
/// their own.
PerturbationSuite load_suite(const std::filesystem::path& path,
                             const std::vector<TestCase>& dataset, std::string dataset_id);

void save_suite(const std::filesystem::path& path, const PerturbationSuite& suite);

/// Seed for one generated entry; exposed so tests can reproduce single
/// entries of a generated suite.
std::uint64_t derive_entry_seed(std::uint64_t run_seed, std::string_view case_id,
                                PerturbationType ptype, int variant);

}  // namespace mmt
