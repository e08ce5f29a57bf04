#include "mmt/perturb.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <tuple>

#include "jsonl.hpp"
#include "mmt/text.hpp"
#include "rng.hpp"

namespace mmt {

namespace {

bool is_question(std::string_view input) {
    std::size_t end = input.find_last_not_of(" \t\r\n");
    return end != std::string_view::npos && input[end] == '?';
}

std::string replace_span(std::string_view input, std::size_t begin, std::size_t end,
                         std::string_view replacement) {
    std::string out;
    out.reserve(input.size() + replacement.size());
    out.append(input.substr(0, begin));
    out.append(replacement);
    out.append(input.substr(end));
    return out;
}

const char* kSubjectPronouns[] = {"i", "you", "he", "she", "we", "they"};
const char* kCopulas[] = {"am", "are", "is"};

bool is_subject_pronoun(std::string_view lowered) {
    return std::find(std::begin(kSubjectPronouns), std::end(kSubjectPronouns), lowered) !=
           std::end(kSubjectPronouns);
}

bool is_copula(std::string_view lowered) {
    return std::find(std::begin(kCopulas), std::end(kCopulas), lowered) != std::end(kCopulas);
}

// Contracted subject pronoun -> verb that follows the substituted name.
const std::map<std::string, std::string>& pronoun_contractions() {
    static const std::map<std::string, std::string> table = {
        {"i'm", "is"},    {"i've", "has"},   {"i'll", "will"},  {"i'd", "would"},
        {"you're", "is"}, {"we're", "is"},   {"they're", "is"}, {"he's", "is"},
        {"she's", "is"},
    };
    return table;
}

}  // namespace

std::map<PerturbationType, int> PerturbationSuite::coverage() const {
    std::map<PerturbationType, int> counts;
    for (const PerturbedCase& entry : entries) ++counts[entry.ptype];
    return counts;
}

std::string perturb_robustness(std::string_view input, std::uint64_t seed) {
    // A word is eligible when it is long enough for an interior swap and at
    // least one interior adjacent pair has distinct characters; swapping an
    // equal pair ("co[mm]on") would leave the text unchanged, and the output
    // must always differ from the input.
    struct Candidate {
        text::Token word;
        std::vector<std::size_t> offsets;
    };
    std::vector<Candidate> eligible;
    for (const text::Token& token : text::letter_runs(input)) {
        if (token.size() < 4) continue;
        Candidate candidate{token, {}};
        // Swap positions are interior: the first and last letter of the word
        // stay, so offsets run 1 .. size-3.
        for (std::size_t offset = 1; offset + 3 <= token.size(); ++offset) {
            if (input[token.begin + offset] != input[token.begin + offset + 1]) {
                candidate.offsets.push_back(offset);
            }
        }
        if (!candidate.offsets.empty()) eligible.push_back(std::move(candidate));
    }
    if (eligible.empty()) {
        throw HarnessError(ErrorKind::NoEligibleWord,
                           "no alphabetic word of length >= 4 admits a visible swap");
    }
    SplitMix64 rng(seed);
    const Candidate& pick = eligible[rng.below(eligible.size())];
    const std::size_t offset = pick.offsets[rng.below(pick.offsets.size())];
    std::string out(input);
    std::swap(out[pick.word.begin + offset], out[pick.word.begin + offset + 1]);
    return out;
}

std::string perturb_taxonomy(std::string_view input, const Lexicon& lexicon) {
    for (const text::Token& token : text::word_tokens(input)) {
        if (const auto* synonyms = lexicon.find_synonyms(token.view(input))) {
            return replace_span(input, token.begin, token.end,
                                text::match_case(token.view(input), synonyms->front()));
        }
    }
    throw HarnessError(ErrorKind::NoApplicableToken, "no token with a synonym entry");
}

std::string perturb_negation(std::string_view input, const Lexicon& lexicon, NegationMode mode) {
    for (const text::Token& token : text::word_tokens(input)) {
        const std::string* negated = lexicon.find_negated_antonym(token.view(input));
        if (!negated) continue;
        if (mode == NegationMode::NegatedAntonym) {
            return replace_span(input, token.begin, token.end,
                                text::match_case(token.view(input), *negated));
        }
        // DirectNegation: put "not" in front of the predicate itself.
        std::string_view word = token.view(input);
        if (std::isupper(static_cast<unsigned char>(word[0]))) {
            std::string lowered(word);
            lowered[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(lowered[0])));
            return replace_span(input, token.begin, token.end, "Not " + lowered);
        }
        return replace_span(input, token.begin, token.end, "not " + std::string(word));
    }
    throw HarnessError(ErrorKind::NoApplicableToken, "no token with a negated-antonym entry");
}

std::string perturb_vocab(std::string_view input, const Lexicon& lexicon, std::uint64_t seed) {
    if (input.find_first_not_of(" \t\r\n") == std::string_view::npos) {
        throw HarnessError(ErrorKind::EmptyInput, "vocab perturbation needs a sentence");
    }
    if (lexicon.intensifiers.empty()) {
        throw HarnessError(ErrorKind::Config, "lexicon has no intensifiers");
    }
    SplitMix64 rng(seed);
    const std::string& word = lexicon.intensifiers[rng.below(lexicon.intensifiers.size())];

    if (is_question(input)) {
        // Before the terminal punctuation run: "...in Miami?" -> "...in Miami quickly?"
        std::size_t end = input.find_last_not_of(" \t\r\n") + 1;
        std::size_t punct = end;
        while (punct > 0 && (input[punct - 1] == '?' || input[punct - 1] == '!' ||
                             input[punct - 1] == '.')) {
            --punct;
        }
        return replace_span(input, punct, punct, " " + word);
    }
    auto tokens = text::word_tokens(input);
    if (tokens.empty()) {
        throw HarnessError(ErrorKind::NoApplicableToken, "no word to attach an intensifier to");
    }
    const text::Token& last = tokens.back();
    return replace_span(input, last.begin, last.begin, word + " ");
}

std::string perturb_fairness(std::string_view input, const Lexicon& lexicon) {
    for (const text::Token& token : text::word_tokens(input)) {
        if (const std::string* swap = lexicon.find_demographic_swap(token.view(input))) {
            return replace_span(input, token.begin, token.end,
                                text::match_case(token.view(input), *swap));
        }
    }
    throw HarnessError(ErrorKind::NoApplicableToken, "no demographic swap site");
}

std::string perturb_ner(std::string_view input, const Lexicon& lexicon, std::uint64_t seed) {
    if (lexicon.proper_names.empty()) {
        throw HarnessError(ErrorKind::Config, "lexicon has no proper names");
    }
    SplitMix64 rng(seed);
    const std::string& name = lexicon.proper_names[rng.below(lexicon.proper_names.size())];

    auto tokens = text::word_tokens(input);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        std::string lowered = text::lower(tokens[i].view(input));
        auto contraction = pronoun_contractions().find(lowered);
        if (contraction != pronoun_contractions().end()) {
            return replace_span(input, tokens[i].begin, tokens[i].end,
                                name + " " + contraction->second);
        }
        if (is_subject_pronoun(lowered)) {
            // "I am" / "they are" collapse to "<name> is"; bare pronouns swap in place.
            if (i + 1 < tokens.size() && is_copula(text::lower(tokens[i + 1].view(input)))) {
                return replace_span(input, tokens[i].begin, tokens[i + 1].end, name + " is");
            }
            return replace_span(input, tokens[i].begin, tokens[i].end, name);
        }
    }
    throw HarnessError(ErrorKind::NoApplicableToken, "no subject pronoun");
}

std::string perturb_temporal(std::string_view input, const Lexicon& lexicon, std::uint64_t seed) {
    if (lexicon.temporal_preambles.empty()) {
        throw HarnessError(ErrorKind::Config, "lexicon has no temporal preambles");
    }
    SplitMix64 rng(seed);
    std::string preamble = lexicon.temporal_preambles[rng.below(lexicon.temporal_preambles.size())];
    if (input.empty()) return preamble;

    std::string tail(input);
    auto tokens = text::word_tokens(tail);
    if (!tokens.empty() && tokens.front().begin == 0) {
        std::string first = text::lower(tokens.front().view(tail));
        // "I" keeps its capital; everything else continues in lowercase.
        if (first != "i" && first.rfind("i'", 0) != 0) {
            tail[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(tail[0])));
        }
    }
    return preamble + " " + tail;
}

std::uint64_t derive_entry_seed(std::uint64_t run_seed, std::string_view case_id,
                                PerturbationType ptype, int variant) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (int shift = 0; shift < 64; shift += 8) {
        hash = fnv1a(std::string(1, static_cast<char>((run_seed >> shift) & 0xff)), hash);
    }
    hash = fnv1a(case_id, hash);
    hash = fnv1a("\x1f", hash);
    hash = fnv1a(to_string(ptype), hash);
    hash = fnv1a("\x1f", hash);
    hash = fnv1a(std::to_string(variant), hash);
    return hash;
}

namespace {

std::string run_generator(PerturbationType ptype, const TestCase& test_case,
                          const Lexicon& lexicon, std::uint64_t entry_seed, NegationMode mode) {
    switch (ptype) {
        case PerturbationType::Robustness:
            return perturb_robustness(test_case.input_text, entry_seed);
        case PerturbationType::Taxonomy:
            return perturb_taxonomy(test_case.input_text, lexicon);
        case PerturbationType::Negation:
            return perturb_negation(test_case.input_text, lexicon, mode);
        case PerturbationType::Vocab:
            return perturb_vocab(test_case.input_text, lexicon, entry_seed);
        case PerturbationType::Fairness:
            return perturb_fairness(test_case.input_text, lexicon);
        case PerturbationType::Ner:
            return perturb_ner(test_case.input_text, lexicon, entry_seed);
        case PerturbationType::Temporal:
            return perturb_temporal(test_case.input_text, lexicon, entry_seed);
        default:
            throw HarnessError(ErrorKind::CuratedOnlyType,
                               std::string(to_string(ptype)) + " entries must come from a curated suite");
    }
}

bool is_precondition_miss(ErrorKind kind) {
    return kind == ErrorKind::NoEligibleWord || kind == ErrorKind::NoApplicableToken ||
           kind == ErrorKind::EmptyInput;
}

}  // namespace

GeneratedSuite generate_suite(const std::vector<TestCase>& dataset, const GenerateOptions& options,
                              const Lexicon& lexicon, std::string dataset_id) {
    for (PerturbationType ptype : options.types) {
        if (ptype == PerturbationType::Srl || ptype == PerturbationType::Coreference) {
            throw HarnessError(ErrorKind::CuratedOnlyType,
                               std::string(to_string(ptype)) +
                                   " has no generator; provide a curated suite file");
        }
    }
    if (options.multiplicity < 1) {
        throw HarnessError(ErrorKind::Config, "multiplicity must be >= 1");
    }

    GeneratedSuite result;
    result.suite.dataset_id = std::move(dataset_id);
    std::set<std::tuple<std::string, PerturbationType, std::string>> seen;

    for (const TestCase& test_case : dataset) {
        for (PerturbationType ptype : kAllPerturbationTypes) {
            if (!options.types.contains(ptype)) continue;
            if (!is_applicable(ptype, test_case.task)) {
                result.skipped.push_back({test_case.id, ptype,
                                          std::string("not applicable to task '") +
                                              to_string(test_case.task) + "'"});
                continue;
            }
            for (int variant = 0; variant < options.multiplicity; ++variant) {
                std::uint64_t entry_seed =
                    derive_entry_seed(options.seed, test_case.id, ptype, variant);
                std::string text;
                try {
                    text = run_generator(ptype, test_case, lexicon, entry_seed,
                                         options.negation_mode);
                } catch (const HarnessError& e) {
                    if (is_precondition_miss(e.kind())) {
                        result.skipped.push_back({test_case.id, ptype, e.what()});
                        break;  // the same precondition misses for every variant
                    }
                    throw;
                }
                if (!seen.insert({test_case.id, ptype, text}).second) continue;

                PerturbedCase entry;
                entry.base_id = test_case.id;
                entry.ptype = ptype;
                entry.text = std::move(text);
                entry.context = test_case.context;
                entry.relation = relation_for(ptype, options.negation_mode);
                entry.expected = entry.relation == MetamorphicRelation::Identity
                                     ? test_case.expected
                                     : flip_label(test_case.expected);
                entry.provenance = Provenance::Generated;
                entry.seed = entry_seed;
                result.suite.entries.push_back(std::move(entry));
            }
        }
    }
    return result;
}

PerturbationSuite load_suite(const std::filesystem::path& path,
                             const std::vector<TestCase>& dataset, std::string dataset_id) {
    std::map<std::string, const TestCase*> by_id;
    for (const TestCase& test_case : dataset) by_id[test_case.id] = &test_case;

    PerturbationSuite suite;
    suite.dataset_id = std::move(dataset_id);
    std::set<std::tuple<std::string, PerturbationType, std::string>> seen;

    jsonl::for_each_record(path, [&](const jsonl::Json& record, int line) {
        std::string where = path.string() + ":" + std::to_string(line);
        PerturbedCase entry;
        entry.base_id = jsonl::require_string(record, "base_id", where);
        entry.ptype = ptype_from_string(jsonl::require_string(record, "type", where));
        entry.text = jsonl::require_string(record, "text", where);
        if (record.contains("context") && !record["context"].is_null()) {
            entry.context = jsonl::require_string(record, "context", where);
        }
        entry.relation = relation_from_string(jsonl::require_string(record, "relation", where));
        entry.expected = label_from_string(jsonl::require_string(record, "expected", where));
        entry.provenance =
            provenance_from_string(jsonl::require_string(record, "provenance", where));
        if (record.contains("seed") && !record["seed"].is_null()) {
            if (!record["seed"].is_number_unsigned()) {
                throw HarnessError(ErrorKind::Schema, where + ": seed must be an unsigned integer");
            }
            entry.seed = record["seed"].get<std::uint64_t>();
        }

        auto base_it = by_id.find(entry.base_id);
        if (base_it == by_id.end()) {
            throw HarnessError(ErrorKind::DanglingBaseId,
                               where + ": base_id '" + entry.base_id + "' not in dataset");
        }
        const TestCase& base = *base_it->second;
        if (!is_applicable(entry.ptype, base.task)) {
            throw HarnessError(ErrorKind::ApplicabilityViolation,
                               where + ": '" + to_string(entry.ptype) +
                                   "' does not apply to task '" + to_string(base.task) + "'");
        }
        if (!is_admissible(entry.expected, base.task)) {
            throw HarnessError(ErrorKind::Schema,
                               where + ": expected label not admissible for the base task");
        }
        if (entry.relation == MetamorphicRelation::Identity && entry.expected != base.expected) {
            throw HarnessError(ErrorKind::Schema,
                               where + ": identity entry must keep the base gold label");
        }
        if (base.task == TaskKind::SentimentAnalysis && entry.context.has_value()) {
            throw HarnessError(ErrorKind::Schema, where + ": sentiment entry carries a context");
        }
        if (!entry.context && base.context) entry.context = base.context;
        if (!seen.insert({entry.base_id, entry.ptype, entry.text}).second) {
            throw HarnessError(ErrorKind::Schema,
                               where + ": duplicate (base_id, type, text) entry");
        }
        suite.entries.push_back(std::move(entry));
    });
    return suite;
}

void save_suite(const std::filesystem::path& path, const PerturbationSuite& suite) {
    auto out = jsonl::open_for_write(path);
    for (const PerturbedCase& entry : suite.entries) {
        jsonl::Json record;
        record["base_id"] = entry.base_id;
        record["type"] = to_string(entry.ptype);
        record["text"] = entry.text;
        if (entry.context) record["context"] = *entry.context;
        record["relation"] = to_string(entry.relation);
        record["expected"] = to_string(entry.expected);
        record["provenance"] = to_string(entry.provenance);
        if (entry.seed) record["seed"] = *entry.seed;
        out << record.dump() << "\n";
    }
}

}  // namespace mmt
