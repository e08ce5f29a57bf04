#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mmt {

/// Word-level assets behind the rule-based perturbation generators. Keys are
/// stored lowercase; lookups are case-insensitive and substitutions preserve
/// the casing of the original token.
///
/// On disk a lexicon is a directory of plain-text files: mapping files use one
/// `lhs<TAB>rhs[,rhs...]` entry per line, list files one entry per line,
/// `#` starts a comment.
///
///   synonyms.lex      tired<TAB>exhausted,weary
///   negations.lex     tired<TAB>not energetic
///   demographic.lex   penguin<TAB>female penguin
///   intensifiers.lex  really
///   temporal.lex      Not sure how it was like before but now
///   names.lex         Jane
struct Lexicon {
    std::map<std::string, std::vector<std::string>> synonym_pairs;
    std::map<std::string, std::string> antonym_negations;
    std::vector<std::string> intensifiers;
    std::vector<std::string> temporal_preambles;
    std::vector<std::string> proper_names;
    std::map<std::string, std::string> demographic_swaps;

    static Lexicon load_dir(const std::filesystem::path& dir);

    const std::vector<std::string>* find_synonyms(std::string_view token) const;
    const std::string* find_negated_antonym(std::string_view token) const;
    const std::string* find_demographic_swap(std::string_view token) const;
};

}  // namespace mmt
