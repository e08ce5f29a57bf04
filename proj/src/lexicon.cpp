#include "mmt/lexicon.hpp"

#include <fstream>
#include <functional>

#include "mmt/error.hpp"
#include "mmt/text.hpp"

namespace mmt {

namespace {

std::string trim(std::string_view s) {
    std::size_t begin = s.find_first_not_of(" \t\r");
    if (begin == std::string_view::npos) return {};
    std::size_t end = s.find_last_not_of(" \t\r");
    return std::string(s.substr(begin, end - begin + 1));
}

void for_each_line(const std::filesystem::path& path, bool required,
                   const std::function<void(const std::string&, int)>& handle) {
    std::ifstream in(path);
    if (!in) {
        if (required) throw HarnessError(ErrorKind::Io, "cannot open '" + path.string() + "'");
        return;
    }
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        std::string trimmed = trim(line);
        if (trimmed.empty() || trimmed.front() == '#') continue;
        handle(trimmed, line_number);
    }
}

std::vector<std::string> split_values(const std::string& rhs, const std::string& where) {
    std::vector<std::string> values;
    std::size_t pos = 0;
    while (pos <= rhs.size()) {
        std::size_t comma = rhs.find(',', pos);
        std::string value = trim(rhs.substr(pos, comma - pos));
        if (value.empty()) {
            throw HarnessError(ErrorKind::Schema, where + ": empty mapping value");
        }
        values.push_back(std::move(value));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return values;
}

void load_map(const std::filesystem::path& path,
              std::map<std::string, std::vector<std::string>>& out) {
    for_each_line(path, /*required=*/true, [&](const std::string& line, int line_number) {
        std::string where = path.string() + ":" + std::to_string(line_number);
        std::size_t tab = line.find('\t');
        if (tab == std::string::npos) {
            throw HarnessError(ErrorKind::Schema, where + ": expected lhs<TAB>rhs");
        }
        std::string key = text::lower(trim(line.substr(0, tab)));
        if (key.empty()) throw HarnessError(ErrorKind::Schema, where + ": empty lhs");
        out[key] = split_values(line.substr(tab + 1), where);
    });
}

void load_single_map(const std::filesystem::path& path, std::map<std::string, std::string>& out) {
    std::map<std::string, std::vector<std::string>> multi;
    load_map(path, multi);
    for (auto& [key, values] : multi) out[key] = values.front();
}

void load_list(const std::filesystem::path& path, std::vector<std::string>& out) {
    for_each_line(path, /*required=*/true,
                  [&](const std::string& line, int) { out.push_back(line); });
}

}  // namespace

Lexicon Lexicon::load_dir(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw HarnessError(ErrorKind::Io, "lexicon directory '" + dir.string() + "' not found");
    }
    Lexicon lexicon;
    load_map(dir / "synonyms.lex", lexicon.synonym_pairs);
    load_single_map(dir / "negations.lex", lexicon.antonym_negations);
    load_single_map(dir / "demographic.lex", lexicon.demographic_swaps);
    load_list(dir / "intensifiers.lex", lexicon.intensifiers);
    load_list(dir / "temporal.lex", lexicon.temporal_preambles);
    load_list(dir / "names.lex", lexicon.proper_names);
    return lexicon;
}

const std::vector<std::string>* Lexicon::find_synonyms(std::string_view token) const {
    auto it = synonym_pairs.find(text::lower(token));
    return it == synonym_pairs.end() ? nullptr : &it->second;
}

const std::string* Lexicon::find_negated_antonym(std::string_view token) const {
    auto it = antonym_negations.find(text::lower(token));
    return it == antonym_negations.end() ? nullptr : &it->second;
}

const std::string* Lexicon::find_demographic_swap(std::string_view token) const {
    auto it = demographic_swaps.find(text::lower(token));
    return it == demographic_swaps.end() ? nullptr : &it->second;
}

}  // namespace mmt
