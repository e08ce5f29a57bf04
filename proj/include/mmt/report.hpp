#pragma once

#include <set>
#include <string>
#include <vector>

#include "mmt/scoring.hpp"

namespace mmt {

enum class ReportFormat { MarkdownTable, Csv, Structured };

struct ReportSpec {
    std::set<ReportFormat> formats = {ReportFormat::MarkdownTable, ReportFormat::Csv,
                                      ReportFormat::Structured};
    bool include_failures = true;
    int percent_precision = 0;  // digits after the decimal point in percents
};

/// The rendered documents; a member is empty iff its format was not
/// selected.
struct RenderedReport {
    std::string markdown;
    std::string csv;
    std::string json;
};

/// Renders summaries into the selected formats. The markdown document holds
/// one section per (task, context mode) and one table per prompt style; rows
/// are categories ("Original" first, then the perturbation types in
/// canonical order) and columns are model x metric x {#Correct, Pass Rate},
/// with the Accuracy block ahead of the Metamorphic block. Percentages are
/// rounded half-up at percent_precision. Throws EmptyInput for an empty
/// summary list and Config when no format is selected.
RenderedReport render_tables(const std::vector<ScoreSummary>& summaries, const ReportSpec& spec);

/// Inverse of the structured format: parses the JSON document back into
/// summaries equal to the ones that produced it.
std::vector<ScoreSummary> parse_summaries_json(const std::string& json_text);

/// Markdown drill-down listing every Fail/Error verdict with both input
/// texts, both raw responses, both parsed labels and the violated relation,
/// sorted by (ptype, case_id). Pulls texts and raw responses from the
/// result set the verdicts were computed from.
std::string render_failures(const std::vector<MetamorphicVerdict>& verdicts,
                            const ResultSet& results);

/// "84%" for 42/50 at precision 0; "83.3%" for 5/6 at precision 1.
/// Half-up rounding in exact integer arithmetic.
std::string format_percent(Ratio rate, int precision);

/// Row label used in tables and the CSV category column: "Original" /
/// "Taxonomy" / "NER" / ...; the CSV uses the lowercase wire names.
std::string display_category(const std::optional<PerturbationType>& ptype);

bool operator==(const ScoreSummary& a, const ScoreSummary& b);

const char* to_string(ReportFormat format);
ReportFormat report_format_from_string(std::string_view s);

}  // namespace mmt
