#include "mmt/report.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <tuple>

#include <fmt/format.h>

#include "jsonl.hpp"

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

int task_rank(TaskKind task) { return task == TaskKind::SentimentAnalysis ? 0 : 1; }
int mode_rank(ContextMode mode) { return mode == ContextMode::WithContext ? 1 : 0; }
int metric_rank(MetricKind metric) { return metric == MetricKind::Accuracy ? 0 : 1; }

std::string task_title(TaskKind task) {
    return task == TaskKind::SentimentAnalysis ? "Sentiment Analysis" : "Question Answering";
}

std::string mode_title(ContextMode mode) {
    return mode == ContextMode::WithContext ? "with context" : "no context";
}

std::string style_title(PromptStyle style) {
    switch (style.kind) {
        case PromptStyle::Kind::ZeroShot: return "Zero-shot";
        case PromptStyle::Kind::OneShot: return "One-shot";
        case PromptStyle::Kind::FewShot:
            return fmt::format("Few-shot (k={})", style.few_shot_k);
    }
    return "?";
}

std::string category_wire_name(const std::optional<PerturbationType>& ptype) {
    return ptype ? to_string(*ptype) : "original";
}

std::string shortest_double(double value) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, end);
}

// Quoted single-line rendering for arbitrary text (raw responses may hold
// newlines); JSON string escaping keeps the document one-line-per-field.
std::string quoted(const std::string& text) { return jsonl::Json(text).dump(); }

std::vector<const ScoreSummary*> canonical_order(const std::vector<ScoreSummary>& summaries) {
    std::vector<const ScoreSummary*> ordered;
    ordered.reserve(summaries.size());
    for (const ScoreSummary& summary : summaries) ordered.push_back(&summary);
    std::sort(ordered.begin(), ordered.end(), [](const ScoreSummary* a, const ScoreSummary* b) {
        return std::tuple(a->provider_id, task_rank(a->task), mode_rank(a->context_mode),
                          style_rank(a->style), a->style.few_shot_k, metric_rank(a->metric),
                          ptype_rank(a->ptype)) <
               std::tuple(b->provider_id, task_rank(b->task), mode_rank(b->context_mode),
                          style_rank(b->style), b->style.few_shot_k, metric_rank(b->metric),
                          ptype_rank(b->ptype));
    });
    return ordered;
}

std::string render_markdown(const std::vector<ScoreSummary>& summaries, const ReportSpec& spec) {
    // model list, sorted for stable column order
    std::set<std::string> model_set;
    for (const ScoreSummary& summary : summaries) model_set.insert(summary.provider_id);
    const std::vector<std::string> models(model_set.begin(), model_set.end());

    // (task, mode) -> (style) -> (category) -> (model, metric) -> summary
    using TaskModeKey = std::pair<int, int>;
    using StyleKey = std::pair<int, int>;
    using CellKey = std::pair<std::string, int>;
    struct CategoryRow {
        std::optional<PerturbationType> ptype;
        std::map<CellKey, const ScoreSummary*> cells;
    };
    struct StyleBlock {
        PromptStyle style;
        std::map<int, CategoryRow> rows;
    };
    struct TaskModeSection {
        TaskKind task = TaskKind::SentimentAnalysis;
        ContextMode mode = ContextMode::NoContext;
        std::map<StyleKey, StyleBlock> blocks;
    };
    std::map<TaskModeKey, TaskModeSection> sections;

    for (const ScoreSummary& summary : summaries) {
        TaskModeSection& section =
            sections[{task_rank(summary.task), mode_rank(summary.context_mode)}];
        section.task = summary.task;
        section.mode = summary.context_mode;
        StyleBlock& block =
            section.blocks[{style_rank(summary.style), summary.style.few_shot_k}];
        block.style = summary.style;
        CategoryRow& row = block.rows[ptype_rank(summary.ptype)];
        row.ptype = summary.ptype;
        row.cells[{summary.provider_id, metric_rank(summary.metric)}] = &summary;
    }

    std::string doc = "# Results\n";
    for (const auto& [section_key, section] : sections) {
        doc += fmt::format("\n## {} ({})\n", task_title(section.task), mode_title(section.mode));
        for (const auto& [style_key, block] : section.blocks) {
            doc += fmt::format("\n### {}\n\n", style_title(block.style));
            doc += "| Category |";
            std::string separator = "| --- |";
            for (const std::string& model : models) {
                for (const char* metric : {"Accuracy", "Metamorphic"}) {
                    doc += fmt::format(" {} {} #Correct | {} {} Pass Rate |", model, metric,
                                       model, metric);
                    separator += " --- | --- |";
                }
            }
            doc += "\n" + separator + "\n";
            for (const auto& [category_rank, row] : block.rows) {
                doc += fmt::format("| {} |", display_category(row.ptype));
                for (const std::string& model : models) {
                    for (int metric = 0; metric < 2; ++metric) {
                        auto cell = row.cells.find({model, metric});
                        if (cell == row.cells.end()) {
                            doc += " - | - |";
                        } else {
                            const ScoreSummary& summary = *cell->second;
                            doc += fmt::format(
                                " {} | {} |", summary.n_pass,
                                format_percent(summary.pass_rate(), spec.percent_precision));
                        }
                    }
                }
                doc += "\n";
            }
        }
    }
    return doc;
}

std::string render_csv(const std::vector<ScoreSummary>& summaries, const ReportSpec& spec) {
    std::string doc = "provider,task,metric,category,style,mode,n_test,n_pass,pass_rate,percent\n";
    for (const ScoreSummary* summary : canonical_order(summaries)) {
        std::string percent = format_percent(summary->pass_rate(), spec.percent_precision);
        percent.pop_back();  // CSV column keeps the number only, no '%' sign
        doc += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", summary->provider_id,
                           to_string(summary->task), to_string(summary->metric),
                           category_wire_name(summary->ptype), to_string(summary->style),
                           to_string(summary->context_mode), summary->n_test, summary->n_pass,
                           shortest_double(summary->pass_rate().value()), percent);
    }
    return doc;
}

std::string render_json(const std::vector<ScoreSummary>& summaries) {
    jsonl::Json doc;
    doc["format"] = "mmt.summaries.v1";
    doc["summaries"] = jsonl::Json::array();
    for (const ScoreSummary* summary : canonical_order(summaries)) {
        jsonl::Json entry;
        entry["provider"] = summary->provider_id;
        entry["task"] = to_string(summary->task);
        entry["metric"] = to_string(summary->metric);
        entry["category"] = category_wire_name(summary->ptype);
        entry["style"] = to_string(summary->style);
        entry["mode"] = to_string(summary->context_mode);
        entry["n_test"] = summary->n_test;
        entry["n_pass"] = summary->n_pass;
        doc["summaries"].push_back(std::move(entry));
    }
    return doc.dump(2) + "\n";
}

}  // namespace

std::string format_percent(Ratio rate, int precision) {
    if (rate.den <= 0) {
        throw HarnessError(ErrorKind::Config, "ratio must have a positive denominator");
    }
    if (rate.num < 0 || precision < 0 || precision > 6) {
        throw HarnessError(ErrorKind::Config, "percent rendering needs a rate in [0,1] and 0-6 digits");
    }
    long long scale = 1;
    for (int i = 0; i < precision; ++i) scale *= 10;
    // Half-up in integers: round(x) = floor(x + 1/2) = (2a + b) / (2b) for x = a/b >= 0.
    const long long scaled = rate.num * 100 * scale;
    const long long rounded = (2 * scaled + rate.den) / (2 * rate.den);
    if (precision == 0) return fmt::format("{}%", rounded);
    return fmt::format("{}.{:0{}}%", rounded / scale, rounded % scale, precision);
}

std::string display_category(const std::optional<PerturbationType>& ptype) {
    if (!ptype) return "Original";
    switch (*ptype) {
        case PerturbationType::Taxonomy: return "Taxonomy";
        case PerturbationType::Ner: return "NER";
        case PerturbationType::Negation: return "Negation";
        case PerturbationType::Vocab: return "Vocabulary";
        case PerturbationType::Fairness: return "Fairness";
        case PerturbationType::Robustness: return "Robustness";
        case PerturbationType::Temporal: return "Temporal";
        case PerturbationType::Srl: return "SRL";
        case PerturbationType::Coreference: return "Coreference";
    }
    return "?";
}

bool operator==(const ScoreSummary& a, const ScoreSummary& b) {
    return a.provider_id == b.provider_id && a.task == b.task && a.metric == b.metric &&
           a.ptype == b.ptype && a.style == b.style && a.context_mode == b.context_mode &&
           a.n_test == b.n_test && a.n_pass == b.n_pass;
}

RenderedReport render_tables(const std::vector<ScoreSummary>& summaries, const ReportSpec& spec) {
    if (spec.formats.empty()) {
        throw HarnessError(ErrorKind::Config, "report spec selects no formats");
    }
    if (summaries.empty()) {
        throw HarnessError(ErrorKind::EmptyInput, "no summaries to render");
    }
    RenderedReport report;
    if (spec.formats.contains(ReportFormat::MarkdownTable)) {
        report.markdown = render_markdown(summaries, spec);
    }
    if (spec.formats.contains(ReportFormat::Csv)) {
        report.csv = render_csv(summaries, spec);
    }
    if (spec.formats.contains(ReportFormat::Structured)) {
        report.json = render_json(summaries);
    }
    return report;
}

std::vector<ScoreSummary> parse_summaries_json(const std::string& json_text) {
    jsonl::Json doc = jsonl::Json::parse(json_text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || doc.value("format", "") != "mmt.summaries.v1" ||
        !doc.contains("summaries") || !doc["summaries"].is_array()) {
        throw HarnessError(ErrorKind::Schema,
                           "not a structured summary document (format 'mmt.summaries.v1')");
    }
    std::vector<ScoreSummary> summaries;
    for (const jsonl::Json& entry : doc["summaries"]) {
        const std::string where = "summaries[" + std::to_string(summaries.size()) + "]";
        ScoreSummary summary;
        summary.provider_id = jsonl::require_string(entry, "provider", where);
        summary.task = task_from_string(jsonl::require_string(entry, "task", where));
        summary.metric = metric_from_string(jsonl::require_string(entry, "metric", where));
        const std::string category = jsonl::require_string(entry, "category", where);
        if (category != "original") summary.ptype = ptype_from_string(category);
        summary.style = style_from_string(jsonl::require_string(entry, "style", where));
        summary.context_mode =
            context_mode_from_string(jsonl::require_string(entry, "mode", where));
        if (!entry.contains("n_test") || !entry["n_test"].is_number_integer() ||
            !entry.contains("n_pass") || !entry["n_pass"].is_number_integer()) {
            throw HarnessError(ErrorKind::Schema, where + ": n_test/n_pass must be integers");
        }
        summary.n_test = entry["n_test"].get<long long>();
        summary.n_pass = entry["n_pass"].get<long long>();
        summaries.push_back(std::move(summary));
    }
    return summaries;
}

std::string render_failures(const std::vector<MetamorphicVerdict>& verdicts,
                            const ResultSet& results) {
    std::vector<const MetamorphicVerdict*> failing;
    for (const MetamorphicVerdict& verdict : verdicts) {
        if (verdict.outcome != Outcome::Pass) failing.push_back(&verdict);
    }
    std::sort(failing.begin(), failing.end(),
              [](const MetamorphicVerdict* a, const MetamorphicVerdict* b) {
                  return std::tuple(ptype_rank(a->ptype), a->case_id, style_rank(a->style),
                                    a->style.few_shot_k, mode_rank(a->context_mode),
                                    a->perturbed_text) <
                         std::tuple(ptype_rank(b->ptype), b->case_id, style_rank(b->style),
                                    b->style.few_shot_k, mode_rank(b->context_mode),
                                    b->perturbed_text);
              });

    std::string doc = "# Metamorphic failures\n\n";
    if (failing.empty()) {
        doc += fmt::format("No failing pairs among {} metamorphic tests.\n", verdicts.size());
        return doc;
    }
    doc += fmt::format("{} failing pair(s) among {} metamorphic tests.\n", failing.size(),
                       verdicts.size());

    auto find_perturbed = [&](const MetamorphicVerdict& verdict) -> const ResultRecord* {
        for (const ResultRecord& record : results.records) {
            if (!record.is_original() && *record.ptype == verdict.ptype &&
                record.case_id == verdict.case_id && record.style == verdict.style &&
                record.context_mode == verdict.context_mode &&
                record.input_text == verdict.perturbed_text) {
                return &record;
            }
        }
        return nullptr;
    };

    auto label_text = [](const std::optional<Label>& label) {
        return label ? std::string(display_label(*label)) : std::string("no label");
    };

    std::optional<PerturbationType> current_section;
    for (const MetamorphicVerdict* verdict : failing) {
        if (!current_section || *current_section != verdict->ptype) {
            current_section = verdict->ptype;
            doc += fmt::format("\n## {}\n\n", display_category(current_section));
        }
        const ResultRecord* original =
            results.find_original(verdict->case_id, verdict->style, verdict->context_mode);
        const ResultRecord* perturbed = find_perturbed(*verdict);

        std::string headline;
        if (verdict->outcome == Outcome::Error) {
            headline = fmt::format("error ({})", verdict->error_reason);
        } else {
            headline = fmt::format("{} relation violated", to_string(verdict->relation));
        }
        doc += fmt::format("- case `{}` ({}, {}): {}\n", verdict->case_id,
                           to_string(verdict->style), to_string(verdict->context_mode), headline);
        doc += fmt::format("  - original: {} -> {} [{}]\n",
                           original ? quoted(original->input_text) : "?",
                           original ? quoted(original->response.raw_text) : "?",
                           label_text(verdict->original_label));
        doc += fmt::format("  - perturbed: {} -> {} [{}]\n", quoted(verdict->perturbed_text),
                           perturbed ? quoted(perturbed->response.raw_text) : "?",
                           label_text(verdict->perturbed_label));
    }
    return doc;
}

const char* to_string(ReportFormat format) {
    switch (format) {
        case ReportFormat::MarkdownTable: return "markdown";
        case ReportFormat::Csv: return "csv";
        case ReportFormat::Structured: return "json";
    }
    return "?";
}

ReportFormat report_format_from_string(std::string_view s) {
    if (s == "markdown") return ReportFormat::MarkdownTable;
    if (s == "csv") return ReportFormat::Csv;
    if (s == "json") return ReportFormat::Structured;
    throw HarnessError(ErrorKind::Schema, "unknown report format '" + std::string(s) + "'");
}

}  // namespace mmt
