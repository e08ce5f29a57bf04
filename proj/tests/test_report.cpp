#include "mmt/report.hpp"

#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"

using namespace mmt;

namespace {

PromptStyle zero_shot() { return {}; }
PromptStyle one_shot() { return {PromptStyle::Kind::OneShot, 3}; }
PromptStyle few_shot(int k) { return {PromptStyle::Kind::FewShot, k}; }

ScoreSummary make_summary(const std::string& provider, TaskKind task, MetricKind metric,
                          std::optional<PerturbationType> ptype, long long n_pass,
                          long long n_test, PromptStyle style = zero_shot(),
                          ContextMode mode = ContextMode::NoContext) {
    ScoreSummary summary;
    summary.provider_id = provider;
    summary.task = task;
    summary.metric = metric;
    summary.ptype = ptype;
    summary.style = style;
    summary.context_mode = mode;
    summary.n_test = n_test;
    summary.n_pass = n_pass;
    return summary;
}

/// Two providers over one sentiment table; beta is missing cells on purpose.
std::vector<ScoreSummary> two_provider_summaries() {
    return {
        make_summary("alpha", TaskKind::SentimentAnalysis, MetricKind::Accuracy, std::nullopt,
                     42, 50),
        make_summary("alpha", TaskKind::SentimentAnalysis, MetricKind::Accuracy,
                     PerturbationType::Taxonomy, 40, 50),
        make_summary("alpha", TaskKind::SentimentAnalysis, MetricKind::Metamorphic,
                     PerturbationType::Taxonomy, 42, 50),
        make_summary("beta", TaskKind::SentimentAnalysis, MetricKind::Accuracy, std::nullopt,
                     25, 50),
        make_summary("beta", TaskKind::SentimentAnalysis, MetricKind::Metamorphic,
                     PerturbationType::Taxonomy, 10, 50),
    };
}

}  // namespace

TEST_CASE("percent formatting rounds half-up in exact arithmetic") {
    CHECK(format_percent({42, 50}, 0) == "84%");
    CHECK(format_percent({5, 6}, 1) == "83.3%");
    CHECK(format_percent({0, 1}, 0) == "0%");
    CHECK(format_percent({1, 1}, 0) == "100%");
    CHECK(format_percent({42, 50}, 2) == "84.00%");

    // Exact .5 boundaries round up, just-below boundaries round down.
    CHECK(format_percent({1, 8}, 0) == "13%");    // 12.5
    CHECK(format_percent({1, 200}, 0) == "1%");   // 0.5
    CHECK(format_percent({1, 400}, 0) == "0%");   // 0.25
    CHECK(format_percent({3, 400}, 0) == "1%");   // 0.75
    CHECK(format_percent({1, 6}, 0) == "17%");    // 16.66..
    CHECK(format_percent({1, 3}, 2) == "33.33%");
    CHECK(format_percent({1, 3}, 6) == "33.333333%");
    CHECK(format_percent({2, 3}, 1) == "66.7%");
    CHECK(format_percent({1, 16}, 1) == "6.3%");  // 6.25 rounds up at the shown digit

    CHECK_THROWS_AS(format_percent({1, 0}, 0), HarnessError);
    CHECK_THROWS_AS(format_percent({-1, 2}, 0), HarnessError);
    CHECK_THROWS_AS(format_percent({1, 2}, -1), HarnessError);
    CHECK_THROWS_AS(format_percent({1, 2}, 7), HarnessError);
}

TEST_CASE("category display names") {
    CHECK(display_category(std::nullopt) == "Original");
    CHECK(display_category(PerturbationType::Taxonomy) == "Taxonomy");
    CHECK(display_category(PerturbationType::Ner) == "NER");
    CHECK(display_category(PerturbationType::Negation) == "Negation");
    CHECK(display_category(PerturbationType::Vocab) == "Vocabulary");
    CHECK(display_category(PerturbationType::Fairness) == "Fairness");
    CHECK(display_category(PerturbationType::Robustness) == "Robustness");
    CHECK(display_category(PerturbationType::Temporal) == "Temporal");
    CHECK(display_category(PerturbationType::Srl) == "SRL");
    CHECK(display_category(PerturbationType::Coreference) == "Coreference");
}

TEST_CASE("summary equality is field-wise") {
    const ScoreSummary a = make_summary("p", TaskKind::SentimentAnalysis, MetricKind::Accuracy,
                                        PerturbationType::Taxonomy, 1, 2);
    ScoreSummary b = a;
    CHECK(a == b);
    b.n_pass = 2;
    CHECK_FALSE(a == b);
    b = a;
    b.ptype = std::nullopt;
    CHECK_FALSE(a == b);
}

TEST_CASE("markdown tables interleave models and metrics with absent cells dashed") {
    ReportSpec spec;
    spec.formats = {ReportFormat::MarkdownTable};
    RenderedReport report = render_tables(two_provider_summaries(), spec);
    CHECK(report.csv.empty());
    CHECK(report.json.empty());

    const std::string expected =
        "# Results\n"
        "\n## Sentiment Analysis (no context)\n"
        "\n### Zero-shot\n\n"
        "| Category | alpha Accuracy #Correct | alpha Accuracy Pass Rate |"
        " alpha Metamorphic #Correct | alpha Metamorphic Pass Rate |"
        " beta Accuracy #Correct | beta Accuracy Pass Rate |"
        " beta Metamorphic #Correct | beta Metamorphic Pass Rate |\n"
        "| --- | --- | --- | --- | --- | --- | --- | --- | --- |\n"
        "| Original | 42 | 84% | - | - | 25 | 50% | - | - |\n"
        "| Taxonomy | 40 | 80% | 42 | 84% | - | - | 10 | 20% |\n";
    CHECK(report.markdown == expected);
}

TEST_CASE("markdown sections and style blocks appear in canonical order") {
    std::vector<ScoreSummary> summaries = {
        make_summary("m", TaskKind::QuestionAnswering, MetricKind::Accuracy, std::nullopt, 1, 2,
                     zero_shot(), ContextMode::WithContext),
        make_summary("m", TaskKind::QuestionAnswering, MetricKind::Accuracy, std::nullopt, 1, 2,
                     few_shot(3), ContextMode::NoContext),
        make_summary("m", TaskKind::QuestionAnswering, MetricKind::Accuracy, std::nullopt, 1, 2,
                     one_shot(), ContextMode::NoContext),
        make_summary("m", TaskKind::SentimentAnalysis, MetricKind::Accuracy, std::nullopt, 1, 2),
    };
    ReportSpec spec;
    spec.formats = {ReportFormat::MarkdownTable};
    const std::string doc = render_tables(summaries, spec).markdown;

    const auto sa = doc.find("## Sentiment Analysis (no context)");
    const auto qa_plain = doc.find("## Question Answering (no context)");
    const auto qa_ctx = doc.find("## Question Answering (with context)");
    REQUIRE(sa != std::string::npos);
    REQUIRE(qa_plain != std::string::npos);
    REQUIRE(qa_ctx != std::string::npos);
    CHECK(sa < qa_plain);
    CHECK(qa_plain < qa_ctx);

    const auto one = doc.find("### One-shot", qa_plain);
    const auto few = doc.find("### Few-shot (k=3)", qa_plain);
    REQUIRE(one != std::string::npos);
    REQUIRE(few != std::string::npos);
    CHECK(one < few);
    CHECK(few < qa_ctx);
}

TEST_CASE("csv rows follow canonical order with wire names") {
    ReportSpec spec;
    spec.formats = {ReportFormat::Csv};
    const std::string expected =
        "provider,task,metric,category,style,mode,n_test,n_pass,pass_rate,percent\n"
        "alpha,sentiment,accuracy,original,zero-shot,no-context,50,42,0.84,84\n"
        "alpha,sentiment,accuracy,taxonomy,zero-shot,no-context,50,40,0.8,80\n"
        "alpha,sentiment,metamorphic,taxonomy,zero-shot,no-context,50,42,0.84,84\n"
        "beta,sentiment,accuracy,original,zero-shot,no-context,50,25,0.5,50\n"
        "beta,sentiment,metamorphic,taxonomy,zero-shot,no-context,50,10,0.2,20\n";
    CHECK(render_tables(two_provider_summaries(), spec).csv == expected);
}

TEST_CASE("csv percent column honors precision without a sign") {
    ReportSpec spec;
    spec.formats = {ReportFormat::Csv};
    spec.percent_precision = 1;
    std::vector<ScoreSummary> summaries = {
        make_summary("m", TaskKind::SentimentAnalysis, MetricKind::Metamorphic,
                     PerturbationType::Vocab, 5, 6),
    };
    const std::string csv = render_tables(summaries, spec).csv;
    CHECK(csv.find(",83.3\n") != std::string::npos);
    CHECK(csv.find('%') == std::string::npos);
}

TEST_CASE("structured summaries round-trip") {
    const std::vector<ScoreSummary> summaries = two_provider_summaries();
    ReportSpec spec;
    spec.formats = {ReportFormat::Structured};
    const std::string json_text = render_tables(summaries, spec).json;
    CHECK(json_text.rfind("{\n  \"format\": \"mmt.summaries.v1\",", 0) == 0);

    std::vector<ScoreSummary> parsed = parse_summaries_json(json_text);
    REQUIRE(parsed.size() == summaries.size());
    // The document is in canonical order, which two_provider_summaries()
    // already follows, so this is exact equality.
    for (std::size_t i = 0; i < parsed.size(); ++i) CHECK(parsed[i] == summaries[i]);

    SUBCASE("rejects the wrong format tag") {
        CHECK_THROWS_AS(parse_summaries_json(R"({"format":"v2","summaries":[]})"), HarnessError);
    }
    SUBCASE("rejects non-documents") {
        CHECK_THROWS_AS(parse_summaries_json("not json at all"), HarnessError);
        CHECK_THROWS_AS(parse_summaries_json("[1,2,3]"), HarnessError);
    }
    SUBCASE("rejects missing counters") {
        CHECK_THROWS_AS(parse_summaries_json(
                            R"({"format":"mmt.summaries.v1","summaries":[{"provider":"p",)"
                            R"("task":"sentiment","metric":"accuracy","category":"original",)"
                            R"("style":"zero-shot","mode":"no-context","n_pass":1}]})"),
                        HarnessError);
    }
}

TEST_CASE("render_tables rejects empty input and empty format sets") {
    ReportSpec spec;
    try {
        render_tables({}, spec);
        FAIL_CHECK("expected a throw");
    } catch (const HarnessError& e) {
        CHECK(e.kind() == ErrorKind::EmptyInput);
    }
    spec.formats.clear();
    try {
        render_tables(two_provider_summaries(), spec);
        FAIL_CHECK("expected a throw");
    } catch (const HarnessError& e) {
        CHECK(e.kind() == ErrorKind::Config);
    }
}

TEST_CASE("failure drill-down lists non-passing pairs grouped by type") {
    auto record = [](const std::string& case_id, std::optional<PerturbationType> ptype,
                     const std::string& text, const std::string& raw,
                     std::optional<Label> parsed) {
        ResultRecord result;
        result.case_id = case_id;
        result.ptype = ptype;
        if (ptype) result.relation = MetamorphicRelation::Identity;
        result.style = zero_shot();
        result.input_text = text;
        result.gold = Label::Negative;
        result.response.raw_text = raw;
        result.response.parsed = parsed;
        result.response.provider_id = "p";
        result.response.request_digest = "d";
        return result;
    };

    ResultSet results;
    results.provider_id = "p";
    results.task = TaskKind::SentimentAnalysis;
    results.records = {
        record("c1", std::nullopt, "I'm so tired", "Negative", Label::Negative),
        record("c1", PerturbationType::Taxonomy, "I'm so exhausted", "Positive",
               Label::Positive),                                               // identity broken
        record("c1", PerturbationType::Vocab, "I'm so really tired", "hmm",
               std::nullopt),                                                  // unparsed -> error
        record("c2", std::nullopt, "The traffic is heavy", "Negative", Label::Negative),
        record("c2", PerturbationType::Taxonomy, "The traffic is dense", "Negative",
               Label::Negative),                                               // passes
    };
    const auto verdicts = pair_verdicts(results);
    REQUIRE(verdicts.size() == 3);

    const std::string doc = render_failures(verdicts, results);
    const std::string expected =
        "# Metamorphic failures\n\n"
        "2 failing pair(s) among 3 metamorphic tests.\n"
        "\n## Taxonomy\n\n"
        "- case `c1` (zero-shot, no-context): identity relation violated\n"
        "  - original: \"I'm so tired\" -> \"Negative\" [Negative]\n"
        "  - perturbed: \"I'm so exhausted\" -> \"Positive\" [Positive]\n"
        "\n## Vocabulary\n\n"
        "- case `c1` (zero-shot, no-context): error (perturbed response did not parse to a "
        "label)\n"
        "  - original: \"I'm so tired\" -> \"Negative\" [Negative]\n"
        "  - perturbed: \"I'm so really tired\" -> \"hmm\" [no label]\n";
    CHECK(doc == expected);

    SUBCASE("an all-pass run still renders a document") {
        ResultSet clean;
        clean.provider_id = "p";
        clean.task = TaskKind::SentimentAnalysis;
        clean.records = {results.records[3], results.records[4]};
        const auto clean_verdicts = pair_verdicts(clean);
        CHECK(render_failures(clean_verdicts, clean) ==
              "# Metamorphic failures\n\nNo failing pairs among 1 metamorphic tests.\n");
    }
}

TEST_CASE("report format names round-trip") {
    CHECK(std::string(to_string(ReportFormat::MarkdownTable)) == "markdown");
    CHECK(std::string(to_string(ReportFormat::Csv)) == "csv");
    CHECK(std::string(to_string(ReportFormat::Structured)) == "json");
    CHECK(report_format_from_string("markdown") == ReportFormat::MarkdownTable);
    CHECK(report_format_from_string("csv") == ReportFormat::Csv);
    CHECK(report_format_from_string("json") == ReportFormat::Structured);
    CHECK_THROWS_AS(report_format_from_string("html"), HarnessError);
}
