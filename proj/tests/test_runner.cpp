#include "mmt/runner.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"

using namespace mmt;

namespace {

PromptStyle zero_shot() { return {}; }
PromptStyle one_shot() { return {PromptStyle::Kind::OneShot, 3}; }
PromptStyle few_shot(int k) { return {PromptStyle::Kind::FewShot, k}; }

Shot make_shot(const std::string& id, const std::string& input, Label answer,
               std::optional<std::string> context = std::nullopt) {
    Shot shot;
    shot.id = id;
    shot.input = input;
    shot.answer = answer;
    shot.context = std::move(context);
    return shot;
}

/// Three sentiment cases, four perturbed entries (two types, one case with
/// two taxonomy variants), two styles. 7 prompts per style -> 14 jobs.
RunPlan sentiment_plan() {
    RunPlan plan;
    plan.dataset = {
        testutil::sa_case("c1", "I'm so tired", Label::Negative),
        testutil::sa_case("c2", "The traffic is heavy", Label::Negative),
        testutil::sa_case("c3", "The view from here is stunning", Label::Positive),
    };
    plan.suite.dataset_id = "mini";
    plan.suite.entries = {
        testutil::perturbed("c1", PerturbationType::Taxonomy, "I'm so exhausted",
                            MetamorphicRelation::Identity, Label::Negative),
        testutil::perturbed("c1", PerturbationType::Taxonomy, "I'm so weary",
                            MetamorphicRelation::Identity, Label::Negative),
        testutil::perturbed("c1", PerturbationType::Vocab, "I'm so really tired",
                            MetamorphicRelation::Identity, Label::Negative),
        testutil::perturbed("c3", PerturbationType::Robustness, "The view from here is stunnnig",
                            MetamorphicRelation::Identity, Label::Positive),
    };
    plan.styles = {zero_shot(), one_shot()};
    plan.context_modes = {ContextMode::NoContext};
    plan.provider = testutil::scripted_config("echo");
    plan.shot_pool = {
        make_shot("shot-1", "I had a bad experience", Label::Negative),
        make_shot("shot-2", "What a wonderful day", Label::Positive),
        make_shot("shot-3", "The parcel arrived on Tuesday", Label::Neutral),
    };
    plan.templates = testutil::default_templates();
    plan.seed = 7;
    return plan;
}

RunPlan qa_plan() {
    RunPlan plan;
    plan.dataset = {
        testutil::qa_case("q1", "Would it be common to find a penguin in Miami?",
                          "Penguins live in cold climates.", Label::No),
        testutil::qa_case("q2", "Is water a liquid at room temperature?",
                          "Water is liquid between 0 and 100 Celsius.", Label::Yes),
    };
    plan.suite.dataset_id = "mini-qa";
    PerturbedCase entry = testutil::perturbed("q1", PerturbationType::Srl,
                                              "In Miami, would finding a penguin be common?",
                                              MetamorphicRelation::Identity, Label::No);
    entry.context = "Penguins live in cold climates.";
    plan.suite.entries = {entry};
    plan.styles = {zero_shot()};
    plan.context_modes = {ContextMode::NoContext, ContextMode::WithContext};
    plan.provider = testutil::scripted_config("echo");
    plan.shot_pool = {make_shot("shot-q", "Are you likely to find a crucifix in Karachi?",
                                Label::No, "Karachi is a Muslim-majority city.")};
    plan.templates = testutil::default_templates();
    return plan;
}

std::unique_ptr<Provider> fixed_provider(const std::string& text) {
    return make_scripted_provider("echo", [text](const CompletionRequest&) { return text; });
}

}  // namespace

TEST_CASE("plan validation rejects unrunnable plans") {
    RunPlan plan = sentiment_plan();
    CHECK_NOTHROW(plan.validate());

    auto expect_kind = [](const RunPlan& bad, ErrorKind kind) {
        try {
            bad.validate();
            FAIL_CHECK("expected a throw");
        } catch (const HarnessError& e) {
            CHECK(e.kind() == kind);
        }
    };

    SUBCASE("empty dataset") {
        plan.dataset.clear();
        expect_kind(plan, ErrorKind::Config);
    }
    SUBCASE("no styles") {
        plan.styles.clear();
        expect_kind(plan, ErrorKind::Config);
    }
    SUBCASE("no context modes") {
        plan.context_modes.clear();
        expect_kind(plan, ErrorKind::Config);
    }
    SUBCASE("duplicate case ids") {
        plan.dataset.push_back(plan.dataset.front());
        expect_kind(plan, ErrorKind::Schema);
    }
    SUBCASE("suite entry pointing at a missing case") {
        plan.suite.entries[0].base_id = "ghost";
        expect_kind(plan, ErrorKind::DanglingBaseId);
    }
    SUBCASE("suite type that does not fit the task") {
        RunPlan qa = qa_plan();
        qa.suite.entries[0].ptype = PerturbationType::Temporal;  // sentiment-only
        expect_kind(qa, ErrorKind::ApplicabilityViolation);
    }
    SUBCASE("with-context on a sentiment plan") {
        plan.context_modes = {ContextMode::WithContext};
        expect_kind(plan, ErrorKind::Config);
    }
    SUBCASE("with-context but a case lacks context") {
        RunPlan qa = qa_plan();
        qa.dataset[1].context.reset();
        expect_kind(qa, ErrorKind::ContextMissing);
    }
    SUBCASE("with-context but a suite entry lacks context") {
        RunPlan qa = qa_plan();
        qa.suite.entries[0].context.reset();
        expect_kind(qa, ErrorKind::ContextMissing);
    }
    SUBCASE("with-context but a shot lacks context") {
        RunPlan qa = qa_plan();
        qa.styles = {one_shot()};
        qa.shot_pool[0].context.reset();
        expect_kind(qa, ErrorKind::ContextMissing);
    }
    SUBCASE("shot pool smaller than the widest style") {
        plan.styles = {few_shot(4)};
        expect_kind(plan, ErrorKind::Config);
    }
    SUBCASE("shot id colliding with a case id") {
        plan.shot_pool[0].id = "c2";
        expect_kind(plan, ErrorKind::Config);
    }
    SUBCASE("shot with a label from the wrong task") {
        plan.shot_pool[0].answer = Label::Yes;
        expect_kind(plan, ErrorKind::Schema);
    }
}

TEST_CASE("shots_for slices the pool head") {
    RunPlan plan = sentiment_plan();
    CHECK(plan.shots_for(zero_shot()).empty());
    auto one = plan.shots_for(one_shot());
    REQUIRE(one.size() == 1);
    CHECK(one[0].id == "shot-1");
    auto three = plan.shots_for(few_shot(3));
    REQUIRE(three.size() == 3);
    CHECK(three[2].id == "shot-3");
    CHECK_THROWS_AS(plan.shots_for(few_shot(4)), HarnessError);
}

TEST_CASE("plan digest covers every input") {
    const RunPlan base = sentiment_plan();
    const std::string digest = base.digest();
    CHECK(digest.size() == 64);
    CHECK(sentiment_plan().digest() == digest);  // deterministic rebuild

    auto differs = [&](auto mutate) {
        RunPlan changed = sentiment_plan();
        mutate(changed);
        CHECK(changed.digest() != digest);
    };
    differs([](RunPlan& p) { p.seed = 8; });
    differs([](RunPlan& p) { p.dataset[0].input_text += "!"; });
    differs([](RunPlan& p) { p.dataset[0].expected = Label::Neutral; });
    differs([](RunPlan& p) { p.suite.entries[0].text += "!"; });
    differs([](RunPlan& p) { p.suite.entries[0].provenance = Provenance::Generated; });
    differs([](RunPlan& p) { p.styles.pop_back(); });
    differs([](RunPlan& p) { p.provider.model = "other"; });
    differs([](RunPlan& p) { p.shot_pool[0].input += "!"; });
    differs([](RunPlan& p) { p.templates.sentiment.system_base += "!"; });
}

TEST_CASE("run issues exactly one call per prompt and shares originals") {
    RunPlan plan = sentiment_plan();
    std::atomic<int> calls{0};
    std::set<std::string> digests;
    std::mutex digests_mutex;
    auto provider = make_scripted_provider("echo", [&](const CompletionRequest& request) {
        ++calls;
        std::lock_guard<std::mutex> lock(digests_mutex);
        digests.insert(request.digest());
        return std::string("Negative");
    });

    ResultSet results = run(plan, *provider);

    // (3 originals + 4 perturbed) x 2 styles x 1 mode.
    CHECK(calls == 14);
    CHECK(digests.size() == 14);  // no request was ever repeated
    CHECK(results.records.size() == 14);
    CHECK(results.plan_digest == plan.digest());
    CHECK(results.task == TaskKind::SentimentAnalysis);
    CHECK(results.provider_id == "echo");
    CHECK(results.model == "echo");

    // Each (case, style, mode) original exists exactly once even though two
    // suite entries lean on c1's original.
    int c1_originals = 0;
    for (const ResultRecord& record : results.records) {
        if (record.case_id == "c1" && record.is_original()) ++c1_originals;
    }
    CHECK(c1_originals == 2);  // one per style
}

TEST_CASE("records come back in canonical order") {
    RunPlan plan = sentiment_plan();
    auto provider = fixed_provider("Neutral");
    RunOptions options;
    options.shuffle_seed = 99;  // dispatch scrambled on purpose
    ResultSet results = run(plan, *provider, options);

    std::vector<std::tuple<std::string, bool, std::string, std::string>> got;
    for (const ResultRecord& record : results.records) {
        got.emplace_back(record.case_id, record.is_original(),
                         record.ptype ? to_string(*record.ptype) : "",
                         std::string(to_string(record.style)));
    }
    // Grouping: case, then originals-before-perturbations in canonical type
    // order, then variant text, then style, then mode.
    const std::vector<std::tuple<std::string, bool, std::string, std::string>> expected = {
        {"c1", true, "", "zero-shot"},
        {"c1", true, "", "one-shot"},
        {"c1", false, "taxonomy", "zero-shot"},  // "exhausted" < "weary"
        {"c1", false, "taxonomy", "one-shot"},
        {"c1", false, "taxonomy", "zero-shot"},
        {"c1", false, "taxonomy", "one-shot"},
        {"c1", false, "vocab", "zero-shot"},
        {"c1", false, "vocab", "one-shot"},
        {"c2", true, "", "zero-shot"},
        {"c2", true, "", "one-shot"},
        {"c3", true, "", "zero-shot"},
        {"c3", true, "", "one-shot"},
        {"c3", false, "robustness", "zero-shot"},
        {"c3", false, "robustness", "one-shot"},
    };
    CHECK(got == expected);

    CHECK(results.records[2].input_text == "I'm so exhausted");
    CHECK(results.records[3].input_text == "I'm so exhausted");
    CHECK(results.records[4].input_text == "I'm so weary");
}

TEST_CASE("dispatch order never changes the canonical body") {
    RunPlan plan = sentiment_plan();
    auto provider = fixed_provider("Positive");
    const std::string baseline = run(plan, *provider).records_jsonl();
    for (std::uint64_t seed : {1ULL, 42ULL, 31337ULL}) {
        RunOptions options;
        options.shuffle_seed = seed;
        CHECK(run(plan, *provider, options).records_jsonl() == baseline);
    }
}

TEST_CASE("a parallel provider produces the same canonical body") {
    struct ParallelEcho : Provider {
        ModelResponse complete(const CompletionRequest& request) override {
            ModelResponse response;
            response.raw_text = "Negative";
            response.provider_id = "echo";
            response.request_digest = request.digest();
            return response;
        }
        int max_in_flight() const override { return 4; }
    };

    RunPlan plan = sentiment_plan();
    ParallelEcho parallel;
    auto serial = fixed_provider("Negative");
    CHECK(run(plan, parallel).records_jsonl() == run(plan, *serial).records_jsonl());
}

TEST_CASE("provider failures are captured per record") {
    RunPlan plan = sentiment_plan();
    auto provider = make_scripted_provider("echo", [](const CompletionRequest& request) {
        if (request.user_text.find("heavy") != std::string::npos) {
            throw HarnessError(ErrorKind::Network, "socket closed");
        }
        return std::string("Negative");
    });

    ResultSet results = run(plan, *provider);
    int failed = 0;
    for (const ResultRecord& record : results.records) {
        if (record.case_id == "c2") {
            REQUIRE(record.error.has_value());
            CHECK(*record.error == "network error: socket closed");
            CHECK(record.response.raw_text.empty());
            CHECK_FALSE(record.response.parsed.has_value());
            CHECK(record.response.provider_id == "echo");
            CHECK_FALSE(record.response.request_digest.empty());
            ++failed;
        } else {
            CHECK_FALSE(record.error.has_value());
            CHECK(record.response.parsed == Label::Negative);
        }
    }
    CHECK(failed == 2);  // c2 original under both styles
}

TEST_CASE("an unrecognizable response is unparsed, not an error") {
    RunPlan plan = sentiment_plan();
    auto provider = fixed_provider("I cannot say.");
    ResultSet results = run(plan, *provider);
    for (const ResultRecord& record : results.records) {
        CHECK_FALSE(record.error.has_value());
        CHECK(record.response.raw_text == "I cannot say.");
        CHECK_FALSE(record.response.parsed.has_value());
    }
}

TEST_CASE("qa runs fan out across context modes") {
    RunPlan plan = qa_plan();
    auto provider = fixed_provider("No");
    ResultSet results = run(plan, *provider);
    // (2 originals + 1 perturbed) x 1 style x 2 modes.
    CHECK(results.records.size() == 6);
    const ResultRecord* no_ctx =
        results.find_original("q1", zero_shot(), ContextMode::NoContext);
    const ResultRecord* with_ctx =
        results.find_original("q1", zero_shot(), ContextMode::WithContext);
    REQUIRE(no_ctx != nullptr);
    REQUIRE(with_ctx != nullptr);
    CHECK(no_ctx != with_ctx);
    CHECK(no_ctx->response.request_digest != with_ctx->response.request_digest);
    CHECK(results.find_original("q1", one_shot(), ContextMode::NoContext) == nullptr);
    CHECK(results.find_original("missing", zero_shot(), ContextMode::NoContext) ==
          nullptr);
}

TEST_CASE("result sets round-trip through disk") {
    testutil::TempDir dir;
    RunPlan plan = sentiment_plan();
    auto provider = fixed_provider("Negative");
    ResultSet results = run(plan, *provider);
    const auto path = dir.path / "results.jsonl";
    results.save(path);

    ResultSet loaded = ResultSet::load(path);
    CHECK(loaded.plan_digest == results.plan_digest);
    CHECK(loaded.task == results.task);
    CHECK(loaded.provider_id == results.provider_id);
    CHECK(loaded.model == results.model);
    CHECK(loaded.started == results.started);
    CHECK(loaded.finished == results.finished);
    CHECK(loaded.records_jsonl() == results.records_jsonl());

    // Saved files carry wall-clock detail; the canonical body never does.
    const std::string file = testutil::read_file(path);
    CHECK(file.find("latency_ms") != std::string::npos);
    const std::string body = results.records_jsonl();
    CHECK(body.find("latency_ms") == std::string::npos);
    CHECK(body.find("started") == std::string::npos);
}

TEST_CASE("loading a result set enforces structure") {
    testutil::TempDir dir;
    const auto path = dir.path / "results.jsonl";

    SUBCASE("missing header") {
        testutil::write_file(path, "");
        CHECK_THROWS_AS(ResultSet::load(path), HarnessError);
    }
    SUBCASE("wrong format tag") {
        testutil::write_file(path, R"({"format":"mmt.results.v2"})"
                                   "\n");
        CHECK_THROWS_AS(ResultSet::load(path), HarnessError);
    }
    SUBCASE("perturbed record with no original") {
        ResultSet orphan;
        orphan.plan_digest = "d";
        orphan.task = TaskKind::SentimentAnalysis;
        orphan.provider_id = "p";
        orphan.model = "m";
        orphan.started = "2026-01-01T00:00:00Z";
        orphan.finished = orphan.started;
        ResultRecord record;
        record.case_id = "c1";
        record.ptype = PerturbationType::Taxonomy;
        record.relation = MetamorphicRelation::Identity;
        record.style = zero_shot();
        record.input_text = "I'm so exhausted";
        record.gold = Label::Negative;
        record.response.raw_text = "Negative";
        record.response.parsed = Label::Negative;
        record.response.provider_id = "p";
        record.response.request_digest = "0";
        orphan.records.push_back(record);
        orphan.save(path);
        try {
            ResultSet::load(path);
            FAIL("expected a throw");
        } catch (const HarnessError& e) {
            CHECK(e.kind() == ErrorKind::Schema);
        }
    }
}
