#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "mmt/prompt.hpp"

using namespace mmt;

namespace {

Shot sa_shot() {
    Shot shot;
    shot.id = "shot-sa-1";
    shot.input = "I had a bad experience";
    shot.answer = Label::Negative;
    return shot;
}

Shot qa_shot() {
    Shot shot;
    shot.id = "shot-qa-1";
    shot.input = "Are you likely to find a crucifix in Karachi?";
    shot.answer = Label::No;
    shot.context =
        "The crucifix is a symbol of Christianity. The vast majority of Pakistan's population "
        "is Muslim.";
    return shot;
}

const std::string kPenguinQuestion = "Would it be common to find a penguin in Miami?";
const std::string kPenguinContext =
    "Penguins are native to the Southern Hemisphere and thrive in cold climates. Miami has a "
    "hot tropical climate.";

std::string golden(const char* name) {
    return testutil::read_file(testutil::repo_dir() / "tests" / "golden" / name);
}

}  // namespace

TEST_CASE("one-shot sentiment matches the golden transcript byte for byte") {
    RenderedPrompt prompt =
        render("I'm so tired", std::nullopt, TaskKind::SentimentAnalysis,
               {PromptStyle::Kind::OneShot}, ContextMode::NoContext, {sa_shot()},
               testutil::default_templates());
    CHECK(prompt.system_text == golden("sa_one_shot_system.txt"));
    CHECK(prompt.user_text == golden("sa_one_shot_user.txt"));
}

TEST_CASE("one-shot QA without context matches the golden transcript") {
    RenderedPrompt prompt =
        render(kPenguinQuestion, kPenguinContext, TaskKind::QuestionAnswering,
               {PromptStyle::Kind::OneShot}, ContextMode::NoContext, {qa_shot()},
               testutil::default_templates());
    CHECK(prompt.system_text == golden("qa_one_shot_nocontext_system.txt"));
    CHECK(prompt.user_text == golden("qa_one_shot_nocontext_user.txt"));
}

TEST_CASE("one-shot QA with context matches the golden transcript") {
    RenderedPrompt prompt =
        render(kPenguinQuestion, kPenguinContext, TaskKind::QuestionAnswering,
               {PromptStyle::Kind::OneShot}, ContextMode::WithContext, {qa_shot()},
               testutil::default_templates());
    CHECK(prompt.system_text == golden("qa_one_shot_context_system.txt"));
    CHECK(prompt.user_text == golden("qa_one_shot_context_user.txt"));
}

TEST_CASE("zero-shot renders without any example block") {
    RenderedPrompt prompt =
        render("I'm so tired", std::nullopt, TaskKind::SentimentAnalysis,
               {PromptStyle::Kind::ZeroShot}, ContextMode::NoContext, {},
               testutil::default_templates());
    CHECK(prompt.system_text ==
          "You are an assistant that classifies the sentiment of the message into positive, "
          "negative, and neutral.");
    CHECK(prompt.user_text ==
          "What is the sentiment of the following sentence? Limit your answer to only one of "
          "these options: Positive, Negative, or Neutral.\nI'm so tired");
}

TEST_CASE("few-shot repeats the shot block in pool order") {
    Shot second = sa_shot();
    second.id = "shot-sa-2";
    second.input = "The sunrise was breathtaking";
    second.answer = Label::Positive;
    Shot third = sa_shot();
    third.id = "shot-sa-3";
    third.input = "The parcel arrived on Tuesday";
    third.answer = Label::Neutral;

    RenderedPrompt prompt =
        render("I'm so tired", std::nullopt, TaskKind::SentimentAnalysis,
               {PromptStyle::Kind::FewShot, 3}, ContextMode::NoContext,
               {sa_shot(), second, third}, testutil::default_templates());

    const std::string expected_examples =
        " Given below is an example of the sentiment analysis task."
        "\n\nSentence: I had a bad experience\nSentiment: Negative"
        "\n\nSentence: The sunrise was breathtaking\nSentiment: Positive"
        "\n\nSentence: The parcel arrived on Tuesday\nSentiment: Neutral";
    CHECK(prompt.system_text ==
          "You are an assistant that classifies the sentiment of the message into positive, "
          "negative, and neutral." +
              expected_examples);
}

TEST_CASE("render rejects a wrong number of demonstrations") {
    try {
        render("I'm so tired", std::nullopt, TaskKind::SentimentAnalysis,
               {PromptStyle::Kind::OneShot}, ContextMode::NoContext, {},
               testutil::default_templates());
        FAIL("expected a throw");
    } catch (const HarnessError& e) {
        CHECK(e.kind() == ErrorKind::ShotCountMismatch);
    }
    try {
        render("I'm so tired", std::nullopt, TaskKind::SentimentAnalysis,
               {PromptStyle::Kind::ZeroShot}, ContextMode::NoContext, {sa_shot()},
               testutil::default_templates());
        FAIL("expected a throw");
    } catch (const HarnessError& e) {
        CHECK(e.kind() == ErrorKind::ShotCountMismatch);
    }
}

TEST_CASE("render rejects context gaps and mode misuse") {
    SUBCASE("with-context needs a case context") {
        try {
            render(kPenguinQuestion, std::nullopt, TaskKind::QuestionAnswering,
                   {PromptStyle::Kind::ZeroShot}, ContextMode::WithContext, {},
                   testutil::default_templates());
            FAIL("expected a throw");
        } catch (const HarnessError& e) {
            CHECK(e.kind() == ErrorKind::ContextMissing);
        }
    }
    SUBCASE("with-context needs shot contexts") {
        Shot bare = qa_shot();
        bare.context.reset();
        try {
            render(kPenguinQuestion, kPenguinContext, TaskKind::QuestionAnswering,
                   {PromptStyle::Kind::OneShot}, ContextMode::WithContext, {bare},
                   testutil::default_templates());
            FAIL("expected a throw");
        } catch (const HarnessError& e) {
            CHECK(e.kind() == ErrorKind::ContextMissing);
        }
    }
    SUBCASE("with-context is QA only") {
        try {
            render("I'm so tired", std::nullopt, TaskKind::SentimentAnalysis,
                   {PromptStyle::Kind::ZeroShot}, ContextMode::WithContext, {},
                   testutil::default_templates());
            FAIL("expected a throw");
        } catch (const HarnessError& e) {
            CHECK(e.kind() == ErrorKind::Config);
        }
    }
}

TEST_CASE("a demonstration equal to the case under test is leakage") {
    Shot leaky = sa_shot();
    leaky.input = "I'm so tired";
    try {
        render("I'm so tired", std::nullopt, TaskKind::SentimentAnalysis,
               {PromptStyle::Kind::OneShot}, ContextMode::NoContext, {leaky},
               testutil::default_templates());
        FAIL("expected a throw");
    } catch (const HarnessError& e) {
        CHECK(e.kind() == ErrorKind::Config);
    }
}

TEST_CASE("prompt style names round-trip") {
    CHECK(to_string(PromptStyle{PromptStyle::Kind::ZeroShot}) == "zero-shot");
    CHECK(to_string(PromptStyle{PromptStyle::Kind::OneShot}) == "one-shot");
    CHECK(to_string(PromptStyle{PromptStyle::Kind::FewShot, 5}) == "few-shot:5");

    CHECK(style_from_string("zero-shot").kind == PromptStyle::Kind::ZeroShot);
    CHECK(style_from_string("one-shot").shot_count() == 1);
    PromptStyle few = style_from_string("few-shot:4");
    CHECK(few.kind == PromptStyle::Kind::FewShot);
    CHECK(few.few_shot_k == 4);
    CHECK(style_from_string("few-shot").few_shot_k == 3);  // default k

    CHECK_THROWS_AS(style_from_string("few-shot:1"), HarnessError);
    CHECK_THROWS_AS(style_from_string("few-shot:x"), HarnessError);
    CHECK_THROWS_AS(style_from_string("many-shot"), HarnessError);

    CHECK(context_mode_from_string("no-context") == ContextMode::NoContext);
    CHECK(context_mode_from_string("with-context") == ContextMode::WithContext);
    CHECK_THROWS_AS(context_mode_from_string("ctx"), HarnessError);
}

TEST_CASE("shot pools validate label admissibility") {
    testutil::TempDir dir;
    const auto path = dir.path / "shots.jsonl";
    testutil::write_file(path,
                         R"({"id":"s1","text":"Good day","expected":"positive"})"
                         "\n"
                         R"({"id":"s2","text":"Is it raining?","expected":"yes"})"
                         "\n");
    // The same file is fine for sentiment only up to the QA-labeled line.
    CHECK_THROWS_AS(load_shot_pool(path, TaskKind::SentimentAnalysis), HarnessError);

    testutil::write_file(path, R"({"id":"s1","text":"Good day","expected":"positive"})"
                               "\n");
    std::vector<Shot> pool = load_shot_pool(path, TaskKind::SentimentAnalysis);
    REQUIRE(pool.size() == 1);
    CHECK(pool[0].id == "s1");
    CHECK(pool[0].answer == Label::Positive);
    CHECK_FALSE(pool[0].context.has_value());
}

TEST_CASE("template files reject unknown or missing sections") {
    testutil::TempDir dir;
    const auto dir_path = dir.path / "templates";
    const std::string minimal =
        "--- system ---\nSystem text here.{SHOTS}\n--- shots_header ---\n Header.\n"
        "--- shot ---\nQ: {THE_QUESTION}\nA: {THE_ANSWER}\n--- user ---\nU: {THE_QUESTION}\n";
    testutil::write_file(dir_path / "sentiment.tmpl", minimal);
    testutil::write_file(dir_path / "qa_nocontext.tmpl", minimal);
    testutil::write_file(dir_path / "qa_context.tmpl", minimal);
    CHECK_NOTHROW(TemplateSet::load_dir(dir_path));

    SUBCASE("unknown section name") {
        testutil::write_file(dir_path / "sentiment.tmpl", "--- banner ---\nhello\n");
        CHECK_THROWS_AS(TemplateSet::load_dir(dir_path), HarnessError);
    }
    SUBCASE("content before any marker") {
        testutil::write_file(dir_path / "sentiment.tmpl", "hello\n--- system ---\nx\n");
        CHECK_THROWS_AS(TemplateSet::load_dir(dir_path), HarnessError);
    }
    SUBCASE("missing user section") {
        testutil::write_file(dir_path / "sentiment.tmpl", "--- system ---\nx\n");
        CHECK_THROWS_AS(TemplateSet::load_dir(dir_path), HarnessError);
    }
    SUBCASE("missing file is an io error") {
        std::filesystem::remove(dir_path / "qa_context.tmpl");
        try {
            TemplateSet::load_dir(dir_path);
            FAIL("expected a throw");
        } catch (const HarnessError& e) {
            CHECK(e.kind() == ErrorKind::Io);
        }
    }
}
