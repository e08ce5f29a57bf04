#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mmt/core.hpp"

namespace mmt {

struct PromptStyle {
    enum class Kind { ZeroShot, OneShot, FewShot };

    Kind kind = Kind::ZeroShot;
    int few_shot_k = 3;  // only meaningful for FewShot; must be >= 2

    int shot_count() const;
    bool operator==(const PromptStyle&) const = default;
};

enum class ContextMode {
    NoContext,
    WithContext,  // QA only
};

/// One worked demonstration placed ahead of the case under test.
struct Shot {
    std::string id;
    std::string input;
    Label answer = Label::Neutral;
    std::optional<std::string> context;

    bool operator==(const Shot&) const = default;
};

/// A prompt template split into its fixed parts. `system_base` carries a
/// {SHOTS} slot; for k shots it receives `shots_header` followed by k copies
/// of `shot_block` with the demonstration slots filled in. Zero-shot renders
/// the slot to nothing, which removes the example block entirely.
struct PromptTemplate {
    std::string system_base;
    std::string shots_header;
    std::string shot_block;
    std::string user;
};

/// The three templates the harness renders from: sentiment, QA without
/// context, QA with context. Loaded from a directory of *.tmpl assets.
struct TemplateSet {
    PromptTemplate sentiment;
    PromptTemplate qa_no_context;
    PromptTemplate qa_context;

    static TemplateSet load_dir(const std::filesystem::path& dir);

    const PromptTemplate& select(TaskKind task, ContextMode mode) const;
};

struct RenderedPrompt {
    std::string system_text;
    std::string user_text;
    PromptStyle style;
    ContextMode context_mode = ContextMode::NoContext;
    TaskKind task = TaskKind::SentimentAnalysis;
    std::vector<Shot> shots;
};

/// Renders the (system, user) pair for one case. The case text and context
/// are substituted verbatim into the template slots. Throws
/// ShotCountMismatch when |shots| does not match the style and
/// ContextMissing when WithContext is asked for a case without context.
RenderedPrompt render(std::string_view case_text, const std::optional<std::string>& context,
                      TaskKind task, PromptStyle style, ContextMode mode,
                      const std::vector<Shot>& shots, const TemplateSet& templates);

const char* to_string(ContextMode mode);
ContextMode context_mode_from_string(std::string_view s);

std::string to_string(PromptStyle style);
PromptStyle style_from_string(std::string_view s);

std::vector<Shot> load_shot_pool(const std::filesystem::path& path, TaskKind task);

}  // namespace mmt
