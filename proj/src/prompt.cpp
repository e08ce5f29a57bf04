#include "mmt/prompt.hpp"

#include <fstream>

#include "jsonl.hpp"

namespace mmt {

namespace {

void replace_all(std::string& text, std::string_view slot, std::string_view value) {
    std::size_t pos = 0;
    while ((pos = text.find(slot, pos)) != std::string::npos) {
        text.replace(pos, slot.size(), value);
        pos += value.size();
    }
}

/// Slot names used inside template and shot blocks.
constexpr const char* kSentenceSlot = "{THE_SENTENCE}";
constexpr const char* kQuestionSlot = "{THE_QUESTION}";
constexpr const char* kContextSlot = "{THE_CONTEXT}";
constexpr const char* kAnswerSlot = "{THE_ANSWER}";
constexpr const char* kShotsSlot = "{SHOTS}";

std::string render_shot_block(const PromptTemplate& tmpl, const Shot& shot, TaskKind task) {
    std::string block = tmpl.shot_block;
    replace_all(block, task == TaskKind::SentimentAnalysis ? kSentenceSlot : kQuestionSlot,
                shot.input);
    replace_all(block, kAnswerSlot, display_label(shot.answer));
    if (block.find(kContextSlot) != std::string::npos) {
        if (!shot.context) {
            throw HarnessError(ErrorKind::ContextMissing,
                               "demonstration '" + shot.id + "' has no context");
        }
        replace_all(block, kContextSlot, *shot.context);
    }
    return block;
}

// Template files are a sequence of "--- name ---" marker lines; a section's
// content is the lines in between joined with '\n' (no trailing newline), so
// leading blank lines express literal leading newlines in the section.
PromptTemplate parse_template(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw HarnessError(ErrorKind::Io, "cannot open template '" + path.string() + "'");
    }
    PromptTemplate tmpl;
    std::string* section = nullptr;
    bool section_started = false;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.rfind("--- ", 0) == 0 && line.size() > 8 &&
            line.compare(line.size() - 4, 4, " ---") == 0) {
            std::string name = line.substr(4, line.size() - 8);
            if (name == "system") section = &tmpl.system_base;
            else if (name == "shots_header") section = &tmpl.shots_header;
            else if (name == "shot") section = &tmpl.shot_block;
            else if (name == "user") section = &tmpl.user;
            else throw HarnessError(ErrorKind::Schema,
                                    path.string() + ": unknown section '" + name + "'");
            section_started = false;
            continue;
        }
        if (!section) {
            throw HarnessError(ErrorKind::Schema,
                               path.string() + ": content before the first section marker");
        }
        if (section_started) *section += "\n";
        *section += line;
        section_started = true;
    }
    if (tmpl.system_base.empty() || tmpl.user.empty()) {
        throw HarnessError(ErrorKind::Schema,
                           path.string() + ": template needs 'system' and 'user' sections");
    }
    return tmpl;
}

}  // namespace

int PromptStyle::shot_count() const {
    switch (kind) {
        case Kind::ZeroShot: return 0;
        case Kind::OneShot: return 1;
        case Kind::FewShot: return few_shot_k;
    }
    return 0;
}

TemplateSet TemplateSet::load_dir(const std::filesystem::path& dir) {
    TemplateSet set;
    set.sentiment = parse_template(dir / "sentiment.tmpl");
    set.qa_no_context = parse_template(dir / "qa_nocontext.tmpl");
    set.qa_context = parse_template(dir / "qa_context.tmpl");
    return set;
}

const PromptTemplate& TemplateSet::select(TaskKind task, ContextMode mode) const {
    if (task == TaskKind::SentimentAnalysis) return sentiment;
    return mode == ContextMode::WithContext ? qa_context : qa_no_context;
}

RenderedPrompt render(std::string_view case_text, const std::optional<std::string>& context,
                      TaskKind task, PromptStyle style, ContextMode mode,
                      const std::vector<Shot>& shots, const TemplateSet& templates) {
    if (task == TaskKind::SentimentAnalysis && mode == ContextMode::WithContext) {
        throw HarnessError(ErrorKind::Config, "with-context mode is QA only");
    }
    if (style.kind == PromptStyle::Kind::FewShot && style.few_shot_k < 2) {
        throw HarnessError(ErrorKind::Config, "few-shot needs k >= 2");
    }
    if (static_cast<int>(shots.size()) != style.shot_count()) {
        throw HarnessError(ErrorKind::ShotCountMismatch,
                           "style '" + to_string(style) + "' needs " +
                               std::to_string(style.shot_count()) + " demonstrations, got " +
                               std::to_string(shots.size()));
    }
    for (const Shot& shot : shots) {
        if (shot.input == case_text) {
            throw HarnessError(ErrorKind::Config,
                               "demonstration '" + shot.id + "' equals the case under test");
        }
    }

    const PromptTemplate& tmpl = templates.select(task, mode);

    std::string shots_text;
    if (!shots.empty()) {
        shots_text = tmpl.shots_header;
        for (const Shot& shot : shots) shots_text += render_shot_block(tmpl, shot, task);
    }
    std::string system_text = tmpl.system_base;
    replace_all(system_text, kShotsSlot, shots_text);

    std::string user_text = tmpl.user;
    replace_all(user_text, task == TaskKind::SentimentAnalysis ? kSentenceSlot : kQuestionSlot,
                case_text);
    if (user_text.find(kContextSlot) != std::string::npos) {
        if (!context) {
            throw HarnessError(ErrorKind::ContextMissing, "case has no context");
        }
        replace_all(user_text, kContextSlot, *context);
    }

    RenderedPrompt prompt;
    prompt.system_text = std::move(system_text);
    prompt.user_text = std::move(user_text);
    prompt.style = style;
    prompt.context_mode = mode;
    prompt.task = task;
    prompt.shots = shots;
    return prompt;
}

const char* to_string(ContextMode mode) {
    return mode == ContextMode::NoContext ? "no-context" : "with-context";
}

ContextMode context_mode_from_string(std::string_view s) {
    if (s == "no-context") return ContextMode::NoContext;
    if (s == "with-context") return ContextMode::WithContext;
    throw HarnessError(ErrorKind::Schema, "unknown context mode '" + std::string(s) + "'");
}

std::string to_string(PromptStyle style) {
    switch (style.kind) {
        case PromptStyle::Kind::ZeroShot: return "zero-shot";
        case PromptStyle::Kind::OneShot: return "one-shot";
        case PromptStyle::Kind::FewShot: return "few-shot:" + std::to_string(style.few_shot_k);
    }
    return "?";
}

PromptStyle style_from_string(std::string_view s) {
    if (s == "zero-shot") return {PromptStyle::Kind::ZeroShot};
    if (s == "one-shot") return {PromptStyle::Kind::OneShot};
    if (s == "few-shot") return {PromptStyle::Kind::FewShot, 3};
    if (s.rfind("few-shot:", 0) == 0) {
        int k = 0;
        try {
            k = std::stoi(std::string(s.substr(9)));
        } catch (const std::exception&) {
            throw HarnessError(ErrorKind::Schema, "bad few-shot count in '" + std::string(s) + "'");
        }
        if (k < 2) throw HarnessError(ErrorKind::Schema, "few-shot needs k >= 2");
        return {PromptStyle::Kind::FewShot, k};
    }
    throw HarnessError(ErrorKind::Schema, "unknown prompt style '" + std::string(s) + "'");
}

std::vector<Shot> load_shot_pool(const std::filesystem::path& path, TaskKind task) {
    std::vector<Shot> shots;
    jsonl::for_each_record(path, [&](const jsonl::Json& record, int line) {
        std::string where = path.string() + ":" + std::to_string(line);
        Shot shot;
        shot.id = jsonl::require_string(record, "id", where);
        shot.input = jsonl::require_string(record, "text", where);
        shot.answer = label_from_string(jsonl::require_string(record, "expected", where));
        if (record.contains("context") && !record["context"].is_null()) {
            shot.context = jsonl::require_string(record, "context", where);
        }
        if (!is_admissible(shot.answer, task)) {
            throw HarnessError(ErrorKind::Schema, where + ": demonstration label not admissible");
        }
        shots.push_back(std::move(shot));
    });
    return shots;
}

}  // namespace mmt
