#include "mmt/runner.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <set>
#include <thread>
#include <tuple>
#include <utility>

#include "jsonl.hpp"
#include "mmt/dataset.hpp"
#include "mmt/digest.hpp"
#include "rng.hpp"
#include "timefmt.hpp"

namespace mmt {

namespace {

void append_field(std::string& buffer, std::string_view name, std::string_view value) {
    buffer.append(name);
    buffer.push_back('=');
    buffer.append(std::to_string(value.size()));
    buffer.push_back(':');
    buffer.append(value);
    buffer.push_back('\n');
}

void append_optional(std::string& buffer, std::string_view name,
                     const std::optional<std::string>& value) {
    append_field(buffer, name, value ? std::string_view(*value) : std::string_view("\x01none"));
}

int style_rank(PromptStyle style) {
    switch (style.kind) {
        case PromptStyle::Kind::ZeroShot: return 0;
        case PromptStyle::Kind::OneShot: return 1;
        case PromptStyle::Kind::FewShot: return 2;
    }
    return 3;
}

int ptype_rank(const std::optional<PerturbationType>& ptype) {
    if (!ptype) return -1;  // originals sort ahead of every perturbation
    const auto* begin = std::begin(kAllPerturbationTypes);
    const auto* end = std::end(kAllPerturbationTypes);
    return static_cast<int>(std::find(begin, end, *ptype) - begin);
}

auto record_key(const ResultRecord& record) {
    return std::tuple(record.case_id, ptype_rank(record.ptype), record.input_text,
                      style_rank(record.style), record.style.few_shot_k,
                      record.context_mode == ContextMode::WithContext ? 1 : 0);
}

jsonl::Json record_to_json(const ResultRecord& record, bool include_latency) {
    jsonl::Json line;
    line["case_id"] = record.case_id;
    if (record.ptype) line["ptype"] = to_string(*record.ptype);
    if (record.relation) line["relation"] = to_string(*record.relation);
    line["style"] = to_string(record.style);
    line["mode"] = to_string(record.context_mode);
    line["input"] = record.input_text;
    if (record.context) line["context"] = *record.context;
    line["gold"] = to_string(record.gold);
    jsonl::Json response;
    response["raw"] = record.response.raw_text;
    if (record.response.parsed) response["parsed"] = to_string(*record.response.parsed);
    response["provider"] = record.response.provider_id;
    response["digest"] = record.response.request_digest;
    if (include_latency) response["latency_ms"] = record.response.latency_ms;
    line["response"] = std::move(response);
    if (record.error) line["error"] = *record.error;
    return line;
}

ResultRecord record_from_json(const jsonl::Json& line, const std::string& where) {
    ResultRecord record;
    record.case_id = jsonl::require_string(line, "case_id", where);
    if (line.contains("ptype") && !line["ptype"].is_null()) {
        record.ptype = ptype_from_string(jsonl::require_string(line, "ptype", where));
    }
    if (line.contains("relation") && !line["relation"].is_null()) {
        record.relation = relation_from_string(jsonl::require_string(line, "relation", where));
    }
    record.style = style_from_string(jsonl::require_string(line, "style", where));
    record.context_mode = context_mode_from_string(jsonl::require_string(line, "mode", where));
    record.input_text = jsonl::require_string(line, "input", where);
    if (line.contains("context") && !line["context"].is_null()) {
        record.context = jsonl::require_string(line, "context", where);
    }
    record.gold = label_from_string(jsonl::require_string(line, "gold", where));
    if (!line.contains("response") || !line["response"].is_object()) {
        throw HarnessError(ErrorKind::Schema, where + ": missing response object");
    }
    const jsonl::Json& response = line["response"];
    record.response.raw_text = jsonl::require_string(response, "raw", where);
    if (response.contains("parsed") && !response["parsed"].is_null()) {
        record.response.parsed = label_from_string(jsonl::require_string(response, "parsed", where));
    }
    record.response.provider_id = jsonl::require_string(response, "provider", where);
    record.response.request_digest = jsonl::require_string(response, "digest", where);
    if (response.contains("latency_ms") && response["latency_ms"].is_number_unsigned()) {
        record.response.latency_ms = response["latency_ms"].get<std::uint64_t>();
    }
    if (line.contains("error") && !line["error"].is_null()) {
        record.error = jsonl::require_string(line, "error", where);
    }
    return record;
}

void check_pair_completeness(const ResultSet& result_set, const std::string& where) {
    std::set<std::tuple<std::string, std::string, std::string>> originals;
    for (const ResultRecord& record : result_set.records) {
        if (record.is_original()) {
            originals.insert({record.case_id, to_string(record.style),
                              to_string(record.context_mode)});
        }
    }
    for (const ResultRecord& record : result_set.records) {
        if (record.is_original()) continue;
        if (!originals.contains({record.case_id, to_string(record.style),
                                 to_string(record.context_mode)})) {
            throw HarnessError(ErrorKind::Schema,
                               where + ": perturbed record for case '" + record.case_id +
                                   "' has no matching original record");
        }
    }
}

}  // namespace

TaskKind RunPlan::task() const { return dataset_task(dataset); }

std::vector<Shot> RunPlan::shots_for(PromptStyle style) const {
    const std::size_t count = static_cast<std::size_t>(style.shot_count());
    if (shot_pool.size() < count) {
        throw HarnessError(ErrorKind::Config,
                           "shot pool holds " + std::to_string(shot_pool.size()) +
                               " demonstrations but style '" + to_string(style) + "' needs " +
                               std::to_string(count));
    }
    return std::vector<Shot>(shot_pool.begin(), shot_pool.begin() + count);
}

void RunPlan::validate() const {
    if (dataset.empty()) throw HarnessError(ErrorKind::Config, "plan has an empty dataset");
    if (styles.empty()) throw HarnessError(ErrorKind::Config, "plan lists no prompt styles");
    if (context_modes.empty()) throw HarnessError(ErrorKind::Config, "plan lists no context modes");
    provider.validate();

    const TaskKind plan_task = task();
    std::set<std::string> case_ids;
    for (const TestCase& test_case : dataset) {
        validate_test_case(test_case);
        if (!case_ids.insert(test_case.id).second) {
            throw HarnessError(ErrorKind::Schema, "duplicate case id '" + test_case.id + "'");
        }
    }

    const bool wants_context =
        std::find(context_modes.begin(), context_modes.end(), ContextMode::WithContext) !=
        context_modes.end();
    if (wants_context && plan_task != TaskKind::QuestionAnswering) {
        throw HarnessError(ErrorKind::Config, "with-context mode only applies to the qa task");
    }
    if (wants_context) {
        for (const TestCase& test_case : dataset) {
            if (!test_case.context) {
                throw HarnessError(ErrorKind::ContextMissing,
                                   "case '" + test_case.id +
                                       "' has no context but with-context mode is planned");
            }
        }
    }

    for (const PerturbedCase& entry : suite.entries) {
        if (!case_ids.contains(entry.base_id)) {
            throw HarnessError(ErrorKind::DanglingBaseId,
                               "suite entry references unknown case '" + entry.base_id + "'");
        }
        if (!is_applicable(entry.ptype, plan_task)) {
            throw HarnessError(ErrorKind::ApplicabilityViolation,
                               std::string("suite entry type '") + to_string(entry.ptype) +
                                   "' does not apply to task '" + to_string(plan_task) + "'");
        }
        if (wants_context && !entry.context) {
            throw HarnessError(ErrorKind::ContextMissing,
                               "suite entry for case '" + entry.base_id +
                                   "' has no context but with-context mode is planned");
        }
    }

    int max_shots = 0;
    for (PromptStyle style : styles) max_shots = std::max(max_shots, style.shot_count());
    if (static_cast<int>(shot_pool.size()) < max_shots) {
        throw HarnessError(ErrorKind::Config,
                           "shot pool holds " + std::to_string(shot_pool.size()) +
                               " demonstrations but the widest style needs " +
                               std::to_string(max_shots));
    }
    for (const Shot& shot : shot_pool) {
        if (case_ids.contains(shot.id)) {
            throw HarnessError(ErrorKind::Config,
                               "shot '" + shot.id + "' shares an id with a dataset case");
        }
        if (!is_admissible(shot.answer, plan_task)) {
            throw HarnessError(ErrorKind::Schema,
                               "shot '" + shot.id + "' answer is not admissible for the task");
        }
        if (wants_context && !shot.context) {
            throw HarnessError(ErrorKind::ContextMissing,
                               "shot '" + shot.id +
                                   "' has no context but with-context mode is planned");
        }
    }
}

std::string RunPlan::digest() const {
    // Canonical length-prefixed encoding of every run input; versioned
    // because stored result sets carry this digest.
    std::string buffer = "mmt.plan.v1\n";
    append_field(buffer, "task", to_string(task()));
    for (const TestCase& test_case : dataset) {
        append_field(buffer, "case.id", test_case.id);
        append_field(buffer, "case.text", test_case.input_text);
        append_optional(buffer, "case.context", test_case.context);
        append_field(buffer, "case.expected", to_string(test_case.expected));
    }
    append_field(buffer, "suite.dataset_id", suite.dataset_id);
    for (const PerturbedCase& entry : suite.entries) {
        append_field(buffer, "entry.base_id", entry.base_id);
        append_field(buffer, "entry.type", to_string(entry.ptype));
        append_field(buffer, "entry.text", entry.text);
        append_optional(buffer, "entry.context", entry.context);
        append_field(buffer, "entry.relation", to_string(entry.relation));
        append_field(buffer, "entry.expected", to_string(entry.expected));
        append_field(buffer, "entry.provenance", to_string(entry.provenance));
        append_field(buffer, "entry.seed", entry.seed ? std::to_string(*entry.seed) : "");
    }
    for (PromptStyle style : styles) append_field(buffer, "style", to_string(style));
    for (ContextMode mode : context_modes) append_field(buffer, "mode", to_string(mode));
    append_field(buffer, "provider.name", provider.name);
    append_field(buffer, "provider.model", provider.model);
    for (const PromptTemplate* tmpl :
         {&templates.sentiment, &templates.qa_no_context, &templates.qa_context}) {
        append_field(buffer, "template.system", tmpl->system_base);
        append_field(buffer, "template.header", tmpl->shots_header);
        append_field(buffer, "template.shot", tmpl->shot_block);
        append_field(buffer, "template.user", tmpl->user);
    }
    for (const Shot& shot : shot_pool) {
        append_field(buffer, "shot.id", shot.id);
        append_field(buffer, "shot.input", shot.input);
        append_field(buffer, "shot.answer", to_string(shot.answer));
        append_optional(buffer, "shot.context", shot.context);
    }
    append_field(buffer, "seed", std::to_string(seed));
    return sha256_hex(buffer);
}

std::string ResultSet::records_jsonl() const {
    std::string body;
    for (const ResultRecord& record : records) {
        body += record_to_json(record, /*include_latency=*/false).dump();
        body += '\n';
    }
    return body;
}

void ResultSet::save(const std::filesystem::path& path) const {
    std::ofstream out = jsonl::open_for_write(path);
    jsonl::Json header;
    header["format"] = "mmt.results.v1";
    header["plan_digest"] = plan_digest;
    header["task"] = to_string(task);
    header["provider"] = provider_id;
    header["model"] = model;
    header["started"] = started;
    header["finished"] = finished;
    out << header.dump() << '\n';
    for (const ResultRecord& record : records) {
        out << record_to_json(record, /*include_latency=*/true).dump() << '\n';
    }
    if (!out) {
        throw HarnessError(ErrorKind::Io, "failed to write result set '" + path.string() + "'");
    }
}

ResultSet ResultSet::load(const std::filesystem::path& path) {
    ResultSet result_set;
    bool have_header = false;
    jsonl::for_each_record(path, [&](const jsonl::Json& line, int line_no) {
        std::string where = path.string() + ":" + std::to_string(line_no);
        if (!have_header) {
            if (!line.contains("format") || line["format"] != "mmt.results.v1") {
                throw HarnessError(ErrorKind::Schema,
                                   where + ": expected a result-set header with format "
                                           "'mmt.results.v1'");
            }
            result_set.plan_digest = jsonl::require_string(line, "plan_digest", where);
            result_set.task = task_from_string(jsonl::require_string(line, "task", where));
            result_set.provider_id = jsonl::require_string(line, "provider", where);
            result_set.model = jsonl::require_string(line, "model", where);
            result_set.started = jsonl::require_string(line, "started", where);
            result_set.finished = jsonl::require_string(line, "finished", where);
            have_header = true;
            return;
        }
        result_set.records.push_back(record_from_json(line, where));
    });
    if (!have_header) {
        throw HarnessError(ErrorKind::Schema, path.string() + ": empty result-set file");
    }
    check_pair_completeness(result_set, path.string());
    return result_set;
}

const ResultRecord* ResultSet::find_original(const std::string& case_id, PromptStyle style,
                                             ContextMode mode) const {
    for (const ResultRecord& record : records) {
        if (record.is_original() && record.case_id == case_id && record.style == style &&
            record.context_mode == mode) {
            return &record;
        }
    }
    return nullptr;
}

ResultSet run(const RunPlan& plan, Provider& provider, const RunOptions& options) {
    plan.validate();
    const TaskKind plan_task = plan.task();

    ResultSet out;
    out.plan_digest = plan.digest();
    out.task = plan_task;
    out.provider_id = plan.provider.name;
    out.model = plan.provider.model;
    out.started = iso_timestamp();

    struct Job {
        ResultRecord record;
        CompletionRequest request;
    };

    // Prompt rendering is pure and cheap, so it happens up front on one
    // thread; any rendering failure is a configuration error and aborts
    // before the first provider call.
    std::vector<Job> jobs;
    for (PromptStyle style : plan.styles) {
        const std::vector<Shot> shots = plan.shots_for(style);
        for (ContextMode mode : plan.context_modes) {
            auto add_job = [&](const std::string& case_id, std::optional<PerturbationType> ptype,
                               std::optional<MetamorphicRelation> relation,
                               const std::string& text, const std::optional<std::string>& context,
                               Label gold) {
                RenderedPrompt prompt =
                    render(text, context, plan_task, style, mode, shots, plan.templates);
                Job job;
                job.record.case_id = case_id;
                job.record.ptype = ptype;
                job.record.relation = relation;
                job.record.style = style;
                job.record.context_mode = mode;
                job.record.input_text = text;
                job.record.context = context;
                job.record.gold = gold;
                job.request.system_text = std::move(prompt.system_text);
                job.request.user_text = std::move(prompt.user_text);
                job.request.model_name = plan.provider.model;
                jobs.push_back(std::move(job));
            };
            for (const TestCase& test_case : plan.dataset) {
                add_job(test_case.id, std::nullopt, std::nullopt, test_case.input_text,
                        test_case.context, test_case.expected);
            }
            for (const PerturbedCase& entry : plan.suite.entries) {
                add_job(entry.base_id, entry.ptype, entry.relation, entry.text, entry.context,
                        entry.expected);
            }
        }
    }

    std::vector<std::size_t> order(jobs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    if (options.shuffle_seed) {
        SplitMix64 rng(*options.shuffle_seed);
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[rng.below(i)]);
        }
    }

    std::atomic<std::size_t> next{0};
    auto work = [&] {
        while (true) {
            const std::size_t slot = next.fetch_add(1);
            if (slot >= order.size()) break;
            Job& job = jobs[order[slot]];
            try {
                ModelResponse response = provider.complete(job.request);
                response.parsed = parse_label(response.raw_text, plan_task).value;
                job.record.response = std::move(response);
            } catch (const std::exception& e) {
                // Per-record capture: a failed completion is a recorded
                // failure, not a failed run.
                job.record.error = e.what();
                job.record.response = ModelResponse{};
                job.record.response.provider_id = plan.provider.name;
                job.record.response.request_digest = job.request.digest();
            }
        }
    };

    const int worker_count = static_cast<int>(
        std::min<std::size_t>(static_cast<std::size_t>(std::max(provider.max_in_flight(), 1)),
                              std::max<std::size_t>(jobs.size(), 1)));
    if (worker_count <= 1) {
        work();
    } else {
        std::vector<std::thread> workers;
        workers.reserve(static_cast<std::size_t>(worker_count));
        for (int i = 0; i < worker_count; ++i) workers.emplace_back(work);
        for (std::thread& worker : workers) worker.join();
    }

    out.records.reserve(jobs.size());
    for (Job& job : jobs) out.records.push_back(std::move(job.record));
    std::sort(out.records.begin(), out.records.end(),
              [](const ResultRecord& a, const ResultRecord& b) {
                  return record_key(a) < record_key(b);
              });
    out.finished = iso_timestamp();
    check_pair_completeness(out, "run");
    return out;
}

}  // namespace mmt
