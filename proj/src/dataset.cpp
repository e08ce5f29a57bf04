#include "mmt/dataset.hpp"

#include <set>

#include "jsonl.hpp"

namespace mmt {

std::vector<TestCase> load_dataset(const std::filesystem::path& path) {
    std::vector<TestCase> cases;
    std::set<std::string> seen_ids;
    jsonl::for_each_record(path, [&](const jsonl::Json& record, int line) {
        std::string where = path.string() + ":" + std::to_string(line);
        TestCase test_case;
        test_case.id = jsonl::require_string(record, "id", where);
        test_case.task = task_from_string(jsonl::require_string(record, "task", where));
        test_case.input_text = jsonl::require_string(record, "text", where);
        if (record.contains("context") && !record["context"].is_null()) {
            test_case.context = jsonl::require_string(record, "context", where);
        }
        test_case.expected = label_from_string(jsonl::require_string(record, "expected", where));
        validate_test_case(test_case);
        if (!seen_ids.insert(test_case.id).second) {
            throw HarnessError(ErrorKind::Schema, where + ": duplicate id '" + test_case.id + "'");
        }
        cases.push_back(std::move(test_case));
    });
    return cases;
}

void save_dataset(const std::filesystem::path& path, std::span<const TestCase> cases) {
    auto out = jsonl::open_for_write(path);
    for (const TestCase& test_case : cases) {
        jsonl::Json record;
        record["id"] = test_case.id;
        record["task"] = to_string(test_case.task);
        record["text"] = test_case.input_text;
        if (test_case.context) record["context"] = *test_case.context;
        record["expected"] = to_string(test_case.expected);
        out << record.dump() << "\n";
    }
}

TaskKind dataset_task(std::span<const TestCase> cases) {
    if (cases.empty()) {
        throw HarnessError(ErrorKind::Schema, "empty dataset");
    }
    TaskKind task = cases.front().task;
    for (const TestCase& test_case : cases) {
        if (test_case.task != task) {
            throw HarnessError(ErrorKind::Schema,
                               "dataset mixes tasks ('" + test_case.id + "' differs)");
        }
    }
    return task;
}

}  // namespace mmt
