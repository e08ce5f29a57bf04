#pragma once

// Internal helpers for the line-delimited JSON files the harness reads and
// writes (datasets, suites, replay stores, result sets).

#include <filesystem>
#include <fstream>
#include <functional>
#include <string>

#include "json.hpp"

#include "mmt/error.hpp"

namespace mmt::jsonl {

using Json = nlohmann::ordered_json;

/// Calls `handle(record, line_number)` for every non-blank line. Parse
/// failures are reported as Schema errors with the offending line number.
inline void for_each_record(const std::filesystem::path& path,
                            const std::function<void(const Json&, int)>& handle) {
    std::ifstream in(path);
    if (!in) {
        throw HarnessError(ErrorKind::Io, "cannot open '" + path.string() + "'");
    }
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        Json record;
        try {
            record = Json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw HarnessError(ErrorKind::Schema, path.string() + ":" +
                                                      std::to_string(line_number) + ": " + e.what());
        }
        handle(record, line_number);
    }
}

inline std::ofstream open_for_write(const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path);
    if (!out) {
        throw HarnessError(ErrorKind::Io, "cannot write '" + path.string() + "'");
    }
    return out;
}

inline std::string require_string(const Json& record, const char* key, const std::string& where) {
    if (!record.contains(key) || !record[key].is_string()) {
        throw HarnessError(ErrorKind::Schema, where + ": missing string field '" + key + "'");
    }
    return record[key].get<std::string>();
}

}  // namespace mmt::jsonl
